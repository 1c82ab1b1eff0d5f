#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "tpflow/config.hpp"

using namespace tpf;

namespace {

CaseConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const char* kReference = R"(
# reference drainage case
[mesh]
backend = ddfv
nx = 8
ny = 8
distortion = 0.0
dirichlet = left,right

[fluid]
pc_slope = 1.0
mu_g = 1.0
mu_w = 1.0
rho0 = 500
rho1 = 1000

[medium]
phi = 0.2
lambda = 1 0 1
region1.box = 0 0 0.5 1
region1.phi = 0.25

[time]
dt = 0.005
t_final = 0.05

[solver]
tol = 1e-9
eps_ladder = geometric:1e-1:0.25:9
eta_ladder = geometric:1e-2:0.25:9

[initial]
profile = two-region
pg_left = 0.8
pg_right = 0.2

[verify]
seed = 12345
samples = 10000

[output]
dir = out
fields = on
)";

}  // namespace

TEST_CASE("reference config parses completely") {
  CaseConfig cfg = parse(kReference);
  CHECK(cfg.backend == "ddfv");
  CHECK(cfg.nx == 8);
  CHECK(cfg.dirichlet_sides == std::vector<std::string>{"left", "right"});
  CHECK(cfg.fluid.rho0 == 500.0);
  CHECK(cfg.medium.regions.size() == 1);
  CHECK(cfg.medium.regions[0].phi == 0.25);
  CHECK(cfg.dt == 0.005);
  CHECK(cfg.newton.tol == 1e-9);
  CHECK(cfg.ladder.eps.size() == 10);
  CHECK(cfg.ladder.eps.front() == doctest::Approx(0.1));
  CHECK(cfg.ladder.eps.back() == 0.0);
  CHECK(cfg.profile == "two-region");
  CHECK(cfg.pg_left == 0.8);
  CHECK(cfg.seed == 12345);
  CHECK(cfg.write_fields);
}

TEST_CASE("missing required keys are named") {
  try {
    parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[time]\nt_final = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("time.dt") != std::string::npos);
  }
  try {
    parse("[time]\ndt = 1\nt_final = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mesh.backend") != std::string::npos);
  }
}

TEST_CASE("bad values carry line numbers") {
  try {
    parse("[mesh]\nbackend = ddfv\nnx = four\nny = 4\n[time]\ndt = 1\nt_final = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(
      parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\nbogus = 1\n[time]\ndt = 1\nt_final = 1\n"),
      ConfigError);
  CHECK_THROWS_AS(parse("[mesh]\nbackend = tpfa\nnx = 4\nny = 4\n[time]\ndt = 1\nt_final = 1\n"),
                  ConfigError);
}

TEST_CASE("physical bounds are validated") {
  // negative porosity
  CHECK_THROWS_AS(parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[medium]\nphi = -0.2\n"
                        "[time]\ndt = 1\nt_final = 1\n"),
                  ConfigError);
  // non-SPD permeability
  CHECK_THROWS_AS(parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[medium]\nlambda = 1 5 1\n"
                        "[time]\ndt = 1\nt_final = 1\n"),
                  ConfigError);
  // bad density bounds
  CHECK_THROWS_AS(parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[fluid]\nrho0 = -2\n"
                        "[time]\ndt = 1\nt_final = 1\n"),
                  ConfigError);
  // nonpositive dt
  CHECK_THROWS_AS(parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[time]\ndt = 0\nt_final = 1\n"),
                  ConfigError);
}

TEST_CASE("ladder parsing") {
  auto geo = parse_ladder_values("geometric:1e-1:0.25:3");
  REQUIRE(geo.size() == 4);
  CHECK(geo[0] == doctest::Approx(0.1));
  CHECK(geo[1] == doctest::Approx(0.025));
  CHECK(geo[3] == 0.0);

  auto list = parse_ladder_values("0.5, 0.1, 0.01, 0");
  REQUIRE(list.size() == 4);
  CHECK(list[1] == 0.1);
  CHECK(list.back() == 0.0);

  CHECK_THROWS_AS(parse_ladder_values("geometric:1e-1:2.0:3"), ConfigError);
  // a non-decreasing explicit ladder is rejected downstream
  CHECK_THROWS_AS(
      parse("[mesh]\nbackend = ddfv\nnx = 4\nny = 4\n[time]\ndt = 1\nt_final = 1\n"
            "[solver]\neps_ladder = 0.1, 0.5, 0\n"),
      ConfigError);
}

TEST_CASE("defaults fill optional sections") {
  CaseConfig cfg = parse("[mesh]\nbackend = cvfe\nnx = 4\nny = 4\n[time]\ndt = 0.01\nt_final = 0.1\n");
  CHECK(cfg.split == "diagonal");
  CHECK(cfg.fluid.mobility_exponent == 2);
  CHECK(cfg.medium.phi == 0.2);
  CHECK(cfg.newton.max_iter == 30);
  CHECK(cfg.ladder.eps.size() == 10);  // default ladder
  CHECK(cfg.profile == "zero");
  CHECK(cfg.out_dir == "out");
}
