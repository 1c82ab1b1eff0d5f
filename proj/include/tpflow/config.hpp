#pragma once

#include <istream>
#include <string>
#include <vector>

#include "tpflow/fluid.hpp"
#include "tpflow/medium.hpp"
#include "tpflow/solver.hpp"

namespace tpf {

// Sectioned key-value case description. Parsing is total: unknown keys, bad
// values and missing required keys raise ConfigError with the line number.
struct CaseConfig {
  // [mesh]
  std::string backend = "ddfv";  // ddfv | cvfe
  int nx = 8, ny = 8;
  double distortion = 0.0;       // ddfv
  std::string split = "diagonal";  // cvfe: diagonal | acute
  std::vector<std::string> dirichlet_sides = {"left", "right"};
  std::string mesh_file;         // optional polygon-soup import
  uint64_t mesh_seed = 1;

  // [fluid]
  FluidParams fluid;

  // [medium]
  Medium medium;

  // [time]
  double dt = 0.0, t_final = 0.0;

  // [solver]
  NewtonOptions newton;
  LadderSpec ladder = LadderSpec::default_ladder();

  // [initial]
  std::string profile = "zero";  // zero | uniform | two-region
  double pg = 0.0, pw = 0.0;     // uniform
  double pg_left = 0.0, pw_left = 0.0, pg_right = 0.0, pw_right = 0.0, xsplit = 0.5;

  // [verify]
  uint64_t seed = 12345;
  int samples = 10000;
  double pressure_range = 3.0;

  // [output]
  std::string out_dir = "out";
  bool write_fields = true;
};

CaseConfig load_config(const std::string& path);
CaseConfig parse_config(std::istream& in);

// "geometric:start:factor:count" (0 appended) or an explicit comma list
// ending in 0
std::vector<double> parse_ladder_values(const std::string& text);

}  // namespace tpf
