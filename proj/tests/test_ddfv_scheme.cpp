#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "tpflow/ddfv_scheme.hpp"

#include "naive_oracles.hpp"

using namespace tpf;

namespace {

const std::vector<std::string> kLeftRight = {"left", "right"};

FluidParams default_fluid() { return FluidParams{}; }

FluidParams linear_fluid() {
  // constant mobilities and constant density make the residual affine in p
  FluidParams p;
  p.mobility_exponent = 0;
  p.rho0 = p.rho1 = 800.0;
  return p;
}

Medium default_medium() {
  Medium m;
  m.phi = 0.2;
  return m;
}

DdfvBackend make_backend(int nx, int ny, double distortion, const FluidParams& fp,
                         const Medium& medium = default_medium()) {
  return DdfvBackend(DdfvMesh::build_structured(nx, ny, distortion, kLeftRight, medium, 21),
                     FluidModel(fp));
}

State random_state(const DdfvBackend& backend, Rng& rng, double range) {
  VecX x(backend.n_dof());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-range, range);
  return backend.make_state(x);
}

}  // namespace

TEST_CASE("upwind mobility") {
  FluidModel fluid(default_fluid());
  auto [up0, mn0] = upwind_mobility(fluid, Phase::gas, 0.0, 0.3, 0.8, 0.0);
  CHECK(up0 == fluid.mobility(Phase::gas, 0.8));  // dp >= 0 includes equality
  CHECK(mn0 == fluid.mobility(Phase::gas, 0.3));

  auto [up1, mn1] = upwind_mobility(fluid, Phase::gas, -2.0, 0.5, 0.5, 0.01);
  CHECK(up1 == mn1);
  CHECK(up1 == fluid.mobility_eps(Phase::gas, 0.5, 0.01));

  auto [up2, mn2] = upwind_mobility(fluid, Phase::gas, -1.0, 0.2, 0.9, 0.0);
  CHECK(up2 == fluid.mobility(Phase::gas, 0.2));
  CHECK(mn2 == fluid.mobility(Phase::gas, 0.2));
}

TEST_CASE("diamond fluxes") {
  DdfvBackend backend = make_backend(4, 4, 0.0, default_fluid());
  const DdfvMesh& mesh = backend.mesh();

  SUBCASE("uniform pressures give zero fluxes") {
    State s = backend.state_from_pressures(VecX::Constant(mesh.n_node(), 0.4),
                                           VecX::Constant(mesh.n_node(), 0.1));
    // Dirichlet nodes are zeroed, so restrict to diamonds away from them
    VecX gg = backend.g_nodes(s, Phase::gas), gw = backend.g_nodes(s, Phase::wetting);
    for (const auto& d : mesh.diamonds()) {
      bool interior = mesh.nodes()[d.a].unknown >= 0 && mesh.nodes()[d.b].unknown >= 0 &&
                      mesh.nodes()[d.vs].unknown >= 0 && mesh.nodes()[d.ws].unknown >= 0;
      if (!interior) continue;
      auto f = backend.diamond_fluxes(d, s, 0.0, gg, gw);
      for (int a = 0; a < 2; ++a) {
        CHECK(f.v_kl[a] == 0.0);
        CHECK(f.v_ksls[a] == 0.0);
      }
      CHECK(f.pc_kl == 0.0);
    }
  }

  SUBCASE("orthogonal mesh drops the cross term") {
    Rng rng(5);
    State s = random_state(backend, rng, 1.0);
    VecX gg = backend.g_nodes(s, Phase::gas), gw = backend.g_nodes(s, Phase::wetting);
    for (const auto& d : mesh.diamonds()) {
      auto f = backend.diamond_fluxes(d, s, 0.02, gg, gw);
      for (Phase a : kPhases) {
        double dp = s.p(a, d.b) - s.p(a, d.a);
        auto [up, mn] = upwind_mobility(backend.fluid(), a, dp, s.s(a, d.a), s.s(a, d.b), 0.02);
        (void)mn;
        CHECK(f.v_kl[parity(a)] == up * d.tau_kl * dp);
      }
    }
  }
}

TEST_CASE("flux formula arithmetic on a hand-built diamond") {
  // tau=1, eta=0.5, delta p = 2, dual delta p = 1, constant mobility m = 1
  FluidParams fp;
  fp.mobility_exponent = 0;
  fp.rho0 = fp.rho1 = 1.0;  // interface densities are 1
  DdfvBackend backend(DdfvMesh::build_structured(2, 2, 0.0, kLeftRight, default_medium()),
                      FluidModel(fp));
  Diamond d;
  d.a = 0;
  d.b = 1;
  d.vs = 2;
  d.ws = 3;
  d.tau_kl = 1.0;
  d.tau_ksls = 2.0;
  d.eta_d = 0.5;
  State s;
  s.p_g = VecX::Zero(backend.n_node());
  s.p_w = VecX::Zero(backend.n_node());
  s.p_g[0] = 0.0;
  s.p_g[1] = 2.0;
  s.p_g[2] = 0.0;
  s.p_g[3] = 1.0;
  s.s_g = VecX::Constant(backend.n_node(), 0.5);
  VecX gg = backend.g_nodes(s, Phase::gas), gw = backend.g_nodes(s, Phase::wetting);
  auto f = backend.diamond_fluxes(d, s, 0.0, gg, gw);
  CHECK(f.v_kl[0] == doctest::Approx(2.0 + 0.5 * 1.0).epsilon(1e-15));
  CHECK(f.v_ksls[0] == doctest::Approx(2.0 * 1.0 + 0.5 * 2.0).epsilon(1e-15));
  // capillary flux: pc_kl = tau * delta(p_g - p_w)
  CHECK(f.pc_kl == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("capillary flux pairing reproduces the tau quadratic form") {
  DdfvBackend backend = make_backend(4, 3, 0.25, default_fluid());
  Rng rng(31);
  State s = random_state(backend, rng, 2.0);
  VecX gg = backend.g_nodes(s, Phase::gas), gw = backend.g_nodes(s, Phase::wetting);
  double sum = 0.0;
  for (const auto& d : backend.mesh().diamonds()) {
    auto f = backend.diamond_fluxes(d, s, 0.0, gg, gw);
    double dpc_kl = (s.p_g[d.b] - s.p_w[d.b]) - (s.p_g[d.a] - s.p_w[d.a]);
    double dpc_st = (s.p_g[d.ws] - s.p_w[d.ws]) - (s.p_g[d.vs] - s.p_w[d.vs]);
    sum += f.pc_kl * dpc_kl + f.pc_ksls * dpc_st;
  }
  double ref = backend.mesh().tau_quadratic(s.p_g - s.p_w);
  CHECK(sum == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("stationary uniform zero state has zero residual") {
  DdfvBackend backend = make_backend(4, 4, 0.0, default_fluid());
  State zero = backend.make_state(VecX::Zero(backend.n_dof()));
  VecX r;
  backend.residual(zero, zero, SchemeParams{0.05, 0.01, 0.01}, r);
  CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("base scheme equals the regularized residual at (0,0) bit for bit") {
  DdfvBackend backend = make_backend(3, 3, 0.2, default_fluid());
  Rng rng(77);
  VecX r_reg, r_base;
  for (int k = 0; k < 20; ++k) {
    State s = random_state(backend, rng, 3.0);
    State prev = random_state(backend, rng, 0.5);
    // previous state must satisfy the saturation bounds hypothesis
    for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
    backend.residual(s, prev, SchemeParams{0.0, 0.0, 0.02}, r_reg);
    backend.residual_base(s, prev, 0.02, r_base);
    REQUIRE(r_reg.size() == r_base.size());
    CHECK(std::memcmp(r_reg.data(), r_base.data(), sizeof(double) * r_reg.size()) == 0);
  }
}

TEST_CASE("residual matches the naive per-cell oracle") {
  for (double distortion : {0.0, 0.3}) {
    DdfvBackend backend = make_backend(2, 2, distortion, default_fluid());
    Rng rng(911);
    for (int k = 0; k < 10; ++k) {
      State s = random_state(backend, rng, 2.5);
      State prev = random_state(backend, rng, 0.4);
      for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
      for (auto [eps, eta] : std::vector<std::pair<double, double>>{
               {0.0, 0.0}, {0.05, 0.0}, {0.0, 0.02}, {0.03, 0.01}}) {
        VecX r;
        backend.residual(s, prev, SchemeParams{eps, eta, 0.01}, r);
        VecX r_naive = test_oracles::naive_ddfv_residual(backend, s, prev, eps, eta, 0.01);
        double scale = std::max(1e-3, r.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < r.size(); ++i) {
          CHECK(std::abs(r[i] - r_naive[i]) <= 1e-12 * std::max(scale, std::abs(r[i])));
        }
      }
    }
  }
}

TEST_CASE("incompressible residual ignores a common pressure shift") {
  FluidParams fp = default_fluid();
  fp.rho0 = fp.rho1 = 800.0;  // constant density
  DdfvBackend backend = make_backend(3, 3, 0.1, fp);
  const FluidModel& fluid = backend.fluid();
  // build the shifted states by hand so the shift also reaches the boundary
  // values (the invariant is about the assembled map, not the solution space)
  auto manual_state = [&](const VecX& pg, const VecX& pw) {
    State s;
    s.p_g = pg;
    s.p_w = pw;
    s.s_g.resize(pg.size());
    for (int i = 0; i < pg.size(); ++i) s.s_g[i] = fluid.pc_inverse(pg[i] - pw[i]);
    return s;
  };
  Rng rng(4);
  VecX pg(backend.n_node()), pw(backend.n_node());
  for (int i = 0; i < backend.n_node(); ++i) {
    pg[i] = rng.uniform(0.1, 0.9);
    pw[i] = rng.uniform(-0.4, 0.2);
  }
  State s = manual_state(pg, pw);
  State prev = manual_state(0.5 * pg, 0.5 * pw);
  for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);

  const double shift = 2.0;  // a power of two keeps the differences near-exact
  State s2 = manual_state(pg.array() + shift, pw.array() + shift);
  State prev2 = manual_state(prev.p_g.array() + shift, prev.p_w.array() + shift);
  prev2.s_g = prev.s_g;

  SchemeParams par{0.01, 0.005, 0.01};
  VecX r0, r1;
  backend.residual(s, prev, par, r0);
  backend.residual(s2, prev2, par, r1);
  double scale = std::max(1.0, r0.lpNorm<Eigen::Infinity>());
  CHECK((r0 - r1).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
}

TEST_CASE("jacobian sparsity pattern respects the diamond stencil") {
  DdfvBackend backend = make_backend(3, 3, 0.15, default_fluid());
  const DdfvMesh& mesh = backend.mesh();
  Rng rng(8);
  State s = random_state(backend, rng, 1.0);
  State prev = random_state(backend, rng, 0.4);
  for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
  SpMat jac = backend.jacobian(s, prev, SchemeParams{0.01, 0.01, 0.01});

  // adjacency through shared diamonds
  const int n = backend.n_unknown();
  std::vector<std::vector<bool>> adjacent(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) adjacent[i][i] = true;
  for (const auto& d : mesh.diamonds()) {
    int ids[4] = {d.a, d.b, d.vs, d.ws};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        int ui = mesh.nodes()[ids[i]].unknown, uj = mesh.nodes()[ids[j]].unknown;
        if (ui >= 0 && uj >= 0) adjacent[ui][uj] = true;
      }
    }
  }
  for (int col = 0; col < jac.outerSize(); ++col) {
    for (SpMat::InnerIterator it(jac, col); it; ++it) {
      if (it.value() == 0.0) continue;
      CHECK(adjacent[it.row() % n][it.col() % n]);
    }
  }
}

TEST_CASE("jacobian of the affine configuration is exact") {
  DdfvBackend backend = make_backend(3, 3, 0.0, linear_fluid());
  // saturations stay inside (0,1) for pressures in a narrow band
  Rng rng(15);
  VecX x(backend.n_dof());
  for (int i = 0; i < backend.n_unknown(); ++i) {
    x[i] = 0.55 + 0.02 * rng.uniform01();                 // p_g
    x[backend.n_unknown() + i] = 0.02 * rng.uniform01();  // p_w
  }
  State s = backend.make_state(x);
  State prev = s;
  SchemeParams par{0.0, 0.0, 0.01};
  SpMat jac = backend.jacobian(s, prev, par);
  // affine residual: J * v equals the exact directional difference
  Rng rng2(16);
  VecX v(backend.n_dof());
  for (int i = 0; i < v.size(); ++i) v[i] = 1e-3 * rng2.uniform(-1, 1);
  VecX r0, r1;
  backend.residual(s, prev, par, r0);
  backend.residual(backend.make_state(x + v), prev, par, r1);
  VecX lhs = jac * v;
  VecX rhs = r1 - r0;
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <=
        1e-6 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("jacobian directional derivative converges") {
  DdfvBackend backend = make_backend(3, 3, 0.1, default_fluid());
  Rng rng(23);
  // a state away from upwind switches and clamp kinks
  VecX x(backend.n_dof());
  for (int i = 0; i < backend.n_unknown(); ++i) {
    x[i] = 0.4 + 0.3 * rng.uniform01();
    x[backend.n_unknown() + i] = -0.2 * rng.uniform01();
  }
  State s = backend.make_state(x);
  State prev = backend.make_state(0.5 * x);
  for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
  SchemeParams par{0.01, 0.01, 0.01};
  SpMat jac = backend.jacobian(s, prev, par);
  VecX v(backend.n_dof());
  Rng rng2(24);
  for (int i = 0; i < v.size(); ++i) v[i] = rng2.uniform(-1, 1);
  VecX r0;
  backend.residual(s, prev, par, r0);
  double err_prev = 1e300;
  for (double t : {1e-4, 1e-5}) {
    VecX rt;
    backend.residual(backend.make_state(x + t * v), prev, par, rt);
    double err = ((rt - r0) / t - jac * v).norm() / (jac * v).norm();
    CHECK(err < 1e-2);
    CHECK(err < err_prev * 1.5);  // does not blow up as t shrinks
    err_prev = err;
  }
}

TEST_CASE("energy identities at arbitrary states") {
  for (double distortion : {0.0, 0.2}) {
    DdfvBackend backend = make_backend(4, 4, distortion, default_fluid());
    Rng rng(41);
    for (int k = 0; k < 5; ++k) {
      State s = random_state(backend, rng, 2.0);
      State prev = random_state(backend, rng, 0.5);
      for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
      SchemeParams par{0.01, 0.02, 0.015};
      EnergyTerms e = backend.energy_terms(s, prev, par);

      // the decomposition is algebraic: it holds at every state
      CHECK(std::abs(e.gamma1 + e.gamma2 + e.gamma3 - e.pairing) <=
            1e-9 * (1.0 + std::abs(e.pairing)));

      // gamma3 equals eta dt ||p_g - p_w||^2_tau through rho * dg = dp
      double ref3 = par.eta * par.dt * backend.eta_quadratic(s);
      CHECK(std::abs(e.gamma3 - ref3) <= 1e-10 * std::max(1.0, std::abs(ref3)));

      if (distortion == 0.0) {
        // orthogonal mesh: gamma2 is the explicit mobility-weighted form
        double ref2 = par.dt * backend.gamma2_explicit(s, par.eps);
        CHECK(std::abs(e.gamma2 - ref2) <= 1e-10 * std::max(1.0, std::abs(ref2)));
        double lower = par.dt * par.eps *
                       (backend.pressure_quadratic(s.p_g) + backend.pressure_quadratic(s.p_w));
        CHECK(e.gamma2 >= lower - 1e-12 * std::max(1.0, lower));
      }
    }
  }
}

TEST_CASE("saturation range and zeta norms") {
  DdfvBackend backend = make_backend(3, 3, 0.0, default_fluid());
  State zero = backend.make_state(VecX::Zero(backend.n_dof()));
  auto [lo, hi] = backend.saturation_range(zero);
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  ZetaNorms z = backend.zeta_norms(zero);
  CHECK(z.p == 0.0);
  CHECK(z.xi == 0.0);
  CHECK(z.pc == 0.0);
}
