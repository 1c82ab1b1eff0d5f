// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Desk-scale property checks of the structural guarantees the
// schemes are built around (saturation bounds, energy decomposition,
// coercivity identities, regularization consistency, operator exactness).

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <memory>
#include <vector>

#include "naive_oracles.hpp"
#include "tpflow/cvfe_scheme.hpp"
#include "tpflow/ddfv_scheme.hpp"
#include "tpflow/solver.hpp"
#include "tpflow/verify.hpp"

using namespace tpf;

namespace {

struct Harness {
  int failures = 0;

  void report(int id, const std::string& title, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!pass) ++failures;
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kLeftRight = {"left", "right"};
constexpr double kDt = 0.005;
constexpr double kTol = 1e-9;

Medium default_medium() {
  Medium m;
  m.phi = 0.2;
  return m;
}

FluidParams corey_fluid() { return FluidParams{}; }

FluidParams constant_mobility_fluid() {
  FluidParams p;
  p.mobility_exponent = 0;
  return p;
}

struct Variant {
  std::string name;
  std::unique_ptr<SchemeBackend> backend;
};

std::vector<Variant> mesh_variants() {
  std::vector<Variant> v;
  v.push_back({"ddfv-orthogonal",
               std::make_unique<DdfvBackend>(
                   DdfvMesh::build_structured(8, 8, 0.0, kLeftRight, default_medium(), 21),
                   FluidModel(corey_fluid()))});
  v.push_back({"ddfv-distorted",
               std::make_unique<DdfvBackend>(
                   DdfvMesh::build_structured(8, 8, 0.3, kLeftRight, default_medium(), 21),
                   FluidModel(corey_fluid()))});
  v.push_back({"cvfe-diagonal", std::make_unique<CvfeBackend>(
                                    CvfeMesh::build_structured(8, 8, "diagonal", kLeftRight,
                                                               default_medium()),
                                    FluidModel(corey_fluid()))});
  v.push_back({"cvfe-acute", std::make_unique<CvfeBackend>(
                                 CvfeMesh::build_structured(8, 8, "acute", kLeftRight,
                                                            default_medium()),
                                 FluidModel(corey_fluid()))});
  return v;
}

State drainage_initial(const SchemeBackend& backend) {
  VecX pg(backend.n_node()), pw(backend.n_node());
  for (int i = 0; i < backend.n_node(); ++i) {
    bool left = backend.node_position(i).x() <= 0.5;
    pg[i] = left ? 0.8 : 0.2;
    pw[i] = 0.0;
  }
  return backend.state_from_pressures(pg, pw);
}

std::vector<double> eps_ladder() {
  std::vector<double> eps;
  for (int k = 0; k <= 8; ++k) eps.push_back(1e-1 * std::pow(4.0, -k));
  eps.push_back(0.0);
  return eps;
}

// F^{eps_target, eta} solved by walking the eps ladder down, warm-started
bool solve_at(const SchemeBackend& backend, const State& prev, double eps_target, double eta,
              State& out) {
  NewtonOptions opts;
  opts.tol = kTol;
  State x = prev;
  for (double eps : eps_ladder()) {
    if (eps < eps_target) eps = eps_target;
    NewtonResult nr = newton_solve(backend, x, prev, eps, eta, kDt, opts);
    if (nr.status != SolveStatus::converged) return false;
    x = nr.state;
    if (eps == eps_target) break;
  }
  out = x;
  return true;
}

VecX random_unknowns(const SchemeBackend& backend, Rng& rng, double range) {
  VecX x(backend.n_dof());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-range, range);
  return x;
}

double simpson_oracle(const std::function<double(double)>& f, double a, double b,
                      int n = 10000) {
  if (a == b) return 0.0;
  double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

struct SolvedState {
  std::string variant;
  double eps, eta;
  const SchemeBackend* backend;
  State prev, state;
};

}  // namespace

int main() {
  Harness h;
  auto variants = mesh_variants();
  std::vector<SolvedState> eta_states;   // converged F^{0,eta}
  std::vector<SolvedState> eps_states;   // converged F^{eps,eta_max}

  // ---- criterion 1: maximum principle --------------------------------------
  {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (auto& v : variants) {
      State prev = drainage_initial(*v.backend);
      for (double eta : {1e-2, 1e-4, 0.0}) {
        State solved;
        if (!solve_at(*v.backend, prev, 0.0, eta, solved)) {
          pass = false;
          detail += v.name + " eta=" + std::to_string(eta) + " no convergence; ";
          continue;
        }
        auto [lo, hi] = v.backend->saturation_range(solved);
        if (lo < -1e-12 || hi > 1.0 + 1e-12) {
          pass = false;
          detail += v.name + " bounds violated; ";
        }
        eta_states.push_back({v.name, 0.0, eta, v.backend.get(), prev, solved});
      }
      for (double eps : {1e-2, 1e-4}) {
        State solved;
        if (solve_at(*v.backend, prev, eps, 1e-2, solved))
          eps_states.push_back({v.name, eps, 1e-2, v.backend.get(), prev, solved});
      }
    }
    double elapsed = seconds_since(t0);
    if (elapsed >= 60.0) {
      pass = false;
      detail += "runtime over budget; ";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "4 meshes x 3 eta, %.1f s", elapsed);
    h.report(1, "maximum principle on converged F^{0,eta} solves", pass,
             detail.empty() ? buf : detail);
  }

  // ---- criterion 2: energy pairing identity ---------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    std::vector<SolvedState> all = eta_states;
    all.insert(all.end(), eps_states.begin(), eps_states.end());
    for (const auto& ss : all) {
      SchemeParams par{ss.eps, ss.eta, kDt};
      EnergyTerms e = ss.backend->energy_terms(ss.state, ss.prev, par);
      double err = std::abs(e.gamma1 + e.gamma2 + e.gamma3 - e.pairing) /
                   (1.0 + std::abs(e.pairing));
      worst = std::max(worst, err);
      if (err > 1e-9) pass = false;
      double g_norm = ss.backend->g_vector(ss.state).norm();
      if (std::abs(e.pairing) > 10.0 * kTol * g_norm) pass = false;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst rel err %.2e over %zu states", worst, all.size());
    h.report(2, "energy pairing identity at converged states", pass, buf);
  }

  // ---- criterion 3: gamma3 identity -----------------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    int checked = 0;
    for (const auto& ss : eta_states) {
      if (ss.eta <= 0.0) continue;
      SchemeParams par{ss.eps, ss.eta, kDt};
      EnergyTerms e = ss.backend->energy_terms(ss.state, ss.prev, par);
      double ref = ss.eta * kDt * ss.backend->eta_quadratic(ss.state);
      double err = std::abs(e.gamma3 - ref) / std::max(1.0, std::abs(ref));
      worst = std::max(worst, err);
      if (err > 1e-10) pass = false;
      ++checked;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst rel err %.2e over %d states", worst, checked);
    h.report(3, "gamma3 equals eta dt capillary quadratic form", pass, buf);
  }

  // ---- criterion 4: gamma2 identity and eps coercivity -----------------------
  {
    bool pass = true;
    double worst = 0.0;
    int checked = 0;
    for (const auto& ss : eps_states) {
      if (!ss.backend->cross_free()) continue;  // orthogonal / all-nonnegative meshes
      SchemeParams par{ss.eps, ss.eta, kDt};
      EnergyTerms e = ss.backend->energy_terms(ss.state, ss.prev, par);
      double ref = kDt * ss.backend->gamma2_explicit(ss.state, ss.eps);
      double err = std::abs(e.gamma2 - ref) / std::max(1.0, std::abs(ref));
      worst = std::max(worst, err);
      if (err > 1e-10) pass = false;
      double lower = kDt * ss.eps *
                     (ss.backend->pressure_quadratic(ss.state.p_g) +
                      ss.backend->pressure_quadratic(ss.state.p_w));
      if (e.gamma2 < lower - 1e-12 * std::max(1.0, lower)) pass = false;
      ++checked;
    }
    if (checked == 0) pass = false;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "worst rel err %.2e over %d states, eps in {1e-2,1e-4}",
                  worst, checked);
    h.report(4, "gamma2 explicit identity and eps lower bound", pass, buf);
  }

  // ---- criterion 5: lem1 sampling -------------------------------------------
  {
    FluidModel corey{corey_fluid()};
    Lem1Report rep = check_lem1(corey, 10000, 12345, 3.0);
    FluidModel cm{constant_mobility_fluid()};
    Lem1Report rep_cm = check_lem1(cm, 1000, 12345, 3.0);
    bool pass = rep.pass && rep.violations == 0 && rep_cm.pass &&
                std::abs(rep_cm.worst_margin) <= 1e-10 &&
                std::abs(rep_cm.worst_ratio - 1.0) <= 1e-9;
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "corey: %d violations, worst margin %.2e; constant: identity margin %.1e",
                  rep.violations, rep.worst_margin, rep_cm.worst_margin);
    h.report(5, "lem1 coercivity inequality over 10^4 random pairs", pass, buf);
  }

  // ---- criterion 6: regularization consistency and continuity ----------------
  {
    bool pass = true;
    double kmax = 0.0;
    for (auto& v : variants) {
      State prev = drainage_initial(*v.backend);
      Rng rng(777);
      VecX r_reg, r_base, r0, r1;
      for (int k = 0; k < 50; ++k) {
        State s = v.backend->make_state(random_unknowns(*v.backend, rng, 3.0));
        v.backend->residual(s, prev, SchemeParams{0.0, 0.0, kDt}, r_reg);
        v.backend->residual_base(s, prev, kDt, r_base);
        if (std::memcmp(r_reg.data(), r_base.data(), sizeof(double) * r_reg.size()) != 0)
          pass = false;
      }
      for (int k = 0; k < 100; ++k) {
        State s = v.backend->make_state(random_unknowns(*v.backend, rng, 3.0));
        v.backend->residual(s, prev, SchemeParams{0.0, 0.0, kDt}, r0);
        for (auto [eps, eta] : std::vector<std::pair<double, double>>{
                 {1e-2, 0.0}, {0.0, 1e-2}, {1e-3, 1e-3}}) {
          v.backend->residual(s, prev, SchemeParams{eps, eta, kDt}, r1);
          double kk = (r1 - r0).lpNorm<Eigen::Infinity>() / (eps + eta);
          kmax = std::max(kmax, kk);
          if (!std::isfinite(kk)) pass = false;
        }
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "bit-equal at (0,0); K = %.3g", kmax);
    h.report(6, "regularization consistency (P.b) and continuity (P.a)", pass, buf);
  }

  // ---- criterion 7: continuation end-to-end ----------------------------------
  {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    LadderSpec ladder = LadderSpec::default_ladder();
    NewtonOptions opts;
    opts.tol = kTol;
    for (auto* name : {"ddfv-orthogonal", "cvfe-diagonal"}) {
      SchemeBackend* backend = nullptr;
      for (auto& v : variants)
        if (v.name == name) backend = v.backend.get();
      State initial = drainage_initial(*backend);
      TimeLoopResult run = time_loop(*backend, initial, 10 * kDt, kDt, ladder, opts);
      if (run.status != SolveStatus::converged || run.steps.size() != 10) {
        pass = false;
        detail += std::string(name) + " failed; ";
        continue;
      }
      State prev = initial;
      for (const auto& step : run.steps) {
        VecX r;
        backend->residual_base(step.result.state, prev, kDt, r);
        if (r.lpNorm<Eigen::Infinity>() > 1e-9) pass = false;
        MonitorReport mon = continuation_monitors(step.result.trace);
        if (!mon.finite) pass = false;
        prev = step.result.state;
      }
    }
    double elapsed = seconds_since(t0);
    if (elapsed >= 300.0) {
      pass = false;
      detail += "runtime over budget; ";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "10 steps, both backends, %.1f s", elapsed);
    h.report(7, "default-ladder continuation over ten implicit steps", pass,
             detail.empty() ? buf : detail);
  }

  // ---- criterion 8: oracle equivalence on 2x2 meshes --------------------------
  {
    bool pass = true;
    double worst = 0.0;
    DdfvBackend ddfv(DdfvMesh::build_structured(2, 2, 0.0, kLeftRight, default_medium()),
                     FluidModel(corey_fluid()));
    CvfeBackend cvfe(CvfeMesh::build_structured(2, 2, "diagonal", kLeftRight, default_medium()),
                     FluidModel(corey_fluid()));
    Rng rng(2468);
    for (int k = 0; k < 50; ++k) {
      double eps = (k % 2) ? 0.01 : 0.0;
      double eta = (k % 3) ? 0.005 : 0.0;
      {
        State s = ddfv.make_state(random_unknowns(ddfv, rng, 2.5));
        State prev = ddfv.make_state(random_unknowns(ddfv, rng, 0.4));
        for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
        VecX r;
        ddfv.residual(s, prev, SchemeParams{eps, eta, kDt}, r);
        VecX rn = test_oracles::naive_ddfv_residual(ddfv, s, prev, eps, eta, kDt);
        double scale = std::max(1e-3, r.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < r.size(); ++i) {
          double err = std::abs(r[i] - rn[i]) / std::max(scale, std::abs(r[i]));
          worst = std::max(worst, err);
          if (err > 1e-12) pass = false;
        }
      }
      {
        State s = cvfe.make_state(random_unknowns(cvfe, rng, 2.5));
        State prev = cvfe.make_state(random_unknowns(cvfe, rng, 0.4));
        for (int i = 0; i < prev.s_g.size(); ++i) prev.s_g[i] = FluidModel::clamp_z(prev.s_g[i]);
        VecX r;
        cvfe.residual(s, prev, SchemeParams{eps, eta, kDt}, r);
        VecX rn = test_oracles::naive_cvfe_residual(cvfe, s, prev, eps, eta, kDt);
        double scale = std::max(1e-3, r.lpNorm<Eigen::Infinity>());
        for (int i = 0; i < r.size(); ++i) {
          double err = std::abs(r[i] - rn[i]) / std::max(scale, std::abs(r[i]));
          worst = std::max(worst, err);
          if (err > 1e-12) pass = false;
        }
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst rel err %.2e, 50 states per backend", worst);
    h.report(8, "assembly matches the naive per-cell oracle", pass, buf);
  }

  // ---- criterion 9: operator exactness ----------------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    for (double distortion : {0.0, 0.3}) {
      DdfvMesh mesh =
          DdfvMesh::build_structured(8, 8, distortion, kLeftRight, default_medium(), 21);
      Vec2 grad_ref(2.0, -1.5);
      VecX u(mesh.n_node());
      for (int i = 0; i < mesh.n_node(); ++i)
        u[i] = grad_ref.dot(mesh.nodes()[i].center) + 0.25;
      for (const auto& d : mesh.diamonds()) {
        double err = (diamond_gradient(d, u) - grad_ref).norm();
        worst = std::max(worst, err);
        if (err > 1e-10) pass = false;
      }
    }
    auto coef = stiffness_coeffs({0, 0}, {1, 0}, {0, 1}, Mat2::Identity());
    if (std::abs(coef[pair_index(1, 2)] - 0.0) > 1e-14) pass = false;
    if (std::abs(coef[pair_index(0, 1)] - 0.5) > 1e-14) pass = false;
    if (std::abs(coef[pair_index(0, 2)] - 0.5) > 1e-14) pass = false;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "gradient err %.2e; P1 coefficients exact", worst);
    h.report(9, "discrete operators reproduce affine / P1 references", pass, buf);
  }

  // ---- criterion 10: fluid-function oracles -----------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    FluidModel fluid{corey_fluid()};
    auto track = [&](double got, double want, double tol) {
      double err = std::abs(got - want);
      worst = std::max(worst, err);
      if (err > tol) pass = false;
    };
    for (int i = 0; i <= 20; ++i) {
      double s = i / 20.0;
      track(fluid.corrective(Phase::gas, s),
            simpson_oracle(
                [&](double u) { return fluid.corrective_ratio(Phase::gas, u) * fluid.pc_prime(u); },
                0.0, s),
            1e-8);
      track(fluid.corrective(Phase::wetting, s),
            simpson_oracle(
                [&](double u) {
                  return fluid.corrective_ratio(Phase::wetting, u) * fluid.pc_prime(u);
                },
                0.0, s),
            1e-8);
      track(fluid.xi(s),
            simpson_oracle([&](double u) { return fluid.xi_ratio(u) * fluid.pc_prime(u); }, 0.0,
                           s),
            1e-8);
    }
    for (int i = 0; i <= 10; ++i) {
      double p = -2.0 + 0.4 * i;
      for (Phase a : kPhases) {
        double g_ref =
            simpson_oracle([&](double z) { return 1.0 / fluid.density(a, z); }, 0.0, p);
        track(fluid.g_int(a, p), g_ref, 1e-8);
        track(fluid.big_h(a, p), fluid.density(a, p) * g_ref - p, 1e-8);
      }
      double pb = 1.3 - 0.1 * i;
      double mean_inv =
          p == pb ? 1.0 / fluid.density(Phase::gas, p)
                  : simpson_oracle([&](double z) { return 1.0 / fluid.density(Phase::gas, z); },
                                   p, pb) /
                        (pb - p);
      track(fluid.interface_density(Phase::gas, p, pb), 1.0 / mean_inv, 1e-8);
    }
    // constant-density H vanishes identically
    FluidParams cd = corey_fluid();
    cd.rho0 = cd.rho1 = 800.0;
    FluidModel fluid_cd(cd);
    for (int i = 0; i <= 10; ++i) {
      double p = -4.0 + 0.8 * i;
      if (std::abs(fluid_cd.big_h(Phase::gas, p)) > 1e-12) pass = false;
    }
    // constant mobilities: p_hat and xi are pc/2
    FluidModel cm{constant_mobility_fluid()};
    for (int i = 0; i <= 20; ++i) {
      double s = i / 20.0;
      if (std::abs(cm.corrective(Phase::gas, s) - 0.5 * cm.pc(s)) > 1e-10) pass = false;
      if (std::abs(cm.xi(s) - 0.5 * cm.pc(s)) > 1e-10) pass = false;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst abs err %.2e vs 10^4-point quadrature", worst);
    h.report(10, "fluid integral functions match dense quadrature oracles", pass, buf);
  }

  if (h.failures) {
    std::cout << h.failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
