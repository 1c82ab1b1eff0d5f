#include "tpflow/solver.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace tpf {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::singular_linearization: return "singular_linearization";
    case SolveStatus::stagnation: return "stagnation";
    case SolveStatus::continuation_failed: return "continuation_failed";
  }
  return "unknown";
}

LinearSolveResult linear_solve(const SpMat& matrix, const VecX& rhs) {
  LinearSolveResult out;
  out.x = VecX::Zero(rhs.size());
  double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    out.ok = true;
    return out;
  }
  Eigen::SparseLU<SpMat> lu;
  lu.compute(matrix);
  if (lu.info() != Eigen::Success) return out;
  out.x = lu.solve(rhs);
  // up to two refinement passes before judging the 1e-12 residual gate
  for (int it = 0; it < 3; ++it) {
    VecX r = rhs - matrix * out.x;
    out.relative_residual = r.norm() / bnorm;
    if (out.relative_residual <= 1e-12) {
      out.ok = true;
      return out;
    }
    out.x += lu.solve(r);
  }
  VecX r = rhs - matrix * out.x;
  out.relative_residual = r.norm() / bnorm;
  out.ok = out.relative_residual <= 1e-12;
  return out;
}

namespace {

double scaled_inf_norm(const VecX& r, const VecX& weights) {
  double m = 0.0;
  for (int i = 0; i < r.size(); ++i) m = std::max(m, std::abs(r[i]) / weights[i]);
  return m;
}

}  // namespace

NewtonResult newton_solve(const SchemeBackend& backend, const State& initial, const State& prev,
                          double eps, double eta, double dt, const NewtonOptions& opts) {
  if (opts.tol <= 0.0) throw InvalidParams("newton tolerance must be positive");
  SchemeParams par{eps, eta, dt};
  NewtonResult res;
  res.state = initial;
  VecX weights = backend.row_weights();
  VecX x = backend.pack(initial);
  VecX r;
  backend.residual(res.state, prev, par, r);
  res.residual_scaled = scaled_inf_norm(r, weights);
  res.residual_inf = r.lpNorm<Eigen::Infinity>();
  res.history.push_back(res.residual_scaled);

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (res.residual_scaled <= opts.tol) {
      res.status = SolveStatus::converged;
      return res;
    }
    SpMat jac = backend.jacobian(res.state, prev, par);
    LinearSolveResult lin = linear_solve(jac, r);
    if (!lin.ok) {
      res.status = SolveStatus::singular_linearization;
      return res;
    }
    VecX dx = -lin.x;

    // backtracking on the residual 2-norm
    double r2 = r.norm();
    double step = 1.0;
    State trial;
    VecX rt;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      trial = backend.make_state(x + step * dx);
      backend.residual(trial, prev, par, rt);
      if (rt.norm() < r2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.status = SolveStatus::stagnation;
      return res;
    }
    x += step * dx;
    res.state = trial;
    r = rt;
    res.residual_scaled = scaled_inf_norm(r, weights);
    res.residual_inf = r.lpNorm<Eigen::Infinity>();
    res.history.push_back(res.residual_scaled);
    // count the accepted update
    if (res.residual_scaled <= opts.tol) {
      ++res.iterations;
      res.status = SolveStatus::converged;
      return res;
    }
  }
  res.status = SolveStatus::stagnation;
  return res;
}

LadderSpec LadderSpec::default_ladder() {
  LadderSpec l;
  for (int k = 0; k <= 8; ++k) l.eps.push_back(1e-1 * std::pow(4.0, -k));
  l.eps.push_back(0.0);
  for (int k = 0; k <= 8; ++k) l.eta.push_back(1e-2 * std::pow(4.0, -k));
  l.eta.push_back(0.0);
  return l;
}

void LadderSpec::validate() const {
  auto check = [](const std::vector<double>& v, const char* what) {
    if (v.empty()) throw InvalidParams(std::string(what) + " ladder is empty");
    for (size_t i = 0; i + 1 < v.size(); ++i)
      if (v[i + 1] >= v[i]) throw InvalidParams(std::string(what) + " ladder must be strictly decreasing");
    if (v.back() != 0.0) throw InvalidParams(std::string(what) + " ladder must end at 0");
    if (v.front() < 0.0) throw InvalidParams(std::string(what) + " ladder must be nonnegative");
  };
  check(eps, "eps");
  check(eta, "eta");
}

namespace {

Rung make_rung(const SchemeBackend& backend, const NewtonResult& nr, double eps, double eta,
               bool inserted) {
  Rung r;
  r.eps = eps;
  r.eta = eta;
  r.newton_iters = nr.iterations;
  r.residual_inf = nr.residual_inf;
  auto [lo, hi] = backend.saturation_range(nr.state);
  r.sat_min = lo;
  r.sat_max = hi;
  r.zeta = backend.zeta_norms(nr.state);
  r.inserted = inserted;
  return r;
}

// next backoff value strictly between `from` (last good) and `to` (failing)
double backoff_between(double from, double to) {
  if (from > 0.0 && to > 0.0) return std::sqrt(from * to);
  return std::max(from, to) * 0.1;
}

}  // namespace

ContinuationResult continuation_solve(const SchemeBackend& backend, const State& prev,
                                      const LadderSpec& ladder, double dt,
                                      const NewtonOptions& opts) {
  ladder.validate();
  ContinuationResult out;
  State current = prev;  // warm start from the previous time level
  bool have_good = false;
  double good_eps = -1.0, good_eta = -1.0;

  // Solve one rung, inserting up to five intermediate values on failure.
  auto solve_rung = [&](double target, bool is_eps, double fixed) -> bool {
    double from = is_eps ? good_eps : good_eta;
    std::vector<double> pending = {target};
    int refinements = 0;
    while (!pending.empty()) {
      double value = pending.back();
      double eps = is_eps ? value : 0.0;
      double eta = is_eps ? fixed : value;
      NewtonResult nr = newton_solve(backend, current, prev, eps, eta, dt, opts);
      if (nr.status == SolveStatus::converged) {
        pending.pop_back();
        double moved =
            (backend.pack(nr.state) - backend.pack(current)).lpNorm<Eigen::Infinity>();
        current = nr.state;
        Rung rung = make_rung(backend, nr, eps, eta, value != target);
        rung.step_distance = moved;
        out.trace.rungs.push_back(rung);
        if (is_eps)
          good_eps = value;
        else
          good_eta = value;
        have_good = true;
        from = value;
      } else {
        if (!have_good || refinements >= 5) {
          out.detail = "newton " + to_string(nr.status) + " at eps=" + std::to_string(eps) +
                       " eta=" + std::to_string(eta);
          return false;
        }
        ++refinements;
        pending.push_back(backoff_between(from, value));
      }
    }
    return true;
  };

  // proof order: eps -> 0 at the largest eta, then eta -> 0 at eps = 0
  double eta_max = ladder.eta.front();
  for (double eps : ladder.eps) {
    good_eta = eta_max;
    if (!solve_rung(eps, true, eta_max)) {
      out.status = SolveStatus::continuation_failed;
      out.state = current;
      out.last_good_eps = good_eps;
      out.last_good_eta = eta_max;
      return out;
    }
  }
  for (size_t i = 1; i < ladder.eta.size(); ++i) {
    if (!solve_rung(ladder.eta[i], false, 0.0)) {
      out.status = SolveStatus::continuation_failed;
      out.state = current;
      out.last_good_eps = 0.0;
      out.last_good_eta = good_eta;
      return out;
    }
  }
  out.status = SolveStatus::converged;
  out.state = current;
  out.last_good_eps = 0.0;
  out.last_good_eta = 0.0;
  return out;
}

TimeLoopResult time_loop(const SchemeBackend& backend, const State& initial, double t_final,
                         double dt, const LadderSpec& ladder, const NewtonOptions& opts) {
  if (dt <= 0.0 || t_final <= 0.0) throw InvalidParams("dt and t_final must be positive");
  auto [lo, hi] = backend.saturation_range(initial);
  if (lo < -1e-12 || hi > 1.0 + 1e-12)
    throw InvalidParams("initial saturations violate the physical bounds");

  TimeLoopResult out;
  State prev = initial;
  int n_steps = static_cast<int>(std::round(t_final / dt));
  if (n_steps < 1) n_steps = 1;
  for (int step = 1; step <= n_steps; ++step) {
    StepRecord rec;
    rec.step = step;
    rec.time = step * dt;
    rec.result = continuation_solve(backend, prev, ladder, dt, opts);
    bool ok = rec.result.status == SolveStatus::converged;
    out.steps.push_back(std::move(rec));
    if (!ok) {
      out.status = SolveStatus::continuation_failed;
      out.failed_step = step;
      return out;
    }
    prev = out.steps.back().result.state;
  }
  return out;
}

double existence_radius(double c_n, double c_gamma1, double eps, double eta, double dt,
                        double nu) {
  (void)eta;
  if (eps <= 0.0 || dt <= 0.0 || nu <= 0.0)
    throw InvalidParams("existence radius needs eps, dt, nu > 0");
  if (c_n < 0.0 || c_gamma1 < 0.0) throw InvalidParams("energy constants must be nonnegative");
  double a = dt * nu * eps;
  double b = std::sqrt(2.0) * c_gamma1;
  return (b + std::sqrt(b * b + 4.0 * a * c_n)) / (2.0 * a);
}

}  // namespace tpf
