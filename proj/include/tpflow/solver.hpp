#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpflow/backend.hpp"

namespace tpf {

enum class SolveStatus { converged, singular_linearization, stagnation, continuation_failed };

std::string to_string(SolveStatus s);

struct LinearSolveResult {
  VecX x;
  bool ok = false;
  double relative_residual = 0.0;
};

// Direct sparse LU with iterative refinement; ok iff ||Ax-b||/||b|| <= 1e-12.
LinearSolveResult linear_solve(const SpMat& matrix, const VecX& rhs);

struct NewtonOptions {
  double tol = 1e-9;     // on the row-weight scaled infinity norm
  int max_iter = 30;
  int max_halvings = 20;  // Armijo backtracking budget
};

struct NewtonResult {
  SolveStatus status = SolveStatus::stagnation;
  State state;
  int iterations = 0;
  double residual_inf = 0.0;     // plain infinity norm
  double residual_scaled = 0.0;  // scaled norm used for the tolerance
  std::vector<double> history;   // scaled norm per iterate
};

NewtonResult newton_solve(const SchemeBackend& backend, const State& initial, const State& prev,
                          double eps, double eta, double dt, const NewtonOptions& opts);

struct LadderSpec {
  std::vector<double> eps;  // strictly decreasing, last entry 0
  std::vector<double> eta;  // strictly decreasing, last entry 0

  static LadderSpec default_ladder();
  void validate() const;
};

struct Rung {
  double eps = 0.0, eta = 0.0;
  int newton_iters = 0;
  double residual_inf = 0.0;
  double sat_min = 0.0, sat_max = 0.0;
  ZetaNorms zeta;
  bool inserted = false;      // backoff rung added between ladder entries
  double step_distance = 0.0;  // inf-norm move from the previous rung's state
};

struct ContinuationTrace {
  std::vector<Rung> rungs;
};

struct ContinuationResult {
  SolveStatus status = SolveStatus::continuation_failed;
  State state;
  ContinuationTrace trace;
  double last_good_eps = -1.0, last_good_eta = -1.0;
  std::string detail;
};

// Mirrors the existence-proof order: the eps ladder is walked down to zero at
// the largest eta first, then the eta ladder at eps = 0. Failed rungs trigger
// up to five inserted intermediate rungs (geometric backoff).
ContinuationResult continuation_solve(const SchemeBackend& backend, const State& prev,
                                      const LadderSpec& ladder, double dt,
                                      const NewtonOptions& opts);

struct StepRecord {
  int step = 0;
  double time = 0.0;
  ContinuationResult result;
};

struct TimeLoopResult {
  SolveStatus status = SolveStatus::converged;
  std::vector<StepRecord> steps;
  int failed_step = -1;
};

TimeLoopResult time_loop(const SchemeBackend& backend, const State& initial, double t_final,
                         double dt, const LadderSpec& ladder, const NewtonOptions& opts);

// Positive root of dt*nu*eps*r^2 - sqrt(2)*C_gamma1*r - C_n = 0 (ball radius
// of the zeros-of-vector-fields argument). Diagnostic only.
double existence_radius(double c_n, double c_gamma1, double eps, double eta, double dt, double nu);

}  // namespace tpf
