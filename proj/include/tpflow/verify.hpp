#pragma once

#include <string>
#include <vector>

#include "tpflow/backend.hpp"
#include "tpflow/solver.hpp"

namespace tpf {

// (gamma1, gamma2, gamma3) decomposition of <F, g(p)> plus the diagnostic
// constants of the energy chain for one state.
struct EnergyReport {
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double direct_pairing = 0.0;
  double zeta_p = 0.0, zeta_xi = 0.0;
  double pc_norm = 0.0;
  double c_n = 0.0, c_gamma1 = 0.0;
  double sat_min = 0.0, sat_max = 0.0;

  double sum() const { return gamma1 + gamma2 + gamma3; }
  bool sum_identity_holds(double tol = 1e-9) const {
    return std::abs(sum() - direct_pairing) <= tol * (1.0 + std::abs(direct_pairing));
  }
};

EnergyReport energy_decomposition(const SchemeBackend& backend, const State& state,
                                  const State& prev, const SchemeParams& par);

struct MaxPrincipleReport {
  double sat_min = 0.0, sat_max = 0.0;
  bool pass = false;
  int worst_node = -1;
};

MaxPrincipleReport check_max_principle(const SchemeBackend& backend, const State& state);

struct Lem1Report {
  bool pass = false;
  int violations = 0;
  double worst_margin = 0.0;  // min of rhs - lhs over the sample
  double worst_ratio = 0.0;   // max of lhs / rhs over samples with rhs > 0
};

// Samples random (p_g, p_w) pairs at two points and checks
// m0 ((dp)^2 + (dxi)^2) <= M_g^up (dp_g)^2 + M_w^up (dp_w)^2.
Lem1Report check_lem1(const FluidModel& fluid, int sample_count, uint64_t seed,
                      double pressure_range);

struct CorrectiveBoundsReport {
  bool pass = false;
  double worst_margin = 0.0;  // min over samples of |pc(s)| - |p_hat(s)|
};

// |p_hat_alpha(s)| <= |pc(s)| + 1e-12 for s sampled in [-0.5, 1.5].
CorrectiveBoundsReport check_corrective_bounds(const FluidModel& fluid, int sample_count,
                                               uint64_t seed);

struct MonitorReport {
  double pd_max = 0.0;  // max over eps-ladder rungs of the regularized energy LHS
  double pe_max = 0.0;  // max over eta-ladder (eps = 0) rungs of sum ||zeta||^2
  bool finite = false;
};

MonitorReport continuation_monitors(const ContinuationTrace& trace);

}  // namespace tpf
