#include "tpflow/verify.hpp"

#include <algorithm>
#include <cmath>

namespace tpf {

EnergyReport energy_decomposition(const SchemeBackend& backend, const State& state,
                                  const State& prev, const SchemeParams& par) {
  EnergyReport rep;
  EnergyTerms terms = backend.energy_terms(state, prev, par);
  rep.gamma1 = terms.gamma1;
  rep.gamma2 = terms.gamma2;
  rep.gamma3 = terms.gamma3;
  rep.direct_pairing = terms.pairing;
  ZetaNorms z = backend.zeta_norms(state);
  rep.zeta_p = z.p;
  rep.zeta_xi = z.xi;
  rep.pc_norm = z.pc;
  rep.c_n = backend.energy_c_n(prev);
  rep.c_gamma1 = backend.energy_c_gamma1();
  auto [lo, hi] = backend.saturation_range(state);
  rep.sat_min = lo;
  rep.sat_max = hi;
  return rep;
}

MaxPrincipleReport check_max_principle(const SchemeBackend& backend, const State& state) {
  MaxPrincipleReport rep;
  auto [lo, hi] = backend.saturation_range(state);
  rep.sat_min = lo;
  rep.sat_max = hi;
  rep.pass = lo >= -1e-12 && hi <= 1.0 + 1e-12;
  if (!rep.pass) {
    double worst = 0.0;
    for (int i = 0; i < state.s_g.size(); ++i) {
      double v = std::max({-state.s_g[i], state.s_g[i] - 1.0, 0.0});
      if (v > worst) {
        worst = v;
        rep.worst_node = i;
      }
    }
  }
  return rep;
}

Lem1Report check_lem1(const FluidModel& fluid, int sample_count, uint64_t seed,
                      double pressure_range) {
  if (sample_count < 1) throw InvalidParams("check_lem1 needs at least one sample");
  Lem1Report rep;
  Rng rng(seed);
  const double m0 = fluid.total_mobility_floor();
  rep.worst_margin = std::numeric_limits<double>::max();
  for (int k = 0; k < sample_count; ++k) {
    double pg_a = rng.uniform(-pressure_range, pressure_range);
    double pw_a = rng.uniform(-pressure_range, pressure_range);
    double pg_b = rng.uniform(-pressure_range, pressure_range);
    double pw_b = rng.uniform(-pressure_range, pressure_range);
    double s_a = fluid.pc_inverse(pg_a - pw_a);
    double s_b = fluid.pc_inverse(pg_b - pw_b);

    double p_a = fluid.global_pressure(pg_a, s_a);
    double p_b = fluid.global_pressure(pg_b, s_b);
    double xi_a = fluid.xi(s_a);
    double xi_b = fluid.xi(s_b);
    double dp = p_b - p_a, dxi = xi_b - xi_a;
    double dpg = pg_b - pg_a, dpw = pw_b - pw_a;

    // unregularized upwind mobilities by the sign of the pressure jump
    double mg = fluid.mobility(Phase::gas, dpg >= 0.0 ? s_b : s_a);
    double mw = fluid.mobility(Phase::wetting, dpw >= 0.0 ? 1.0 - s_b : 1.0 - s_a);

    double lhs = m0 * (dp * dp + dxi * dxi);
    double rhs = mg * dpg * dpg + mw * dpw * dpw;
    double margin = rhs - lhs;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
    if (margin < -1e-12 * std::max(1.0, rhs)) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

CorrectiveBoundsReport check_corrective_bounds(const FluidModel& fluid, int sample_count,
                                               uint64_t seed) {
  CorrectiveBoundsReport rep;
  Rng rng(seed);
  rep.worst_margin = std::numeric_limits<double>::max();
  rep.pass = true;
  for (int k = 0; k < sample_count; ++k) {
    double s = rng.uniform(-0.5, 1.5);
    double bound = std::abs(fluid.pc(s));
    for (Phase a : kPhases) {
      double margin = bound - std::abs(fluid.corrective(a, s));
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (margin < -1e-12) rep.pass = false;
    }
  }
  return rep;
}

MonitorReport continuation_monitors(const ContinuationTrace& trace) {
  if (trace.rungs.empty()) throw InvalidParams("continuation trace is empty");
  MonitorReport rep;
  rep.finite = true;
  for (const auto& r : trace.rungs) {
    const ZetaNorms& z = r.zeta;
    double zeta2 = z.p * z.p + z.xi * z.xi;
    double lhs = zeta2 + r.eps * (z.pg * z.pg + z.pw * z.pw) + r.eta * z.pc * z.pc;
    if (!std::isfinite(lhs)) rep.finite = false;
    if (r.eps > 0.0 || (r.eps == 0.0 && r.eta == trace.rungs.front().eta)) {
      rep.pd_max = std::max(rep.pd_max, lhs);
    }
    if (r.eps == 0.0) rep.pe_max = std::max(rep.pe_max, zeta2);
  }
  return rep;
}

}  // namespace tpf
