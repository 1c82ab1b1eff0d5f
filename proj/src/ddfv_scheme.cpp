#include "tpflow/ddfv_scheme.hpp"

#include <algorithm>
#include <cmath>

namespace tpf {

std::pair<double, double> upwind_mobility(const FluidModel& fluid, Phase a, double dp, double s_a,
                                          double s_b, double eps) {
  double up = fluid.mobility_eps(a, dp >= 0.0 ? s_b : s_a, eps);
  double mn = std::min(fluid.mobility_eps(a, s_a, eps), fluid.mobility_eps(a, s_b, eps));
  return {up, mn};
}

DdfvBackend::DdfvBackend(DdfvMesh mesh, FluidModel fluid)
    : mesh_(std::move(mesh)), fluid_(std::move(fluid)) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& d : mesh_.diamonds()) {
    int ids[4] = {d.a, d.b, d.vs, d.ws};
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) edges.emplace_back(ids[i], ids[j]);
    if (std::abs(d.eta_d) > 1e-14) cross_free_ = false;
  }
  coloring_ = build_fd_coloring(mesh_.n_node(), edges);
}

State DdfvBackend::make_state(const VecX& x) const {
  const int n = n_unknown();
  VecX p_g = VecX::Zero(n_node()), p_w = VecX::Zero(n_node());
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.nodes()[i].unknown;
    if (u >= 0) {
      p_g[i] = x[u];
      p_w[i] = x[n + u];
    }
  }
  return state_from_pressures(p_g, p_w);
}

VecX DdfvBackend::pack(const State& s) const {
  const int n = n_unknown();
  VecX x(2 * n);
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.nodes()[i].unknown;
    if (u >= 0) {
      x[u] = s.p_g[i];
      x[n + u] = s.p_w[i];
    }
  }
  return x;
}

State DdfvBackend::state_from_pressures(const VecX& p_g, const VecX& p_w) const {
  State s;
  s.p_g = p_g;
  s.p_w = p_w;
  for (int i = 0; i < n_node(); ++i) {
    if (mesh_.nodes()[i].unknown < 0) {
      s.p_g[i] = 0.0;
      s.p_w[i] = 0.0;
    }
  }
  s.s_g.resize(n_node());
  for (int i = 0; i < n_node(); ++i) s.s_g[i] = fluid_.pc_inverse(s.p_g[i] - s.p_w[i]);
  return s;
}

VecX DdfvBackend::g_nodes(const State& s, Phase a) const {
  VecX g(n_node());
  for (int i = 0; i < n_node(); ++i) g[i] = fluid_.g_int(a, s.p(a, i));
  return g;
}

DdfvBackend::DiamondFluxes DdfvBackend::diamond_fluxes(const Diamond& d, const State& s,
                                                       double eps, const VecX& g_gas,
                                                       const VecX& g_wet) const {
  DiamondFluxes f;
  double dpg_kl = s.p_g[d.b] - s.p_g[d.a];
  double dpw_kl = s.p_w[d.b] - s.p_w[d.a];
  double dpg_st = s.p_g[d.ws] - s.p_g[d.vs];
  double dpw_st = s.p_w[d.ws] - s.p_w[d.vs];
  f.pc_kl = d.tau_kl * (dpg_kl - dpw_kl);
  f.pc_ksls = d.tau_ksls * (dpg_st - dpw_st);
  for (Phase a : kPhases) {
    int ia = parity(a);
    double dp_kl = a == Phase::gas ? dpg_kl : dpw_kl;
    double dp_st = a == Phase::gas ? dpg_st : dpw_st;
    auto [up_kl, mn_kl] = upwind_mobility(fluid_, a, dp_kl, s.s(a, d.a), s.s(a, d.b), eps);
    auto [up_st, mn_st] = upwind_mobility(fluid_, a, dp_st, s.s(a, d.vs), s.s(a, d.ws), eps);
    f.v_kl[ia] = up_kl * d.tau_kl * dp_kl + std::sqrt(mn_kl) * std::sqrt(up_st) * d.eta_d * dp_st;
    f.v_ksls[ia] =
        up_st * d.tau_ksls * dp_st + std::sqrt(mn_st) * std::sqrt(up_kl) * d.eta_d * dp_kl;
    const VecX& g = a == Phase::gas ? g_gas : g_wet;
    f.rho_kl[ia] = fluid_.interface_density_from_g(a, s.p(a, d.a), s.p(a, d.b), g[d.a], g[d.b]);
    f.rho_ksls[ia] =
        fluid_.interface_density_from_g(a, s.p(a, d.vs), s.p(a, d.ws), g[d.vs], g[d.ws]);
  }
  return f;
}

void DdfvBackend::assemble(const State& s, const State& prev, double eps, double eta, double dt,
                           VecX& out) const {
  const int n = n_unknown();
  out = VecX::Zero(2 * n);
  const auto& nodes = mesh_.nodes();

  // accumulation m_A phi_A (rho Z(s) - rho^n s^n); zero-measure boundary cells
  // carry only flux terms
  for (int i = 0; i < n_node(); ++i) {
    const auto& nd = nodes[i];
    if (nd.unknown < 0 || nd.measure <= 0.0) continue;
    for (Phase a : kPhases) {
      double acc = nd.measure * nd.porosity *
                   (fluid_.density(a, s.p(a, i)) * FluidModel::clamp_z(s.s(a, i)) -
                    fluid_.density(a, prev.p(a, i)) * prev.s(a, i));
      out[parity(a) * n + nd.unknown] += acc;
    }
  }

  VecX g_gas = g_nodes(s, Phase::gas);
  VecX g_wet = g_nodes(s, Phase::wetting);
  for (const auto& d : mesh_.diamonds()) {
    DiamondFluxes f = diamond_fluxes(d, s, eps, g_gas, g_wet);
    for (Phase a : kPhases) {
      int ia = parity(a);
      double conv_kl = dt * f.rho_kl[ia] * f.v_kl[ia];
      double conv_st = dt * f.rho_ksls[ia] * f.v_ksls[ia];
      if (eta != 0.0) {
        conv_kl += dt * eta * parity_sign(a) * f.rho_kl[ia] * f.pc_kl;
        conv_st += dt * eta * parity_sign(a) * f.rho_ksls[ia] * f.pc_ksls;
      }
      int ua = nodes[d.a].unknown, ub = nodes[d.b].unknown;
      int uv = nodes[d.vs].unknown, uw = nodes[d.ws].unknown;
      if (ua >= 0) out[ia * n + ua] -= conv_kl;
      if (ub >= 0) out[ia * n + ub] += conv_kl;
      if (uv >= 0) out[ia * n + uv] -= conv_st;
      if (uw >= 0) out[ia * n + uw] += conv_st;
    }
  }
}

void DdfvBackend::residual(const State& s, const State& prev, const SchemeParams& par,
                           VecX& out) const {
  assemble(s, prev, par.eps, par.eta, par.dt, out);
}

void DdfvBackend::residual_base(const State& s, const State& prev, double dt, VecX& out) const {
  assemble(s, prev, 0.0, 0.0, dt, out);
}

SpMat DdfvBackend::jacobian(const State& s, const State& prev, const SchemeParams& par) const {
  return fd_jacobian(*this, coloring_, s, prev, par);
}

std::pair<double, double> DdfvBackend::saturation_range(const State& s) const {
  double lo = s.s_g.minCoeff(), hi = s.s_g.maxCoeff();
  return {std::min(lo, 1.0 - hi), std::max(hi, 1.0 - lo)};
}

ZetaNorms DdfvBackend::zeta_norms(const State& s) const {
  ZetaNorms z;
  VecX p_field(n_node()), xi_field(n_node());
  for (int i = 0; i < n_node(); ++i) {
    p_field[i] = fluid_.global_pressure(s.p_g[i], s.s_g[i]);
    xi_field[i] = fluid_.xi(s.s_g[i]);
  }
  z.p = grad_norm(p_field);
  z.xi = grad_norm(xi_field);
  z.pc = grad_norm(s.p_g - s.p_w);
  z.pg = grad_norm(s.p_g);
  z.pw = grad_norm(s.p_w);
  return z;
}

EnergyTerms DdfvBackend::energy_terms(const State& s, const State& prev,
                                      const SchemeParams& par) const {
  EnergyTerms e;
  const auto& nodes = mesh_.nodes();
  VecX g_gas = g_nodes(s, Phase::gas);
  VecX g_wet = g_nodes(s, Phase::wetting);

  for (int i = 0; i < n_node(); ++i) {
    const auto& nd = nodes[i];
    if (nd.unknown < 0 || nd.measure <= 0.0) continue;
    for (Phase a : kPhases) {
      double acc = nd.measure * nd.porosity *
                   (fluid_.density(a, s.p(a, i)) * FluidModel::clamp_z(s.s(a, i)) -
                    fluid_.density(a, prev.p(a, i)) * prev.s(a, i));
      e.gamma1 += acc * (a == Phase::gas ? g_gas[i] : g_wet[i]);
    }
  }
  for (const auto& d : mesh_.diamonds()) {
    DiamondFluxes f = diamond_fluxes(d, s, par.eps, g_gas, g_wet);
    for (Phase a : kPhases) {
      int ia = parity(a);
      const VecX& g = a == Phase::gas ? g_gas : g_wet;
      double dg_kl = g[d.b] - g[d.a];
      double dg_st = g[d.ws] - g[d.vs];
      e.gamma2 += par.dt * (f.rho_kl[ia] * f.v_kl[ia] * dg_kl + f.rho_ksls[ia] * f.v_ksls[ia] * dg_st);
      e.gamma3 += par.dt * par.eta * parity_sign(a) *
                  (f.rho_kl[ia] * f.pc_kl * dg_kl + f.rho_ksls[ia] * f.pc_ksls * dg_st);
    }
  }
  VecX r;
  residual(s, prev, par, r);
  e.pairing = r.dot(g_vector(s));
  return e;
}

double DdfvBackend::eta_quadratic(const State& s) const {
  return mesh_.tau_quadratic(s.p_g - s.p_w);
}

double DdfvBackend::gamma2_explicit(const State& s, double eps) const {
  double sum = 0.0;
  for (const auto& d : mesh_.diamonds()) {
    for (Phase a : kPhases) {
      double dp_kl = s.p(a, d.b) - s.p(a, d.a);
      double dp_st = s.p(a, d.ws) - s.p(a, d.vs);
      auto [up_kl, mn_kl] = upwind_mobility(fluid_, a, dp_kl, s.s(a, d.a), s.s(a, d.b), eps);
      auto [up_st, mn_st] = upwind_mobility(fluid_, a, dp_st, s.s(a, d.vs), s.s(a, d.ws), eps);
      (void)mn_kl;
      (void)mn_st;
      sum += up_kl * d.tau_kl * dp_kl * dp_kl + up_st * d.tau_ksls * dp_st * dp_st;
    }
  }
  return sum;
}

VecX DdfvBackend::g_vector(const State& s) const {
  const int n = n_unknown();
  VecX g(2 * n);
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.nodes()[i].unknown;
    if (u < 0) continue;
    g[u] = fluid_.g_int(Phase::gas, s.p_g[i]);
    g[n + u] = fluid_.g_int(Phase::wetting, s.p_w[i]);
  }
  return g;
}

VecX DdfvBackend::row_weights() const {
  const int n = n_unknown();
  VecX w(2 * n);
  for (int i = 0; i < n_node(); ++i) {
    const auto& nd = mesh_.nodes()[i];
    if (nd.unknown < 0) continue;
    double wi = nd.measure > 0.0 ? std::min(1.0, nd.measure * nd.porosity) : 1.0;
    w[nd.unknown] = wi;
    w[n + nd.unknown] = wi;
  }
  return w;
}

double DdfvBackend::norm_constant() const {
  if (norm_constant_ < 0.0) norm_constant_ = mesh_.norm_constant();
  return norm_constant_;
}

double DdfvBackend::energy_c_n(const State& prev) const {
  double sum = 0.0;
  for (Phase a : kPhases) {
    VecX h(n_node());
    for (int i = 0; i < n_node(); ++i) h[i] = fluid_.big_h(a, prev.p(a, i));
    sum += mesh_.l1_norm(h.cwiseAbs());
  }
  return 2.0 * phi_max() * sum;
}

}  // namespace tpf
