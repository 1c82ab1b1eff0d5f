#include "tpflow/cvfe_scheme.hpp"

#include <algorithm>
#include <cmath>

namespace tpf {

CvfeBackend::CvfeBackend(CvfeMesh mesh, FluidModel fluid)
    : mesh_(std::move(mesh)), fluid_(std::move(fluid)) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& t : mesh_.triangles()) {
    edges.emplace_back(t.v[0], t.v[1]);
    edges.emplace_back(t.v[0], t.v[2]);
    edges.emplace_back(t.v[1], t.v[2]);
  }
  coloring_ = build_fd_coloring(mesh_.n_node(), edges);
}

State CvfeBackend::make_state(const VecX& x) const {
  const int n = n_unknown();
  VecX p_g = VecX::Zero(n_node()), p_w = VecX::Zero(n_node());
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.vertices()[i].unknown;
    if (u >= 0) {
      p_g[i] = x[u];
      p_w[i] = x[n + u];
    }
  }
  return state_from_pressures(p_g, p_w);
}

VecX CvfeBackend::pack(const State& s) const {
  const int n = n_unknown();
  VecX x(2 * n);
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.vertices()[i].unknown;
    if (u >= 0) {
      x[u] = s.p_g[i];
      x[n + u] = s.p_w[i];
    }
  }
  return x;
}

State CvfeBackend::state_from_pressures(const VecX& p_g, const VecX& p_w) const {
  State s;
  s.p_g = p_g;
  s.p_w = p_w;
  for (int i = 0; i < n_node(); ++i) {
    if (mesh_.vertices()[i].unknown < 0) {
      s.p_g[i] = 0.0;
      s.p_w[i] = 0.0;
    }
  }
  s.s_g.resize(n_node());
  for (int i = 0; i < n_node(); ++i) s.s_g[i] = fluid_.pc_inverse(s.p_g[i] - s.p_w[i]);
  return s;
}

VecX CvfeBackend::g_nodes(const State& s, Phase a) const {
  VecX g(n_node());
  for (int i = 0; i < n_node(); ++i) g[i] = fluid_.g_int(a, s.p(a, i));
  return g;
}

double CvfeBackend::upwind_saturation(Phase a, double coef, double dp, const State& s, int v_k,
                                      int v_l, const std::array<int, 3>& tri_vertices) const {
  if (coef >= 0.0) return dp >= 0.0 ? s.s(a, v_l) : s.s(a, v_k);
  ++min_branch_count_;
  return std::min({s.s(a, tri_vertices[0]), s.s(a, tri_vertices[1]), s.s(a, tri_vertices[2])});
}

void CvfeBackend::assemble(const State& s, const State& prev, double eps, double eta, double dt,
                           VecX& out) const {
  const int n = n_unknown();
  out = VecX::Zero(2 * n);
  const auto& verts = mesh_.vertices();

  for (int i = 0; i < n_node(); ++i) {
    const auto& v = verts[i];
    if (v.unknown < 0) continue;
    for (Phase a : kPhases) {
      double acc = v.measure * v.porosity *
                   (fluid_.density(a, s.p(a, i)) * FluidModel::clamp_z(s.s(a, i)) -
                    fluid_.density(a, prev.p(a, i)) * prev.s(a, i));
      out[parity(a) * n + v.unknown] += acc;
    }
  }

  VecX g_gas = g_nodes(s, Phase::gas);
  VecX g_wet = g_nodes(s, Phase::wetting);
  for (const auto& t : mesh_.triangles()) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        int vi = t.v[i], vj = t.v[j];
        double coef = t.coef[pair_index(i, j)];
        double dpc = (s.p_g[vj] - s.p_w[vj]) - (s.p_g[vi] - s.p_w[vi]);
        for (Phase a : kPhases) {
          int ia = parity(a);
          double dp = s.p(a, vj) - s.p(a, vi);
          double s_up = upwind_saturation(a, coef, dp, s, vi, vj, t.v);
          const VecX& g = a == Phase::gas ? g_gas : g_wet;
          double rho = fluid_.interface_density_from_g(a, s.p(a, vi), s.p(a, vj), g[vi], g[vj]);
          double flux = dt * rho * fluid_.mobility_eps(a, s_up, eps) * coef * dp;
          if (eta != 0.0 && coef >= 0.0) {
            flux += dt * eta * parity_sign(a) * rho * coef * dpc;
          }
          int ui = verts[vi].unknown, uj = verts[vj].unknown;
          if (ui >= 0) out[ia * n + ui] -= flux;
          if (uj >= 0) out[ia * n + uj] += flux;
        }
      }
    }
  }
}

void CvfeBackend::residual(const State& s, const State& prev, const SchemeParams& par,
                           VecX& out) const {
  assemble(s, prev, par.eps, par.eta, par.dt, out);
}

void CvfeBackend::residual_base(const State& s, const State& prev, double dt, VecX& out) const {
  assemble(s, prev, 0.0, 0.0, dt, out);
}

SpMat CvfeBackend::jacobian(const State& s, const State& prev, const SchemeParams& par) const {
  return fd_jacobian(*this, coloring_, s, prev, par);
}

std::pair<double, double> CvfeBackend::saturation_range(const State& s) const {
  double lo = s.s_g.minCoeff(), hi = s.s_g.maxCoeff();
  return {std::min(lo, 1.0 - hi), std::max(hi, 1.0 - lo)};
}

ZetaNorms CvfeBackend::zeta_norms(const State& s) const {
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

EnergyTerms CvfeBackend::energy_terms(const State& s, const State& prev,
                                      const SchemeParams& par) const {
  EnergyTerms e;
  const auto& verts = mesh_.vertices();
  VecX g_gas = g_nodes(s, Phase::gas);
  VecX g_wet = g_nodes(s, Phase::wetting);

  for (int i = 0; i < n_node(); ++i) {
    const auto& v = verts[i];
    if (v.unknown < 0) continue;
    for (Phase a : kPhases) {
      double acc = v.measure * v.porosity *
                   (fluid_.density(a, s.p(a, i)) * FluidModel::clamp_z(s.s(a, i)) -
                    fluid_.density(a, prev.p(a, i)) * prev.s(a, i));
      e.gamma1 += acc * (a == Phase::gas ? g_gas[i] : g_wet[i]);
    }
  }
  for (const auto& t : mesh_.triangles()) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        int vi = t.v[i], vj = t.v[j];
        double coef = t.coef[pair_index(i, j)];
        double dpc = (s.p_g[vj] - s.p_w[vj]) - (s.p_g[vi] - s.p_w[vi]);
        for (Phase a : kPhases) {
          double dp = s.p(a, vj) - s.p(a, vi);
          double s_up = upwind_saturation(a, coef, dp, s, vi, vj, t.v);
          const VecX& g = a == Phase::gas ? g_gas : g_wet;
          double rho = fluid_.interface_density_from_g(a, s.p(a, vi), s.p(a, vj), g[vi], g[vj]);
          double dg = g[vj] - g[vi];
          e.gamma2 += par.dt * rho * fluid_.mobility_eps(a, s_up, par.eps) * coef * dp * dg;
          if (coef >= 0.0)
            e.gamma3 += par.dt * par.eta * parity_sign(a) * rho * coef * dpc * dg;
        }
      }
    }
  }
  VecX r;
  residual(s, prev, par, r);
  e.pairing = r.dot(g_vector(s));
  return e;
}

double CvfeBackend::eta_quadratic(const State& s) const {
  double q = 0.0;
  for (const auto& t : mesh_.triangles()) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        double coef = t.coef[pair_index(i, j)];
        if (coef < 0.0) continue;
        int vi = t.v[i], vj = t.v[j];
        double dpc = (s.p_g[vj] - s.p_w[vj]) - (s.p_g[vi] - s.p_w[vi]);
        q += coef * dpc * dpc;
      }
    }
  }
  return q;
}

double CvfeBackend::gamma2_explicit(const State& s, double eps) const {
  double sum = 0.0;
  for (const auto& t : mesh_.triangles()) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        int vi = t.v[i], vj = t.v[j];
        double coef = t.coef[pair_index(i, j)];
        for (Phase a : kPhases) {
          double dp = s.p(a, vj) - s.p(a, vi);
          double s_up = upwind_saturation(a, coef, dp, s, vi, vj, t.v);
          sum += fluid_.mobility_eps(a, s_up, eps) * coef * dp * dp;
        }
      }
    }
  }
  return sum;
}

VecX CvfeBackend::g_vector(const State& s) const {
  const int n = n_unknown();
  VecX g(2 * n);
  for (int i = 0; i < n_node(); ++i) {
    int u = mesh_.vertices()[i].unknown;
    if (u < 0) continue;
    g[u] = fluid_.g_int(Phase::gas, s.p_g[i]);
    g[n + u] = fluid_.g_int(Phase::wetting, s.p_w[i]);
  }
  return g;
}

VecX CvfeBackend::row_weights() const {
  const int n = n_unknown();
  VecX w(2 * n);
  for (const auto& v : mesh_.vertices()) {
    if (v.unknown < 0) continue;
    double wi = std::min(1.0, v.measure * v.porosity);
    w[v.unknown] = wi;
    w[n + v.unknown] = wi;
  }
  return w;
}

double CvfeBackend::norm_constant() const {
  if (norm_constant_ < 0.0) norm_constant_ = mesh_.norm_constant();
  return norm_constant_;
}

double CvfeBackend::energy_c_n(const State& prev) const {
  double sum = 0.0;
  for (Phase a : kPhases) {
    VecX h(n_node());
    for (int i = 0; i < n_node(); ++i) h[i] = fluid_.big_h(a, prev.p(a, i));
    sum += mesh_.l1_norm(h.cwiseAbs());
  }
  return phi_max() * sum;
}

}  // namespace tpf
