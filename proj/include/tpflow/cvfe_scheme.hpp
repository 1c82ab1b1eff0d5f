#pragma once

#include "tpflow/backend.hpp"
#include "tpflow/cvfe_mesh.hpp"

namespace tpf {

// Regularized CVFE residual: vertex-centered control volumes over a P1
// triangulation, stiffness-sign-dependent upwinding, and the eta-capillary
// flow restricted to nonnegative-coefficient edges.
class CvfeBackend : public SchemeBackend {
 public:
  CvfeBackend(CvfeMesh mesh, FluidModel fluid);

  const CvfeMesh& mesh() const { return mesh_; }
  const FluidModel& fluid() const override { return fluid_; }
  int n_node() const override { return mesh_.n_node(); }
  int n_unknown() const override { return mesh_.n_unknown(); }

  State make_state(const VecX& x) const override;
  VecX pack(const State& s) const override;
  State state_from_pressures(const VecX& p_g, const VecX& p_w) const override;
  Vec2 node_position(int node) const override { return mesh_.vertices()[node].pos; }
  int node_unknown(int node) const override { return mesh_.vertices()[node].unknown; }

  void residual(const State& s, const State& prev, const SchemeParams& par,
                VecX& out) const override;
  void residual_base(const State& s, const State& prev, double dt, VecX& out) const override;
  SpMat jacobian(const State& s, const State& prev, const SchemeParams& par) const override;

  std::pair<double, double> saturation_range(const State& s) const override;
  ZetaNorms zeta_norms(const State& s) const override;
  EnergyTerms energy_terms(const State& s, const State& prev,
                           const SchemeParams& par) const override;
  double eta_quadratic(const State& s) const override;
  double gamma2_explicit(const State& s, double eps) const override;
  double pressure_quadratic(const VecX& node_field) const override {
    return mesh_.lambda_quadratic(node_field);
  }
  bool cross_free() const override { return mesh_.all_coefs_nonnegative(); }

  VecX g_vector(const State& s) const override;
  VecX row_weights() const override;
  double grad_norm(const VecX& node_field) const override {
    return std::sqrt(mesh_.vt_quadratic(node_field));
  }
  double l1_norm(const VecX& node_field) const override { return mesh_.l1_norm(node_field); }
  double norm_constant() const override;
  double phi_max() const override { return mesh_.medium().phi_max(); }
  double energy_c_gamma1() const override { return phi_max() * norm_constant(); }
  double energy_c_n(const State& prev) const override;

  long upwind_min_branch_count() const override { return min_branch_count_; }
  std::string name() const override { return "cvfe"; }

  // upwind interface saturation of one in-triangle edge (K, L)
  double upwind_saturation(Phase a, double coef, double dp, const State& s, int v_k, int v_l,
                           const std::array<int, 3>& tri_vertices) const;

 private:
  void assemble(const State& s, const State& prev, double eps, double eta, double dt,
                VecX& out) const;
  VecX g_nodes(const State& s, Phase a) const;

  CvfeMesh mesh_;
  FluidModel fluid_;
  FdColoring coloring_;
  mutable long min_branch_count_ = 0;
  mutable double norm_constant_ = -1.0;
};

}  // namespace tpf
