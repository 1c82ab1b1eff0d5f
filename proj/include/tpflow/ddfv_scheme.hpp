#pragma once

#include "tpflow/backend.hpp"
#include "tpflow/ddfv_mesh.hpp"

namespace tpf {

// Regularized PP-DDFV residual F^{eps,eta} and finite-difference Jacobian.
// Rows follow the stacked layout [gas unknowns; wetting unknowns]; fluxes are
// scattered per diamond so the discrete conservativity holds by construction,
// including the degenerate Neumann boundary rows.
class DdfvBackend : public SchemeBackend {
 public:
  DdfvBackend(DdfvMesh mesh, FluidModel fluid);

  const DdfvMesh& mesh() const { return mesh_; }
  const FluidModel& fluid() const override { return fluid_; }
  int n_node() const override { return mesh_.n_node(); }
  int n_unknown() const override { return mesh_.n_unknown(); }

  State make_state(const VecX& x) const override;
  VecX pack(const State& s) const override;
  State state_from_pressures(const VecX& p_g, const VecX& p_w) const override;
  Vec2 node_position(int node) const override { return mesh_.nodes()[node].center; }
  int node_unknown(int node) const override { return mesh_.nodes()[node].unknown; }

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
    return mesh_.tau_quadratic(node_field);
  }
  bool cross_free() const override { return cross_free_; }

  VecX g_vector(const State& s) const override;
  VecX row_weights() const override;
  double grad_norm(const VecX& node_field) const override {
    return std::sqrt(mesh_.tau_quadratic(node_field));
  }
  double l1_norm(const VecX& node_field) const override { return mesh_.l1_norm(node_field); }
  double norm_constant() const override;
  double phi_max() const override { return mesh_.medium().phi_max(); }
  double energy_c_gamma1() const override { return 2.0 * phi_max() * norm_constant(); }
  double energy_c_n(const State& prev) const override;

  std::string name() const override { return "ddfv"; }

  // Per-diamond projected velocities, capillary flows and interface densities
  // for both phases (indexed by parity).
  struct DiamondFluxes {
    double v_kl[2] = {0, 0}, v_ksls[2] = {0, 0};
    double pc_kl = 0, pc_ksls = 0;
    double rho_kl[2] = {0, 0}, rho_ksls[2] = {0, 0};
  };
  DiamondFluxes diamond_fluxes(const Diamond& d, const State& s, double eps, const VecX& g_gas,
                               const VecX& g_wet) const;

  // g_alpha(p_alpha) at every node (wetting phase when `wet`)
  VecX g_nodes(const State& s, Phase a) const;

 private:
  void assemble(const State& s, const State& prev, double eps, double eta, double dt,
                VecX& out) const;

  DdfvMesh mesh_;
  FluidModel fluid_;
  FdColoring coloring_;
  bool cross_free_ = true;
  mutable double norm_constant_ = -1.0;
};

// (eps, dp) -> upwind/minimum mobility pair of the interface AB
std::pair<double, double> upwind_mobility(const FluidModel& fluid, Phase a, double dp, double s_a,
                                          double s_b, double eps);

}  // namespace tpf
