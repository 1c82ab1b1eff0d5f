#pragma once

#include <memory>
#include <vector>

#include "tpflow/common.hpp"
#include "tpflow/fluid.hpp"

namespace tpf {

// One time level: gas and wetting pressures per node (Dirichlet entries are
// zero) with the saturation derived through the coupling at construction, so
// no stale-saturation path exists.
struct State {
  VecX p_g, p_w, s_g;

  double s(Phase a, int node) const { return a == Phase::gas ? s_g[node] : 1.0 - s_g[node]; }
  double p(Phase a, int node) const { return a == Phase::gas ? p_g[node] : p_w[node]; }
};

// Dynamic scheme knobs; the porosity field and fluid model live with the
// backend's mesh.
struct SchemeParams {
  double eps = 0.0;
  double eta = 0.0;
  double dt = 1.0;
};

struct ZetaNorms {
  double p = 0.0;   // global pressure, backend gradient norm
  double xi = 0.0;  // capillary energy function
  double pc = 0.0;  // ||p_g - p_w||
  double pg = 0.0, pw = 0.0;
};

struct EnergyTerms {
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double pairing = 0.0;  // <F, g(p)> computed independently
};

// Abstract contract between the nonlinear solver / verification harness and a
// concrete discretization. Residual and Jacobian act on the stacked unknown
// vector x = [p_g; p_w] restricted to non-Dirichlet dofs.
class SchemeBackend {
 public:
  virtual ~SchemeBackend() = default;

  virtual const FluidModel& fluid() const = 0;
  virtual int n_node() const = 0;
  virtual int n_unknown() const = 0;  // per phase
  int n_dof() const { return 2 * n_unknown(); }

  virtual State make_state(const VecX& x) const = 0;
  virtual VecX pack(const State& s) const = 0;
  // builds a state from node-wise pressures (Dirichlet entries forced to 0)
  virtual State state_from_pressures(const VecX& p_g, const VecX& p_w) const = 0;
  virtual Vec2 node_position(int node) const = 0;
  virtual int node_unknown(int node) const = 0;  // -1 on Dirichlet nodes

  virtual void residual(const State& s, const State& prev, const SchemeParams& par,
                        VecX& out) const = 0;
  // the unregularized scheme; bit-identical to residual(...) at eps = eta = 0
  virtual void residual_base(const State& s, const State& prev, double dt, VecX& out) const = 0;
  virtual SpMat jacobian(const State& s, const State& prev, const SchemeParams& par) const = 0;

  virtual std::pair<double, double> saturation_range(const State& s) const = 0;
  virtual ZetaNorms zeta_norms(const State& s) const = 0;
  virtual EnergyTerms energy_terms(const State& s, const State& prev,
                                   const SchemeParams& par) const = 0;
  // capillary quadratic form of the eta-regularization (gamma3 = eta dt Q_c)
  virtual double eta_quadratic(const State& s) const = 0;
  // explicit mobility-weighted convective form (gamma2 identity when no cross
  // terms contribute)
  virtual double gamma2_explicit(const State& s, double eps) const = 0;
  // scheme pressure quadratic used in the eps coercivity bound
  virtual double pressure_quadratic(const VecX& node_field) const = 0;
  // true when gamma2_explicit is an identity: orthogonal DDFV meshes /
  // all-nonnegative CVFE coefficient meshes
  virtual bool cross_free() const = 0;

  virtual VecX g_vector(const State& s) const = 0;  // g_alpha(p_alpha) per row
  virtual VecX row_weights() const = 0;             // scaled-norm weights, <= 1
  virtual double grad_norm(const VecX& node_field) const = 0;  // backend energy norm
  virtual double l1_norm(const VecX& node_field) const = 0;
  virtual double norm_constant() const = 0;  // empirical |u|_1 <= C ||u|| constant
  virtual double phi_max() const = 0;
  virtual double energy_c_gamma1() const = 0;  // scheme-specific C_{gamma1}
  virtual double energy_c_n(const State& prev) const = 0;

  virtual long upwind_min_branch_count() const { return 0; }  // CVFE coverage counter
  virtual std::string name() const = 0;
};

// Column grouping for finite-difference Jacobians: nodes that share a stencil
// element are mutually conflicting, so groups are a distance-2 coloring of
// the adjacency graph. Shared by both backends.
struct FdColoring {
  std::vector<int> color_of_node;
  int n_colors = 0;
  std::vector<std::vector<int>> node_neighbors;  // closed neighborhoods
};

FdColoring build_fd_coloring(int n_node, const std::vector<std::pair<int, int>>& edges);

// Graph-colored forward differences with step 1e-7 * max(1, |x_j|); entries
// restricted to the stencil pattern.
SpMat fd_jacobian(const SchemeBackend& backend, const FdColoring& coloring, const State& state,
                  const State& prev, const SchemeParams& par);

}  // namespace tpf
