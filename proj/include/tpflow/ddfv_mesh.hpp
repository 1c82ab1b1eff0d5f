#pragma once

#include <string>
#include <vector>

#include "tpflow/common.hpp"
#include "tpflow/medium.hpp"
#include "tpflow/mesh_io.hpp"

namespace tpf {

enum class CellKind { primal, boundary_edge, dual };

// One scalar per cell in node order (interior primal cells, then boundary
// edge cells, then dual cells); entries on Dirichlet cells are held at zero.
using DiscreteField = VecX;

// One degree-of-freedom carrier: an interior primal cell, a degenerate
// boundary-edge cell, or a dual (vertex-centered) cell.
struct DdfvNode {
  CellKind kind = CellKind::primal;
  Vec2 center = Vec2::Zero();
  double measure = 0.0;
  double porosity = 1.0;
  bool dirichlet = false;
  bool neumann_edge = false;  // boundary-edge cells only
  int unknown = -1;           // contiguous dof index, -1 on Dirichlet cells
};

// Diamond over one primal edge sigma = (v, w) between primal-side nodes a, b
// (a is the degenerate cell for boundary diamonds). Orientation satisfies
// cross(t_sigma_star, t_sigma) = sin_alpha > 0 with n_sigma_k pointing a -> b
// and n_sigma_star_kstar pointing vs -> ws.
struct Diamond {
  int a = -1, b = -1;    // primal pair (node ids)
  int vs = -1, ws = -1;  // dual pair (node ids)
  double m_sigma = 0.0, m_sigma_star = 0.0;
  double sin_alpha = 0.0, cos_alpha = 0.0;
  double m_d = 0.0;
  Vec2 n_sigma_k = Vec2::Zero();
  Vec2 n_sigma_star_kstar = Vec2::Zero();
  Mat2 lambda = Mat2::Identity();
  double tau_kl = 0.0, tau_ksls = 0.0, eta_d = 0.0;
  bool boundary = false;
  double area_a = 0.0, area_b = 0.0;  // triangle split of the diamond by sigma
};

struct Transmissibilities {
  double tau_kl = 0.0, tau_ksls = 0.0, eta_d = 0.0;
};

// tau_KL = (m_sigma/m_sigma_star) <L n, n>/sin, tau_K*L* symmetric form,
// eta_D = <L n_KL, n_K*L*>/sin.
Transmissibilities transmissibilities(double m_sigma, double m_sigma_star, double sin_alpha,
                                      const Vec2& n_kl, const Vec2& n_ksls, const Mat2& lambda);

struct DdfvMeshStats {
  int n_primal = 0, n_bedge = 0, n_vertex = 0, n_unknown = 0, n_diamond = 0;
  int n_dirichlet_bedge = 0, n_neumann_bedge = 0, n_dirichlet_vertex = 0;
  int n_mixed_corner_vertices = 0;  // vertices touching both Dirichlet and Neumann edges
  double primal_area = 0.0, dual_area = 0.0, diamond_area = 0.0;
  double alpha_min = 0.0, alpha_max = 0.0;
  double tau_min = 0.0, tau_max = 0.0, eta_abs_max = 0.0;
};

struct DdfvNorms {
  double l1 = 0.0;    // |u|_{1,T}
  double tau = 0.0;   // ||u||_{T,tau}
  double grad = 0.0;  // ||u||_{T,D}
};

class DdfvMesh {
 public:
  // Builds the primal/dual/diamond structure from a polygon soup. Every
  // boundary edge of the soup must carry a marker.
  static DdfvMesh build(const PolygonMesh& soup, const Medium& medium);

  static DdfvMesh build_structured(int nx, int ny, double distortion,
                                   const std::vector<std::string>& dirichlet_sides,
                                   const Medium& medium, uint64_t seed = 1);

  const std::vector<DdfvNode>& nodes() const { return nodes_; }
  const std::vector<Diamond>& diamonds() const { return diamonds_; }
  int n_primal() const { return n_primal_; }
  int n_bedge() const { return n_bedge_; }
  int n_vertex() const { return n_vertex_; }
  int n_node() const { return static_cast<int>(nodes_.size()); }
  int n_unknown() const { return n_unknown_; }
  double domain_area() const { return domain_area_; }
  const Medium& medium() const { return medium_; }
  const PolygonMesh& soup() const { return soup_; }

  DdfvNorms norms(const VecX& field) const;
  double l1_norm(const VecX& field) const;
  double tau_quadratic(const VecX& field) const;  // ||.||^2_{T,tau}

  DdfvMeshStats stats() const;

  // Empirical constant of |u|_{1,T} <= C ||u||_{T,tau} on the Dirichlet-zero
  // space: random sampling plus sign fixed-point refinement.
  double norm_constant(uint64_t seed = 7) const;

  // Gram matrix of the tau form on free dofs (used by the constant estimate
  // and by norm-equivalence tests).
  SpMat tau_gram() const;
  VecX l1_weights() const;  // per free dof

 private:
  std::vector<DdfvNode> nodes_;
  std::vector<Diamond> diamonds_;
  int n_primal_ = 0, n_bedge_ = 0, n_vertex_ = 0, n_unknown_ = 0;
  double domain_area_ = 0.0;
  Medium medium_;
  PolygonMesh soup_;
  int n_mixed_corner_ = 0;
};

inline Vec2 diamond_gradient(const Diamond& d, const VecX& field) {
  double dkl = field[d.b] - field[d.a];
  double dksls = field[d.ws] - field[d.vs];
  return (dkl / d.m_sigma_star * d.n_sigma_k + dksls / d.m_sigma * d.n_sigma_star_kstar) /
         d.sin_alpha;
}

// Shared by both meshes: max of (sum w_i |u_i|) / sqrt(u^T Q u) over random
// fields, refined by the sign fixed-point u <- Q^{-1} (w .* sign(u)).
double estimate_norm_ratio_constant(const SpMat& gram, const VecX& l1_weights, uint64_t seed,
                                    int samples = 1000);

}  // namespace tpf
