#pragma once

#include <array>
#include <string>
#include <vector>

#include "tpflow/common.hpp"
#include "tpflow/medium.hpp"
#include "tpflow/mesh_io.hpp"

namespace tpf {

struct CvfeVertex {
  Vec2 pos = Vec2::Zero();
  double measure = 0.0;  // m_{A_K}, area of the dual control volume
  double porosity = 1.0;
  bool dirichlet = false;
  int unknown = -1;
};

// Pairs within a triangle are indexed (0,1) -> 0, (0,2) -> 1, (1,2) -> 2.
inline int pair_index(int i, int j) { return i + j - 1; }

struct CvfeTriangle {
  std::array<int, 3> v = {-1, -1, -1};  // counterclockwise
  double area = 0.0;
  Vec2 barycenter = Vec2::Zero();
  std::array<Vec2, 3> grad = {};      // P1 basis gradients
  std::array<double, 3> sub_area = {};  // |A_K^T| per corner
  Mat2 lambda = Mat2::Identity();
  std::array<double, 3> coef = {};    // stiffness Lambda_KL^T per pair
};

struct CvfeMeshStats {
  int n_vertex = 0, n_triangle = 0, n_unknown = 0, n_dirichlet = 0;
  int n_negative_coefs = 0;
  double area = 0.0, dual_area = 0.0;
  double coef_min = 0.0, coef_max = 0.0;
};

// P1 stiffness coefficients Lambda_KL^T = -|T| (Lambda grad phi_K) . grad phi_L
// for the three vertex pairs of one triangle.
std::array<double, 3> stiffness_coeffs(const Vec2& x0, const Vec2& x1, const Vec2& x2,
                                       const Mat2& lambda);

class CvfeMesh {
 public:
  static CvfeMesh build(const PolygonMesh& soup, const Medium& medium);
  static CvfeMesh build_structured(int nx, int ny, const std::string& split,
                                   const std::vector<std::string>& dirichlet_sides,
                                   const Medium& medium);

  const std::vector<CvfeVertex>& vertices() const { return vertices_; }
  const std::vector<CvfeTriangle>& triangles() const { return triangles_; }
  int n_node() const { return static_cast<int>(vertices_.size()); }
  int n_unknown() const { return n_unknown_; }
  double domain_area() const { return domain_area_; }
  const Medium& medium() const { return medium_; }
  const PolygonMesh& soup() const { return soup_; }
  bool all_coefs_nonnegative() const { return all_nonneg_; }

  double l1_norm(const VecX& field) const;      // sum m_{A_K} |f_K|
  double vt_quadratic(const VecX& field) const; // ||f||^2_{V_T} (plain gradient)
  // scheme quadratic sum_T sum_pairs Lambda_KL^T (delta f)^2 = int Lambda grad f . grad f
  double lambda_quadratic(const VecX& field) const;

  CvfeMeshStats stats() const;

  SpMat vt_gram() const;
  VecX l1_weights() const;
  double norm_constant(uint64_t seed = 7) const;  // discrete Poincare constant

 private:
  std::vector<CvfeVertex> vertices_;
  std::vector<CvfeTriangle> triangles_;
  int n_unknown_ = 0;
  double domain_area_ = 0.0;
  bool all_nonneg_ = true;
  Medium medium_;
  PolygonMesh soup_;
};

}  // namespace tpf
