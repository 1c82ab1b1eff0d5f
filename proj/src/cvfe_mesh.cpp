#include "tpflow/cvfe_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tpflow/ddfv_mesh.hpp"  // estimate_norm_ratio_constant

namespace tpf {

std::array<double, 3> stiffness_coeffs(const Vec2& x0, const Vec2& x1, const Vec2& x2,
                                       const Mat2& lambda) {
  double area = tri_area_signed(x0, x1, x2);
  if (area <= 0.0) throw InvalidMesh("triangle is degenerate or clockwise");
  auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
  std::array<Vec2, 3> grad = {perp(x2 - x1) / (2.0 * area), perp(x0 - x2) / (2.0 * area),
                              perp(x1 - x0) / (2.0 * area)};
  std::array<double, 3> coef;
  coef[pair_index(0, 1)] = -area * (lambda * grad[0]).dot(grad[1]);
  coef[pair_index(0, 2)] = -area * (lambda * grad[0]).dot(grad[2]);
  coef[pair_index(1, 2)] = -area * (lambda * grad[1]).dot(grad[2]);
  return coef;
}

CvfeMesh CvfeMesh::build(const PolygonMesh& soup_in, const Medium& medium) {
  medium.validate();
  CvfeMesh mesh;
  mesh.medium_ = medium;
  mesh.soup_ = soup_in;
  PolygonMesh& soup = mesh.soup_;

  const int nvert = static_cast<int>(soup.vertices.size());
  mesh.vertices_.resize(nvert);
  for (int v = 0; v < nvert; ++v) mesh.vertices_[v].pos = soup.vertices[v];

  // conformity bookkeeping: each edge must belong to one or two triangles
  std::map<std::pair<int, int>, int> edge_count;

  mesh.triangles_.reserve(soup.cells.size());
  for (auto& cell : soup.cells) {
    if (cell.size() != 3) throw InvalidMesh("CVFE mesh requires triangles");
    CvfeTriangle t;
    if (tri_area_signed(soup.vertices[cell[0]], soup.vertices[cell[1]], soup.vertices[cell[2]]) <
        0.0)
      std::swap(cell[1], cell[2]);
    t.v = {cell[0], cell[1], cell[2]};
    const Vec2 x0 = soup.vertices[t.v[0]], x1 = soup.vertices[t.v[1]], x2 = soup.vertices[t.v[2]];
    t.area = tri_area_signed(x0, x1, x2);
    if (t.area <= 0.0) throw InvalidMesh("degenerate triangle");
    t.barycenter = (x0 + x1 + x2) / 3.0;
    auto perp = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
    t.grad = {perp(x2 - x1) / (2.0 * t.area), perp(x0 - x2) / (2.0 * t.area),
              perp(x1 - x0) / (2.0 * t.area)};
    t.lambda = medium.lambda_at(t.barycenter);
    t.coef = stiffness_coeffs(x0, x1, x2, t.lambda);

    // dual fractions A_K^T: quadrilateral (x_K, midpoint, barycenter, midpoint),
    // counterclockwise
    const std::array<Vec2, 3> xs = {x0, x1, x2};
    for (int k = 0; k < 3; ++k) {
      const Vec2& xk = xs[k];
      Vec2 m_next = 0.5 * (xk + xs[(k + 1) % 3]);
      Vec2 m_prev = 0.5 * (xk + xs[(k + 2) % 3]);
      double a = tri_area_signed(xk, m_next, t.barycenter) +
                 tri_area_signed(xk, t.barycenter, m_prev);
      if (a <= 0.0) throw InvalidMesh("degenerate dual fraction");
      t.sub_area[k] = a;
      mesh.vertices_[t.v[k]].measure += a;
    }
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(t.v[k], t.v[(k + 1) % 3]);
      if (++edge_count[key] > 2) throw InvalidMesh("edge shared by more than two triangles");
    }
    mesh.domain_area_ += t.area;
    mesh.triangles_.push_back(t);
  }

  // boundary markers must cover every boundary edge
  std::map<std::pair<int, int>, Bc> markers;
  for (const auto& be : soup.boundary_edges) markers[std::minmax(be.a, be.b)] = be.bc;
  for (const auto& [key, count] : edge_count) {
    if (count == 1 && markers.find(key) == markers.end())
      throw InvalidMesh("boundary edge without a D/N marker");
  }

  for (const auto& be : soup.boundary_edges) {
    if (be.bc == Bc::dirichlet) {
      mesh.vertices_[be.a].dirichlet = true;  // mixed corners go to the Dirichlet set
      mesh.vertices_[be.b].dirichlet = true;
    }
  }

  // vertex porosity: mean over the control volume of the piecewise-constant field
  std::vector<double> phi_acc(nvert, 0.0);
  for (const auto& t : mesh.triangles_) {
    double phi_t = medium.phi_at(t.barycenter);
    for (int k = 0; k < 3; ++k) phi_acc[t.v[k]] += phi_t * t.sub_area[k];
  }
  for (int v = 0; v < nvert; ++v) {
    auto& vx = mesh.vertices_[v];
    if (vx.measure <= 0.0) throw InvalidMesh("vertex not used by any triangle");
    vx.porosity = phi_acc[v] / vx.measure;
    if (!vx.dirichlet) vx.unknown = mesh.n_unknown_++;
  }

  for (const auto& t : mesh.triangles_)
    for (double c : t.coef)
      if (c < 0.0) mesh.all_nonneg_ = false;
  return mesh;
}

CvfeMesh CvfeMesh::build_structured(int nx, int ny, const std::string& split,
                                    const std::vector<std::string>& dirichlet_sides,
                                    const Medium& medium) {
  return build(structured_triangles(nx, ny, split, dirichlet_sides), medium);
}

double CvfeMesh::l1_norm(const VecX& field) const {
  double l1 = 0.0;
  for (int v = 0; v < n_node(); ++v) l1 += vertices_[v].measure * std::abs(field[v]);
  return l1;
}

double CvfeMesh::vt_quadratic(const VecX& field) const {
  double q = 0.0;
  for (const auto& t : triangles_) {
    Vec2 g = field[t.v[0]] * t.grad[0] + field[t.v[1]] * t.grad[1] + field[t.v[2]] * t.grad[2];
    q += t.area * g.squaredNorm();
  }
  return q;
}

double CvfeMesh::lambda_quadratic(const VecX& field) const {
  double q = 0.0;
  for (const auto& t : triangles_) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        double d = field[t.v[j]] - field[t.v[i]];
        q += t.coef[pair_index(i, j)] * d * d;
      }
    }
  }
  return q;
}

CvfeMeshStats CvfeMesh::stats() const {
  CvfeMeshStats s;
  s.n_vertex = n_node();
  s.n_triangle = static_cast<int>(triangles_.size());
  s.n_unknown = n_unknown_;
  s.area = domain_area_;
  s.coef_min = std::numeric_limits<double>::max();
  s.coef_max = std::numeric_limits<double>::lowest();
  for (const auto& v : vertices_) {
    s.dual_area += v.measure;
    if (v.dirichlet) ++s.n_dirichlet;
  }
  for (const auto& t : triangles_) {
    for (double c : t.coef) {
      s.coef_min = std::min(s.coef_min, c);
      s.coef_max = std::max(s.coef_max, c);
      if (c < 0.0) ++s.n_negative_coefs;
    }
  }
  return s;
}

SpMat CvfeMesh::vt_gram() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& t : triangles_) {
    for (int i = 0; i < 3; ++i) {
      int ui = vertices_[t.v[i]].unknown;
      if (ui < 0) continue;
      for (int j = 0; j < 3; ++j) {
        int uj = vertices_[t.v[j]].unknown;
        if (uj < 0) continue;
        trips.emplace_back(ui, uj, t.area * t.grad[i].dot(t.grad[j]));
      }
    }
  }
  SpMat gram(n_unknown_, n_unknown_);
  gram.setFromTriplets(trips.begin(), trips.end());
  return gram;
}

VecX CvfeMesh::l1_weights() const {
  VecX w = VecX::Zero(n_unknown_);
  for (const auto& v : vertices_)
    if (v.unknown >= 0) w[v.unknown] = v.measure;
  return w;
}

double CvfeMesh::norm_constant(uint64_t seed) const {
  return estimate_norm_ratio_constant(vt_gram(), l1_weights(), seed);
}

}  // namespace tpf
