#include "tpflow/ddfv_mesh.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace tpf {

namespace {

struct EdgeInfo {
  int cell0 = -1, cell1 = -1;  // incident soup cells
  int va = -1, vb = -1;        // vertex ids
  int marker = -1;             // index into soup.boundary_edges, -1 if interior
};

double polygon_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    a += cross2(p, q);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& pts, double area) {
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    double w = cross2(p, q);
    c += w * (p + q);
  }
  return c / (6.0 * area);
}

}  // namespace

Transmissibilities transmissibilities(double m_sigma, double m_sigma_star, double sin_alpha,
                                      const Vec2& n_kl, const Vec2& n_ksls, const Mat2& lambda) {
  if (sin_alpha <= 1e-10) throw InvalidMesh("degenerate diamond angle");
  Transmissibilities t;
  t.tau_kl = (m_sigma / m_sigma_star) * n_kl.dot(lambda * n_kl) / sin_alpha;
  t.tau_ksls = (m_sigma_star / m_sigma) * n_ksls.dot(lambda * n_ksls) / sin_alpha;
  t.eta_d = n_kl.dot(lambda * n_ksls) / sin_alpha;
  return t;
}

DdfvMesh DdfvMesh::build(const PolygonMesh& soup_in, const Medium& medium) {
  medium.validate();
  DdfvMesh mesh;
  mesh.medium_ = medium;
  mesh.soup_ = soup_in;
  PolygonMesh& soup = mesh.soup_;

  const int ncell = static_cast<int>(soup.cells.size());
  const int nvert = static_cast<int>(soup.vertices.size());

  // Cell geometry; enforce counterclockwise order and star-shapedness with
  // respect to the barycenter.
  std::vector<Vec2> centroid(ncell);
  std::vector<double> area(ncell);
  for (int c = 0; c < ncell; ++c) {
    std::vector<Vec2> pts;
    for (int id : soup.cells[c]) pts.push_back(soup.vertices[id]);
    double a = polygon_area(pts);
    if (a < 0.0) {
      std::reverse(soup.cells[c].begin(), soup.cells[c].end());
      std::reverse(pts.begin(), pts.end());
      a = -a;
    }
    if (a <= 0.0) throw InvalidMesh("cell with nonpositive area");
    area[c] = a;
    centroid[c] = polygon_centroid(pts, a);
    for (size_t i = 0; i < pts.size(); ++i) {
      if (tri_area_signed(centroid[c], pts[i], pts[(i + 1) % pts.size()]) <= 0.0)
        throw InvalidMesh("cell not star-shaped with respect to its barycenter");
    }
  }

  // Edge table.
  std::map<std::pair<int, int>, EdgeInfo> edges;
  for (int c = 0; c < ncell; ++c) {
    const auto& cell = soup.cells[c];
    for (size_t i = 0; i < cell.size(); ++i) {
      int va = cell[i], vb = cell[(i + 1) % cell.size()];
      auto key = std::minmax(va, vb);
      auto& e = edges[key];
      if (e.cell0 < 0) {
        e.cell0 = c;
        e.va = va;
        e.vb = vb;
      } else if (e.cell1 < 0) {
        e.cell1 = c;
      } else {
        throw InvalidMesh("edge shared by more than two cells");
      }
    }
  }
  for (size_t k = 0; k < soup.boundary_edges.size(); ++k) {
    const auto& be = soup.boundary_edges[k];
    auto key = std::minmax(be.a, be.b);
    auto it = edges.find(key);
    if (it == edges.end()) throw InvalidMesh("boundary marker on a nonexistent edge");
    if (it->second.cell1 >= 0) throw InvalidMesh("boundary marker on an interior edge");
    it->second.marker = static_cast<int>(k);
  }
  for (const auto& [key, e] : edges) {
    if (e.cell1 < 0 && e.marker < 0) throw InvalidMesh("boundary edge without a D/N marker");
  }

  // Nodes: interior primal cells, then boundary-edge cells, then vertices.
  mesh.n_primal_ = ncell;
  mesh.nodes_.resize(ncell);
  for (int c = 0; c < ncell; ++c) {
    DdfvNode& n = mesh.nodes_[c];
    n.kind = CellKind::primal;
    n.center = centroid[c];
    n.measure = area[c];
    n.porosity = medium.phi_at(centroid[c]);
    mesh.domain_area_ += area[c];
  }

  std::map<std::pair<int, int>, int> bedge_node;  // edge key -> node id
  for (auto& [key, e] : edges) {
    if (e.cell1 >= 0) continue;
    DdfvNode n;
    n.kind = CellKind::boundary_edge;
    n.center = 0.5 * (soup.vertices[e.va] + soup.vertices[e.vb]);
    n.measure = 0.0;
    const auto& be = soup.boundary_edges[e.marker];
    n.dirichlet = (be.bc == Bc::dirichlet);
    n.neumann_edge = (be.bc == Bc::neumann);
    n.porosity = medium.phi_at(n.center);
    bedge_node[key] = static_cast<int>(mesh.nodes_.size());
    mesh.nodes_.push_back(n);
  }
  mesh.n_bedge_ = static_cast<int>(mesh.nodes_.size()) - ncell;

  const int vertex_base = static_cast<int>(mesh.nodes_.size());
  std::vector<bool> touches_dir(nvert, false), touches_neu(nvert, false);
  for (const auto& be : soup.boundary_edges) {
    if (be.bc == Bc::dirichlet) {
      touches_dir[be.a] = touches_dir[be.b] = true;
    } else {
      touches_neu[be.a] = touches_neu[be.b] = true;
    }
  }
  for (int v = 0; v < nvert; ++v) {
    DdfvNode n;
    n.kind = CellKind::dual;
    n.center = soup.vertices[v];
    n.measure = 0.0;  // accumulated from diamonds below
    n.dirichlet = touches_dir[v];  // mixed D/N corners go to the Dirichlet set
    if (touches_dir[v] && touches_neu[v]) ++mesh.n_mixed_corner_;
    mesh.nodes_.push_back(n);
  }
  mesh.n_vertex_ = nvert;

  // Diamonds, dual measures and dual porosities.
  std::vector<double> dual_phi_acc(nvert, 0.0);
  for (auto& [key, e] : edges) {
    Diamond d;
    d.boundary = (e.cell1 < 0);
    if (d.boundary) {
      d.a = bedge_node[key];
      d.b = e.cell0;
    } else {
      d.a = std::min(e.cell0, e.cell1);
      d.b = std::max(e.cell0, e.cell1);
    }
    int va = e.va, vb = e.vb;
    const Vec2 xa = mesh.nodes_[d.a].center;
    const Vec2 xb = mesh.nodes_[d.b].center;
    Vec2 pv = soup.vertices[va], pw = soup.vertices[vb];
    d.m_sigma = (pw - pv).norm();
    d.m_sigma_star = (xb - xa).norm();
    if (d.m_sigma <= 0.0 || d.m_sigma_star <= 0.0) throw InvalidMesh("zero-length diamond edge");
    Vec2 t_sigma = (pw - pv) / d.m_sigma;
    Vec2 t_star = (xb - xa) / d.m_sigma_star;
    if (cross2(t_star, t_sigma) < 0.0) {
      std::swap(va, vb);
      std::swap(pv, pw);
      t_sigma = -t_sigma;
    }
    d.vs = vertex_base + va;
    d.ws = vertex_base + vb;
    d.sin_alpha = cross2(t_star, t_sigma);
    d.cos_alpha = t_star.dot(t_sigma);
    if (d.sin_alpha <= 1e-10) throw InvalidMesh("degenerate diamond angle");
    d.n_sigma_k = Vec2(t_sigma.y(), -t_sigma.x());
    d.n_sigma_star_kstar = Vec2(-t_star.y(), t_star.x());
    d.m_d = 0.5 * d.m_sigma * d.m_sigma_star * d.sin_alpha;
    d.area_a = d.boundary ? 0.0 : std::abs(tri_area_signed(xa, pv, pw));
    d.area_b = std::abs(tri_area_signed(xb, pv, pw));

    // permeability: area-weighted mean over the two triangle halves
    Mat2 lam_b = medium.lambda_at(centroid[d.b]);
    Mat2 lam_a = d.boundary ? lam_b : medium.lambda_at(centroid[d.a]);
    d.lambda = (d.area_a + d.area_b > 0.0)
                   ? Mat2(((d.area_a * lam_a + d.area_b * lam_b) / (d.area_a + d.area_b)))
                   : lam_b;
    Transmissibilities t = transmissibilities(d.m_sigma, d.m_sigma_star, d.sin_alpha, d.n_sigma_k,
                                              d.n_sigma_star_kstar, d.lambda);
    d.tau_kl = t.tau_kl;
    d.tau_ksls = t.tau_ksls;
    d.eta_d = t.eta_d;

    // dual-cell split: z = intersection of (xa, xb) with the line (v, w)
    double denom = cross2(xb - xa, pw - pv);
    double tz = d.boundary ? 0.0 : cross2(pv - xa, pw - pv) / denom;
    Vec2 z = xa + tz * (xb - xa);
    double phi_a = mesh.nodes_[d.a].porosity;
    double phi_b = mesh.nodes_[d.b].porosity;
    for (int side = 0; side < 2; ++side) {
      const Vec2& p = side == 0 ? pv : pw;
      int vtx = side == 0 ? va : vb;
      double tri = std::abs(tri_area_signed(p, xa, xb));
      double part_a = std::abs(tri_area_signed(p, xa, z));
      double part_b = std::abs(tri_area_signed(p, z, xb));
      mesh.nodes_[vertex_base + vtx].measure += tri;
      dual_phi_acc[vtx] += phi_a * part_a + phi_b * part_b;
    }
    mesh.diamonds_.push_back(d);
  }
  for (int v = 0; v < nvert; ++v) {
    DdfvNode& n = mesh.nodes_[vertex_base + v];
    if (n.measure <= 0.0) throw InvalidMesh("vertex with empty dual cell");
    n.porosity = dual_phi_acc[v] / n.measure;
  }

  // contiguous dof indices over non-Dirichlet cells
  for (auto& n : mesh.nodes_) {
    if (!n.dirichlet) n.unknown = mesh.n_unknown_++;
  }
  return mesh;
}

DdfvMesh DdfvMesh::build_structured(int nx, int ny, double distortion,
                                    const std::vector<std::string>& dirichlet_sides,
                                    const Medium& medium, uint64_t seed) {
  return build(structured_quads(nx, ny, distortion, dirichlet_sides, seed), medium);
}

DdfvNorms DdfvMesh::norms(const VecX& field) const {
  DdfvNorms out;
  out.l1 = l1_norm(field);
  double tau2 = 0.0, grad2 = 0.0;
  for (const auto& d : diamonds_) {
    double dkl = field[d.b] - field[d.a];
    double dksls = field[d.ws] - field[d.vs];
    tau2 += d.tau_kl * dkl * dkl + d.tau_ksls * dksls * dksls;
    grad2 += d.m_d * diamond_gradient(d, field).squaredNorm();
  }
  out.tau = std::sqrt(tau2);
  out.grad = std::sqrt(grad2);
  return out;
}

double DdfvMesh::l1_norm(const VecX& field) const {
  double l1 = 0.0;
  for (int i = 0; i < n_node(); ++i) {
    if (nodes_[i].measure > 0.0) l1 += 0.5 * nodes_[i].measure * std::abs(field[i]);
  }
  return l1;
}

double DdfvMesh::tau_quadratic(const VecX& field) const {
  double tau2 = 0.0;
  for (const auto& d : diamonds_) {
    double dkl = field[d.b] - field[d.a];
    double dksls = field[d.ws] - field[d.vs];
    tau2 += d.tau_kl * dkl * dkl + d.tau_ksls * dksls * dksls;
  }
  return tau2;
}

DdfvMeshStats DdfvMesh::stats() const {
  DdfvMeshStats s;
  s.n_primal = n_primal_;
  s.n_bedge = n_bedge_;
  s.n_vertex = n_vertex_;
  s.n_unknown = n_unknown_;
  s.n_diamond = static_cast<int>(diamonds_.size());
  s.n_mixed_corner_vertices = n_mixed_corner_;
  for (const auto& n : nodes_) {
    if (n.kind == CellKind::primal) s.primal_area += n.measure;
    if (n.kind == CellKind::dual) {
      s.dual_area += n.measure;
      if (n.dirichlet) ++s.n_dirichlet_vertex;
    }
    if (n.kind == CellKind::boundary_edge) {
      if (n.dirichlet)
        ++s.n_dirichlet_bedge;
      else
        ++s.n_neumann_bedge;
    }
  }
  s.alpha_min = M_PI;
  s.alpha_max = 0.0;
  s.tau_min = std::numeric_limits<double>::max();
  for (const auto& d : diamonds_) {
    s.diamond_area += d.m_d;
    double alpha = std::atan2(d.sin_alpha, d.cos_alpha);
    s.alpha_min = std::min(s.alpha_min, alpha);
    s.alpha_max = std::max(s.alpha_max, alpha);
    s.tau_min = std::min({s.tau_min, d.tau_kl, d.tau_ksls});
    s.tau_max = std::max({s.tau_max, d.tau_kl, d.tau_ksls});
    s.eta_abs_max = std::max(s.eta_abs_max, std::abs(d.eta_d));
  }
  return s;
}

SpMat DdfvMesh::tau_gram() const {
  std::vector<Eigen::Triplet<double>> trips;
  auto add_pair = [&](int i, int j, double coef) {
    int ui = nodes_[i].unknown, uj = nodes_[j].unknown;
    if (ui >= 0) trips.emplace_back(ui, ui, coef);
    if (uj >= 0) trips.emplace_back(uj, uj, coef);
    if (ui >= 0 && uj >= 0) {
      trips.emplace_back(ui, uj, -coef);
      trips.emplace_back(uj, ui, -coef);
    }
  };
  for (const auto& d : diamonds_) {
    add_pair(d.a, d.b, d.tau_kl);
    add_pair(d.vs, d.ws, d.tau_ksls);
  }
  SpMat gram(n_unknown_, n_unknown_);
  gram.setFromTriplets(trips.begin(), trips.end());
  return gram;
}

VecX DdfvMesh::l1_weights() const {
  VecX w = VecX::Zero(n_unknown_);
  for (const auto& n : nodes_) {
    if (n.unknown >= 0 && n.measure > 0.0) w[n.unknown] = 0.5 * n.measure;
  }
  return w;
}

double DdfvMesh::norm_constant(uint64_t seed) const {
  return estimate_norm_ratio_constant(tau_gram(), l1_weights(), seed);
}

double estimate_norm_ratio_constant(const SpMat& gram, const VecX& l1_weights, uint64_t seed,
                                    int samples) {
  const int n = static_cast<int>(gram.rows());
  if (n == 0) return 0.0;
  Eigen::SimplicialLDLT<SpMat> chol(gram);
  if (chol.info() != Eigen::Success) throw InvalidMesh("norm Gram matrix is not SPD");

  auto ratio = [&](const VecX& u) {
    double num = l1_weights.cwiseProduct(u.cwiseAbs()).sum();
    double den = std::sqrt(u.dot(gram.selfadjointView<Eigen::Lower>() * u));
    return den > 0.0 ? num / den : 0.0;
  };

  Rng rng(seed);
  double best = 0.0;
  VecX best_u = VecX::Zero(n);
  for (int s = 0; s < samples; ++s) {
    VecX u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.normal();
    double r = ratio(u);
    if (r > best) {
      best = r;
      best_u = u;
    }
  }
  // sign fixed-point refinement: u = Q^{-1}(w .* sign(u)) increases the ratio
  VecX u = best_u;
  for (int it = 0; it < 60; ++it) {
    VecX rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = l1_weights[i] * (u[i] >= 0.0 ? 1.0 : -1.0);
    u = chol.solve(rhs);
    double r = ratio(u);
    if (r <= best * (1.0 + 1e-14)) break;
    best = r;
  }
  return best;
}

}  // namespace tpf
