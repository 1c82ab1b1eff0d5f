#include "tpflow/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tpf {

namespace {

// strip comments and skip blank lines
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    if (!blank) return true;
  }
  return false;
}

bool on_side(const Vec2& a, const Vec2& b, const std::string& side) {
  const double tol = 1e-12;
  if (side == "left") return std::abs(a.x()) < tol && std::abs(b.x()) < tol;
  if (side == "right") return std::abs(a.x() - 1.0) < tol && std::abs(b.x() - 1.0) < tol;
  if (side == "bottom") return std::abs(a.y()) < tol && std::abs(b.y()) < tol;
  if (side == "top") return std::abs(a.y() - 1.0) < tol && std::abs(b.y() - 1.0) < tol;
  return false;
}

Bc classify_edge(const Vec2& a, const Vec2& b, const std::vector<std::string>& dirichlet_sides) {
  for (const auto& side : dirichlet_sides)
    if (side == "all" || on_side(a, b, side)) return Bc::dirichlet;
  return Bc::neumann;
}

void append_boundary_edges(PolygonMesh& mesh, int nx, int ny,
                           const std::vector<std::string>& dirichlet_sides,
                           int stride /* vertices per row */) {
  auto vid = [stride](int i, int j) { return j * stride + i; };
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), Bc::neumann});
    mesh.boundary_edges.push_back({vid(i, ny), vid(i + 1, ny), Bc::neumann});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({vid(0, j), vid(0, j + 1), Bc::neumann});
    mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), Bc::neumann});
  }
  for (auto& e : mesh.boundary_edges)
    e.bc = classify_edge(mesh.vertices[e.a], mesh.vertices[e.b], dirichlet_sides);
}

}  // namespace

PolygonMesh read_polygon_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidMesh("cannot open mesh file " + path);
  PolygonMesh mesh;
  std::string line;
  if (!next_data_line(in, line)) throw InvalidMesh("missing counts header in " + path);
  int nv = 0, ncell = 0, nbedge = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> ncell >> nbedge)) throw InvalidMesh("bad counts header in " + path);
  }
  if (nv < 3 || ncell < 1) throw InvalidMesh("too few vertices or cells in " + path);
  mesh.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    if (!next_data_line(in, line)) throw InvalidMesh("missing vertex line in " + path);
    std::istringstream ss(line);
    if (!(ss >> mesh.vertices[i].x() >> mesh.vertices[i].y()))
      throw InvalidMesh("bad vertex line in " + path);
  }
  mesh.cells.resize(ncell);
  for (int c = 0; c < ncell; ++c) {
    if (!next_data_line(in, line)) throw InvalidMesh("missing cell line in " + path);
    std::istringstream ss(line);
    int k = 0;
    if (!(ss >> k) || k < 3) throw InvalidMesh("bad cell line in " + path);
    mesh.cells[c].resize(k);
    for (int i = 0; i < k; ++i) {
      if (!(ss >> mesh.cells[c][i]) || mesh.cells[c][i] < 0 || mesh.cells[c][i] >= nv)
        throw InvalidMesh("bad cell vertex id in " + path);
    }
  }
  mesh.boundary_edges.resize(nbedge);
  for (int e = 0; e < nbedge; ++e) {
    if (!next_data_line(in, line)) throw InvalidMesh("missing boundary edge line in " + path);
    std::istringstream ss(line);
    std::string marker;
    auto& be = mesh.boundary_edges[e];
    if (!(ss >> be.a >> be.b >> marker)) throw InvalidMesh("bad boundary edge line in " + path);
    if (marker == "D" || marker == "d")
      be.bc = Bc::dirichlet;
    else if (marker == "N" || marker == "n")
      be.bc = Bc::neumann;
    else
      throw InvalidMesh("boundary marker must be D or N in " + path);
  }
  return mesh;
}

void write_polygon_mesh(const PolygonMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidMesh("cannot write mesh file " + path);
  char buf[64];
  out << mesh.vertices.size() << " " << mesh.cells.size() << " " << mesh.boundary_edges.size()
      << "\n";
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g", v.x(), v.y());
    out << buf << "\n";
  }
  for (const auto& c : mesh.cells) {
    out << c.size();
    for (int id : c) out << " " << id;
    out << "\n";
  }
  for (const auto& e : mesh.boundary_edges)
    out << e.a << " " << e.b << " " << (e.bc == Bc::dirichlet ? "D" : "N") << "\n";
}

PolygonMesh structured_quads(int nx, int ny, double distortion,
                             const std::vector<std::string>& dirichlet_sides, uint64_t seed) {
  if (nx < 2 || ny < 2) throw InvalidMesh("structured grid needs nx, ny >= 2");
  if (distortion < 0.0 || distortion > 0.4) throw InvalidMesh("distortion must lie in [0, 0.4]");
  PolygonMesh mesh;
  const double hx = 1.0 / nx, hy = 1.0 / ny;
  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      Vec2 v(i * hx, j * hy);
      if (distortion > 0.0 && i > 0 && i < nx && j > 0 && j < ny) {
        uint64_t h = splitmix64(seed ^ splitmix64((uint64_t(i) << 32) | uint64_t(j)));
        double ux = 2.0 * (double(h >> 32) / 4294967296.0) - 1.0;
        double uy = 2.0 * (double(h & 0xffffffffULL) / 4294967296.0) - 1.0;
        v.x() += distortion * hx * ux;
        v.y() += distortion * hy * uy;
      }
      mesh.vertices.push_back(v);
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  append_boundary_edges(mesh, nx, ny, dirichlet_sides, nx + 1);
  return mesh;
}

PolygonMesh structured_triangles(int nx, int ny, const std::string& split,
                                 const std::vector<std::string>& dirichlet_sides) {
  if (nx < 2 || ny < 2) throw InvalidMesh("structured grid needs nx, ny >= 2");
  PolygonMesh mesh;
  const double hx = 1.0 / nx, hy = 1.0 / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.push_back(Vec2(i * hx, j * hy));
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  if (split == "diagonal") {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
        mesh.cells.push_back({a, b, c});
        mesh.cells.push_back({a, c, d});
      }
    }
  } else if (split == "acute") {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        int center = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(Vec2((i + 0.5) * hx, (j + 0.5) * hy));
        int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
        mesh.cells.push_back({a, b, center});
        mesh.cells.push_back({b, c, center});
        mesh.cells.push_back({c, d, center});
        mesh.cells.push_back({d, a, center});
      }
    }
  } else {
    throw InvalidMesh("unknown triangle split '" + split + "'");
  }
  append_boundary_edges(mesh, nx, ny, dirichlet_sides, nx + 1);
  return mesh;
}

}  // namespace tpf
