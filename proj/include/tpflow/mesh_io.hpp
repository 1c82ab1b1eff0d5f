#pragma once

#include <string>
#include <vector>

#include "tpflow/common.hpp"

namespace tpf {

enum class Bc { dirichlet, neumann };

// Plain-text polygon soup shared by both discretizations.
//
//   nv ncell nbedge        counts header
//   x y                    nv vertex lines
//   k v0 v1 ... v_{k-1}    ncell cell lines (counterclockwise)
//   va vb D|N              nbedge boundary edge lines with marker
//
// '#' starts a comment; blank lines are ignored.
struct PolygonMesh {
  struct BoundaryEdge {
    int a = 0, b = 0;
    Bc bc = Bc::dirichlet;
  };

  std::vector<Vec2> vertices;
  std::vector<std::vector<int>> cells;
  std::vector<BoundaryEdge> boundary_edges;
};

PolygonMesh read_polygon_mesh(const std::string& path);
void write_polygon_mesh(const PolygonMesh& mesh, const std::string& path);

// Structured quadrilateral grid of the unit square, interior vertices
// perturbed by distortion * h in a deterministic seeded pattern.
// `dirichlet_sides` holds any of "left","right","bottom","top".
PolygonMesh structured_quads(int nx, int ny, double distortion,
                             const std::vector<std::string>& dirichlet_sides, uint64_t seed);

// Structured triangulations of the unit square. split = "diagonal" cuts each
// quad along one diagonal; split = "acute" adds the cell center and cuts each
// quad into four triangles (all stiffness coefficients nonnegative for
// identity permeability).
PolygonMesh structured_triangles(int nx, int ny, const std::string& split,
                                 const std::vector<std::string>& dirichlet_sides);

}  // namespace tpf
