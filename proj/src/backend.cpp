#include "tpflow/backend.hpp"

#include <algorithm>
#include <set>
#include <vector>

namespace tpf {

FdColoring build_fd_coloring(int n_node, const std::vector<std::pair<int, int>>& edges) {
  FdColoring c;
  c.node_neighbors.assign(n_node, {});
  for (int i = 0; i < n_node; ++i) c.node_neighbors[i].push_back(i);
  for (const auto& [a, b] : edges) {
    c.node_neighbors[a].push_back(b);
    c.node_neighbors[b].push_back(a);
  }
  for (auto& nb : c.node_neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  // greedy distance-2 coloring: a column group may not contain two nodes with
  // a common stencil row
  c.color_of_node.assign(n_node, -1);
  std::vector<int> used;
  for (int i = 0; i < n_node; ++i) {
    used.clear();
    for (int nb : c.node_neighbors[i]) {
      for (int nb2 : c.node_neighbors[nb]) {
        if (c.color_of_node[nb2] >= 0) used.push_back(c.color_of_node[nb2]);
      }
    }
    std::sort(used.begin(), used.end());
    int color = 0;
    for (int u : used) {
      if (u == color) ++color;
      else if (u > color) break;
    }
    c.color_of_node[i] = color;
    c.n_colors = std::max(c.n_colors, color + 1);
  }
  return c;
}

SpMat fd_jacobian(const SchemeBackend& backend, const FdColoring& coloring, const State& state,
                  const State& prev, const SchemeParams& par) {
  const int n = backend.n_unknown();
  VecX r0;
  backend.residual(state, prev, par, r0);
  VecX x0 = backend.pack(state);

  std::vector<Eigen::Triplet<double>> trips;
  VecX xp = x0, rp;
  std::vector<int> perturbed;
  for (int color = 0; color < coloring.n_colors; ++color) {
    for (int phase = 0; phase < 2; ++phase) {
      perturbed.clear();
      xp = x0;
      for (int node = 0; node < backend.n_node(); ++node) {
        if (coloring.color_of_node[node] != color) continue;
        int u = backend.node_unknown(node);
        if (u < 0) continue;
        int col = phase * n + u;
        double h = 1e-7 * std::max(1.0, std::abs(x0[col]));
        xp[col] += h;
        perturbed.push_back(node);
      }
      if (perturbed.empty()) continue;
      State sp = backend.make_state(xp);
      backend.residual(sp, prev, par, rp);
      for (int node : perturbed) {
        int u = backend.node_unknown(node);
        int col = phase * n + u;
        double h = xp[col] - x0[col];
        for (int row_node : coloring.node_neighbors[node]) {
          int ru = backend.node_unknown(row_node);
          if (ru < 0) continue;
          for (int rphase = 0; rphase < 2; ++rphase) {
            int row = rphase * n + ru;
            trips.emplace_back(row, col, (rp[row] - r0[row]) / h);
          }
        }
      }
    }
  }
  SpMat jac(2 * n, 2 * n);
  jac.setFromTriplets(trips.begin(), trips.end());
  return jac;
}

}  // namespace tpf
