#pragma once

#include <functional>
#include <vector>

namespace tpf {

// Gauss-Legendre rule on [-1, 1]; nodes and weights are computed once per
// order with Newton iterations on the Legendre polynomial and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre over [a, b]: one panel per unit of length (at
// least one), `points` nodes per panel. Handles a > b with the usual sign.
double integrate(const std::function<double(double)>& f, double a, double b, int points);

}  // namespace tpf
