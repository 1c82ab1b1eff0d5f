#include "tpflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tpf {

namespace {

GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int points) {
  if (a == b) return 0.0;
  const GaussRule& rule = gauss_legendre(points);
  double len = std::abs(b - a);
  int panels = std::max(1, static_cast<int>(std::ceil(len)));
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double pa = a + (b - a) * (static_cast<double>(p) / panels);
    double pb = a + (b - a) * (static_cast<double>(p + 1) / panels);
    double mid = 0.5 * (pa + pb);
    double half = 0.5 * (pb - pa);
    double local = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      local += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    sum += local * half;
  }
  return sum;
}

}  // namespace tpf
