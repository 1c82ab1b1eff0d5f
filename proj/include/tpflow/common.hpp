#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tpf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct ConfigError : std::runtime_error {
  int line = 0;
  ConfigError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "config line " + std::to_string(line_no) + ": " + msg
                                       : "config: " + msg),
        line(line_no) {}
};

struct InvalidMesh : std::runtime_error {
  explicit InvalidMesh(const std::string& msg) : std::runtime_error("invalid mesh: " + msg) {}
};

struct DegenerateModel : std::runtime_error {
  explicit DegenerateModel(const std::string& msg) : std::runtime_error("degenerate model: " + msg) {}
};

struct InvalidParams : std::runtime_error {
  explicit InvalidParams(const std::string& msg) : std::runtime_error("invalid parameters: " + msg) {}
};

inline double sq(double x) { return x * x; }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed area of the triangle (a, b, c); positive for counterclockwise order.
inline double tri_area_signed(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross2(b - a, c - a);
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small deterministic generator; identical streams on every platform, unlike
// the distributions of <random>.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    // Box-Muller; rejects u == 0 to keep log finite.
    double u = 0.0;
    do {
      u = uniform01();
    } while (u <= 0.0);
    double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
  }

 private:
  uint64_t state_;
};

}  // namespace tpf
