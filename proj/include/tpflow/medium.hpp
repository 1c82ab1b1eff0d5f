#pragma once

#include <vector>

#include "tpflow/common.hpp"

namespace tpf {

// Piecewise-constant porosity and permeability. A default value covers the
// whole domain; axis-aligned boxes override it (later regions win).
struct MediumRegion {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double phi = 0.2;
  Mat2 lambda = Mat2::Identity();
};

struct Medium {
  double phi = 0.2;
  Mat2 lambda = Mat2::Identity();
  std::vector<MediumRegion> regions;

  double phi_at(const Vec2& x) const {
    double v = phi;
    for (const auto& r : regions)
      if (x.x() >= r.x0 && x.x() <= r.x1 && x.y() >= r.y0 && x.y() <= r.y1) v = r.phi;
    return v;
  }

  Mat2 lambda_at(const Vec2& x) const {
    Mat2 v = lambda;
    for (const auto& r : regions)
      if (x.x() >= r.x0 && x.x() <= r.x1 && x.y() >= r.y0 && x.y() <= r.y1) v = r.lambda;
    return v;
  }

  double phi_min() const {
    double v = phi;
    for (const auto& r : regions) v = std::min(v, r.phi);
    return v;
  }

  double phi_max() const {
    double v = phi;
    for (const auto& r : regions) v = std::max(v, r.phi);
    return v;
  }

  // smallest eigenvalue over all regions (uniform ellipticity bound)
  double lambda_min() const {
    auto lmin = [](const Mat2& m) {
      double tr = m.trace(), det = m.determinant();
      return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    };
    double v = lmin(lambda);
    for (const auto& r : regions) v = std::min(v, lmin(r.lambda));
    return v;
  }

  void validate() const {
    auto check_spd = [](const Mat2& m) {
      if (std::abs(m(0, 1) - m(1, 0)) > 1e-14) throw InvalidParams("permeability must be symmetric");
      if (m(0, 0) <= 0.0 || m.determinant() <= 0.0)
        throw InvalidParams("permeability must be positive definite");
    };
    if (phi <= 0.0) throw InvalidParams("porosity must be positive");
    check_spd(lambda);
    for (const auto& r : regions) {
      if (r.phi <= 0.0) throw InvalidParams("porosity must be positive");
      check_spd(r.lambda);
    }
  }
};

}  // namespace tpf
