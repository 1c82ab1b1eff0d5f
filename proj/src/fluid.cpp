#include "tpflow/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "tpflow/quadrature.hpp"

namespace tpf {

namespace {
constexpr int kTableKnots = 1024;
constexpr double kEqualPressureTol = 1e-12;
}  // namespace

FluidModel::FluidModel(const FluidParams& params) : params_(params) {
  if (params_.mu_g <= 0.0 || params_.mu_w <= 0.0) throw InvalidParams("viscosities must be positive");
  if (params_.rho0 <= 0.0) throw InvalidParams("rho0 must be positive");
  if (params_.rho1 < params_.rho0) throw InvalidParams("rho1 must be >= rho0");
  if (params_.pc_slope <= 0.0) throw InvalidParams("pc_slope must be positive");
  if (params_.pc_tanh_amp < 0.0 || params_.pc_tanh_rate <= 0.0)
    throw InvalidParams("tanh capillary parameters must be nonnegative / positive");
  if (params_.mobility_exponent < 0) throw InvalidParams("mobility exponent must be >= 0");
  if (params_.quadrature_points < 2) throw InvalidParams("quadrature_points must be >= 2");

  // m_0 = min over [0,1] of M: dense sampling plus golden-section refinement.
  const int samples = 4096;
  double best_s = 0.0, best_m = total_mobility(0.0);
  for (int i = 1; i <= samples; ++i) {
    double s = static_cast<double>(i) / samples;
    double m = total_mobility(s);
    if (m < best_m) {
      best_m = m;
      best_s = s;
    }
  }
  double lo = std::max(0.0, best_s - 1.0 / samples);
  double hi = std::min(1.0, best_s + 1.0 / samples);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - invphi * (hi - lo), b = lo + invphi * (hi - lo);
  double fa = total_mobility(a), fb = total_mobility(b);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - invphi * (hi - lo);
      fa = total_mobility(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + invphi * (hi - lo);
      fb = total_mobility(b);
    }
  }
  m0_ = std::min({best_m, fa, fb});
  if (m0_ <= 0.0) throw DegenerateModel("total mobility floor is not positive");

  // Tabulate the corrective pressures and xi on [0,1]; increments per knot
  // interval by Gauss quadrature of ratio(u) * pc'(u).
  auto build_table = [&](Phase ratio_phase, bool is_xi, Pchip& tab, double& at_one) {
    std::vector<double> values(kTableKnots, 0.0);
    const int n = kTableKnots;
    for (int i = 1; i < n; ++i) {
      double s0 = static_cast<double>(i - 1) / (n - 1);
      double s1 = static_cast<double>(i) / (n - 1);
      auto f = [&](double u) {
        double r = is_xi ? xi_ratio(u) : corrective_ratio(ratio_phase, u);
        return r * pc_prime(u);
      };
      const GaussRule& rule = gauss_legendre(std::min(params_.quadrature_points, 16));
      double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
      double inc = 0.0;
      for (size_t k = 0; k < rule.nodes.size(); ++k)
        inc += rule.weights[k] * f(mid + half * rule.nodes[k]);
      values[i] = values[i - 1] + inc * half;
    }
    tab.build(values, n);
    at_one = values[n - 1];
  };
  build_table(Phase::gas, false, phat_g_, phat_g1_);
  build_table(Phase::wetting, false, phat_w_, phat_w1_);
  build_table(Phase::gas, true, xi_, xi1_);
}

double FluidModel::pc(double s) const {
  double v = params_.pc_slope * s;
  if (params_.pc_law == PcLaw::tanh_blend)
    v += params_.pc_tanh_amp * std::tanh(params_.pc_tanh_rate * s);
  return v;
}

double FluidModel::pc_prime(double s) const {
  double v = params_.pc_slope;
  if (params_.pc_law == PcLaw::tanh_blend) {
    double c = std::cosh(params_.pc_tanh_rate * s);
    v += params_.pc_tanh_amp * params_.pc_tanh_rate / (c * c);
  }
  return v;
}

double FluidModel::pc_inverse(double x) const {
  if (params_.pc_law == PcLaw::linear) return x / params_.pc_slope;
  // pc is strictly increasing with pc' >= pc_slope; Newton with a bisection
  // safeguard on the bracket slope*s in [x - amp, x + amp].
  double lo = (x - params_.pc_tanh_amp) / params_.pc_slope;
  double hi = (x + params_.pc_tanh_amp) / params_.pc_slope;
  double s = std::clamp(x / (params_.pc_slope + params_.pc_tanh_amp * params_.pc_tanh_rate), lo, hi);
  for (int it = 0; it < 200; ++it) {
    double f = pc(s) - x;
    if (f == 0.0) return s;
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    double snext = s - f / pc_prime(s);
    if (snext <= lo || snext >= hi) snext = 0.5 * (lo + hi);
    if (snext == s) return s;
    s = snext;
  }
  return s;
}

double FluidModel::mobility(Phase a, double s_alpha) const {
  double s = clamp_z(s_alpha);
  double mu = (a == Phase::gas) ? params_.mu_g : params_.mu_w;
  if (params_.mobility_exponent == 0) return 1.0 / mu;
  return std::pow(s, params_.mobility_exponent) / mu;
}

double FluidModel::total_mobility(double s_g) const {
  return mobility(Phase::wetting, 1.0 - s_g) + mobility(Phase::gas, s_g);
}

double FluidModel::density(Phase a, double p) const {
  if (params_.rho1 == params_.rho0) return params_.rho0;
  double k = (a == Phase::gas) ? params_.rho_steepness_g : params_.rho_steepness_w;
  return params_.rho0 + (params_.rho1 - params_.rho0) * 0.5 * (1.0 + std::tanh(k * p));
}

double FluidModel::density_prime(Phase a, double p) const {
  if (params_.rho1 == params_.rho0) return 0.0;
  double k = (a == Phase::gas) ? params_.rho_steepness_g : params_.rho_steepness_w;
  double c = std::cosh(k * p);
  return (params_.rho1 - params_.rho0) * 0.5 * k / (c * c);
}

double FluidModel::g_int(Phase a, double p) const {
  if (p == 0.0) return 0.0;
  return integrate([&](double z) { return 1.0 / density(a, z); }, 0.0, p,
                   params_.quadrature_points);
}

double FluidModel::big_h(Phase a, double p) const { return density(a, p) * g_int(a, p) - p; }

double FluidModel::interface_density_from_g(Phase a, double p_a, double p_b, double g_a,
                                            double g_b) const {
  double scale = std::max({1.0, std::abs(p_a), std::abs(p_b)});
  double rho;
  if (std::abs(p_a - p_b) < kEqualPressureTol * scale) {
    rho = density(a, 0.5 * (p_a + p_b));  // midpoint keeps the symmetry exact
  } else {
    rho = (p_b - p_a) / (g_b - g_a);
  }
  return std::clamp(rho, params_.rho0, params_.rho1);
}

double FluidModel::interface_density(Phase a, double p_a, double p_b) const {
  return interface_density_from_g(a, p_a, p_b, g_int(a, p_a), g_int(a, p_b));
}

double FluidModel::corrective_ratio(Phase a, double u) const {
  double c = clamp_z(u);
  double m = total_mobility(c);
  if (a == Phase::gas) return mobility(Phase::wetting, 1.0 - c) / m;
  return mobility(Phase::gas, c) / m;
}

double FluidModel::xi_ratio(double u) const {
  double c = clamp_z(u);
  double m = total_mobility(c);
  return std::sqrt(mobility(Phase::wetting, 1.0 - c) * mobility(Phase::gas, c)) / m;
}

double FluidModel::tabulated(const Pchip& tab, Phase ratio_phase, bool is_xi, double s) const {
  if (s >= 0.0 && s <= 1.0) return tab.eval(s);
  // Outside [0,1] the mobility ratio is constant, so the integral continues
  // as ratio(end) * (pc(s) - pc(end)).
  if (s < 0.0) {
    double r = is_xi ? xi_ratio(0.0) : corrective_ratio(ratio_phase, 0.0);
    return r * pc(s);  // pc(0) = 0 and table value at 0 is 0
  }
  double r = is_xi ? xi_ratio(1.0) : corrective_ratio(ratio_phase, 1.0);
  double end = is_xi ? xi1_ : (ratio_phase == Phase::gas ? phat_g1_ : phat_w1_);
  return end + r * (pc(s) - pc(1.0));
}

double FluidModel::corrective(Phase a, double s_g) const {
  return tabulated(a == Phase::gas ? phat_g_ : phat_w_, a, false, s_g);
}

double FluidModel::xi(double s_g) const { return tabulated(xi_, Phase::gas, true, s_g); }

// --- monotone piecewise cubic (Fritsch-Carlson) ------------------------------

void FluidModel::Pchip::build(const std::vector<double>& values, int knots) {
  y = values;
  d.assign(knots, 0.0);
  const int n = knots;
  const double h = 1.0 / (n - 1);
  std::vector<double> slope(n - 1);
  for (int i = 0; i < n - 1; ++i) slope[i] = (y[i + 1] - y[i]) / h;
  for (int i = 1; i < n - 1; ++i) {
    if (slope[i - 1] * slope[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      // harmonic mean keeps the interpolant monotone
      d[i] = 2.0 * slope[i - 1] * slope[i] / (slope[i - 1] + slope[i]);
    }
  }
  d[0] = slope.empty() ? 0.0 : slope[0];
  d[n - 1] = slope.empty() ? 0.0 : slope[n - 2];
  // clip endpoint derivatives to preserve monotonicity
  if (n > 2) {
    if (d[0] * slope[0] <= 0.0)
      d[0] = 0.0;
    else if (std::abs(d[0]) > 3.0 * std::abs(slope[0]))
      d[0] = 3.0 * slope[0];
    if (d[n - 1] * slope[n - 2] <= 0.0)
      d[n - 1] = 0.0;
    else if (std::abs(d[n - 1]) > 3.0 * std::abs(slope[n - 2]))
      d[n - 1] = 3.0 * slope[n - 2];
  }
}

double FluidModel::Pchip::eval(double s) const {
  const int n = static_cast<int>(y.size());
  const double h = 1.0 / (n - 1);
  int i = std::min(n - 2, std::max(0, static_cast<int>(s * (n - 1))));
  double t = (s - i * h) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  double h10 = t3 - 2.0 * t2 + t;
  double h01 = -2.0 * t3 + 3.0 * t2;
  double h11 = t3 - t2;
  return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
}

}  // namespace tpf
