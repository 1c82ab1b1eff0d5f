#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tpflow/common.hpp"

namespace tpf {

// Phase indices follow the parity convention |gas| = 0, |wetting| = 1.
enum class Phase : int { gas = 0, wetting = 1 };

inline int parity(Phase a) { return static_cast<int>(a); }
inline double parity_sign(Phase a) { return a == Phase::gas ? 1.0 : -1.0; }  // (-1)^|alpha|
constexpr std::array<Phase, 2> kPhases = {Phase::gas, Phase::wetting};

enum class PcLaw { linear, tanh_blend };

struct FluidParams {
  PcLaw pc_law = PcLaw::linear;
  double pc_slope = 1.0;      // linear coefficient of the capillary law
  double pc_tanh_amp = 0.0;   // tanh_blend: pc(s) = pc_slope*s + amp*tanh(rate*s)
  double pc_tanh_rate = 1.0;
  double mu_g = 1.0;          // dynamic viscosities
  double mu_w = 1.0;
  double rho0 = 500.0;        // density bounds, rho0 <= rho(p) <= rho1
  double rho1 = 1000.0;
  double rho_steepness_g = 0.1;  // inverse-pressure scale of the density law
  double rho_steepness_w = 0.05;
  int mobility_exponent = 2;  // Corey exponent; 0 gives constant mobilities
  int quadrature_points = 32; // Gauss points per unit interval
};

// Two-phase constitutive model: capillary law, densities, Corey mobilities
// and the derived integral functions (g_alpha, H_alpha, corrective pressures,
// xi). Immutable after construction; all evaluations are pure.
class FluidModel {
 public:
  explicit FluidModel(const FluidParams& params);

  const FluidParams& params() const { return params_; }

  // --- capillary law -------------------------------------------------------
  double pc(double s) const;
  double pc_prime(double s) const;
  double pc_inverse(double x) const;

  // coupling G: (p_g, p_w) -> (s_g, s_w)
  std::pair<double, double> coupling(double p_g, double p_w) const {
    double s = pc_inverse(p_g - p_w);
    return {s, 1.0 - s};
  }

  // --- saturation functions ------------------------------------------------
  static double clamp_z(double s) { return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s); }

  // M_alpha of its own phase saturation, constant extension outside [0,1].
  double mobility(Phase a, double s_alpha) const;
  double mobility_eps(Phase a, double s_alpha, double eps) const { return eps + mobility(a, s_alpha); }

  // Total mobility M(s_g) = M_w(1-s_g) + M_g(s_g) and its floor m_0 > 0.
  double total_mobility(double s_g) const;
  double total_mobility_floor() const { return m0_; }

  // --- density law ---------------------------------------------------------
  double density(Phase a, double p) const;
  double density_prime(Phase a, double p) const;

  // g_alpha(p) = int_0^p 1/rho_alpha, H_alpha(p) = rho_alpha(p) g_alpha(p) - p.
  double g_int(Phase a, double p) const;
  double big_h(Phase a, double p) const;

  // Interface density of eq-type 1/rho_AB = mean of 1/rho over [p_A, p_B];
  // evaluated as dp/dg so that rho_AB * (g(p_B) - g(p_A)) = p_B - p_A holds
  // to rounding. Symmetric in its arguments, clamped into [rho0, rho1].
  double interface_density(Phase a, double p_a, double p_b) const;
  // same, with g values the caller already holds (assembly caches g per node)
  double interface_density_from_g(Phase a, double p_a, double p_b, double g_a, double g_b) const;

  // --- global-pressure machinery --------------------------------------------
  // corrective(gas) = p_hat_g, corrective(wetting) = p_hat_w; tabulated on
  // [0,1], closed-form constant-ratio extension outside.
  double corrective(Phase a, double s_g) const;
  std::pair<double, double> global_pressure_split(double s_g) const {
    return {corrective(Phase::gas, s_g), corrective(Phase::wetting, s_g)};
  }
  double xi(double s_g) const;

  // global pressure p = p_g - p_hat_g(s_g)
  double global_pressure(double p_g, double s_g) const { return p_g - corrective(Phase::gas, s_g); }

  // Mobility-ratio integrands (argument clamped to [0,1]):
  // gas -> M_w(1-u)/M(u), wetting -> M_g(u)/M(u); xi ratio sqrt(Mw*Mg)/M.
  double corrective_ratio(Phase a, double u) const;
  double xi_ratio(double u) const;

 private:
  struct Pchip {
    // monotone cubic interpolant on uniform knots over [0,1]
    std::vector<double> y;
    std::vector<double> d;  // derivatives at knots
    double eval(double s) const;
    void build(const std::vector<double>& values, int knots);
  };

  double tabulated(const Pchip& tab, Phase ratio_phase, bool is_xi, double s) const;

  FluidParams params_;
  double m0_ = 0.0;
  Pchip phat_g_, phat_w_, xi_;
  double phat_g1_ = 0.0, phat_w1_ = 0.0, xi1_ = 0.0;  // values at s = 1
};

}  // namespace tpf
