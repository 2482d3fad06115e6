#pragma once

#include "oversmooth/solver.hpp"

namespace oversmooth {

/// Exponents of the three regularization-parameter rules for a given
/// smoothness class and penalty power u.
struct RateParameters {
  double u = 1.0;
  SmoothnessSpec spec;

  // deterministic a-priori rule: alpha = c * rho^rho_exp_det * delta^delta_exp
  double delta_exponent() const {
    double th = spec.theta();
    return ((1.0 - th) * u + 2.0 * th) / th;
  }
  double rho_exponent_det() const { return -u / spec.theta(); }

  // stochastic rule: alpha = c_alpha * rho^rho_exp * sigma^sigma_exp
  double sigma_exponent() const {
    return ((2.0 - u) * spec.s + 2.0 * spec.a + u * spec.r) /
           (spec.s + spec.a + spec.d / 2.0);
  }
  double rho_exponent_stoch() const {
    return -(u * (spec.a + spec.r + spec.d / 2.0) - spec.d) /
           (spec.s + spec.a + spec.d / 2.0);
  }

  /// Noise-norm amplification exponent; requires (a+r+d/2) u > d.
  double eta() const {
    double denom = (spec.a + spec.r + spec.d / 2.0) * u - spec.d;
    if (!(denom > 0.0))
      throw Error("invalid-parameter", "eta: requires (a+r+d/2) u > d");
    return u * (2.0 * spec.a + 2.0 * spec.r) / denom;
  }
};

/// alpha = c * rho^{-u/theta} * delta^{((1-theta)u + 2 theta)/theta}.
double apriori_deterministic(double delta, const SmoothnessSpec& spec, double u, double c);

/// alpha = c_alpha * rho^{-(u(a+r+d/2)-d)/(s+a+d/2)}
///               * sigma^{((2-u)s + 2a + ur)/(s+a+d/2)}.
double apriori_stochastic(double sigma, const SmoothnessSpec& spec, double u, double c_alpha);

struct DiscrepancyResult {
  double alpha = 0.0;
  SolveReport report;
};

/// Bisection on log alpha until the residual lands in [c_D delta, C_D delta],
/// using residual monotonicity in alpha.  Throws no-bracket when the residual
/// range cannot straddle the window and non-monotone when the monotonicity
/// assumption is violated materially.
DiscrepancyResult discrepancy_search(const ForwardOp& op, const Signal& g_obs, double delta,
                                     double c_D, double C_D, const PenaltySpec& penalty,
                                     const std::optional<WaveletSpec>& w = std::nullopt,
                                     const SolveOptions& opts = {});

}  // namespace oversmooth
