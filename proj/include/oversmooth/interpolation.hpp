#pragma once

#include "oversmooth/norms.hpp"

namespace oversmooth {

/// Evaluation of K(t,f) = inf_h |f-h|_minus + t |h|_R together with a
/// near-minimizer.  The recorded split brackets the value:
/// value <= split_minus + t * split_r <= 2 * value.
struct KResult {
  double t = 0.0;
  double value = 0.0;
  CoeffTree minimizer;
  double split_minus = 0.0;  // |f - minimizer|_minus
  double split_r = 0.0;      // |minimizer|_R
};

enum class KMethod {
  automatic,
  breakpoint,   // exact, coordinatewise couple (p_R = q_R = 1)
  fixed_point,  // residual fixed point with closed-form subproblems (q_R = 1)
  path          // stationary-path scan for the Hilbert couple (p_R = q_R = 2)
};

/// K-functional between two weighted sequence quasi-norms.  The weak side
/// must be an l2-type norm (p = q = 2); the strong side supports p_R in
/// {1,2} with q_R in {1, p_R}.  Exact for the coordinatewise couples, within
/// a factor 2 of the infimum otherwise.
KResult k_functional(const CoeffTree& f, double t, const SeqNormSpec& minus,
                     const SeqNormSpec& r_spec, KMethod method = KMethod::automatic);

struct KGridOptions {
  double t_min = 1e-4;
  double t_max = 1e2;
  int count = 25;
};

/// Near-minimizer net member f_t with certified bounds
///   |f - f_t|_minus <= 2 rho t^theta,   |f_t|_R <= 2 rho t^{theta-1},
/// where rho is the supremum of tau^{-theta} K(tau,f) over a log grid
/// (including t itself).
struct SmoothApprox {
  double t = 0.0;
  CoeffTree f_t;
  double rho = 0.0;
  double theta = 0.0;
  double err_minus = 0.0;  // |f - f_t|_minus
  double pen_r = 0.0;      // |f_t|_R
};

SmoothApprox smooth_approximation(const CoeffTree& f, double t, const SmoothnessSpec& spec,
                                  const SeqNormSpec& minus, const SeqNormSpec& r_spec,
                                  const KGridOptions& grid = {});

struct SmoothnessFit {
  double theta_hat = 0.0;
  double rho_hat = 0.0;
};

/// Reclaims the smoothness exponent from the K-functional decay: least-squares
/// slope of log K versus log t over the middle of the grid (the scaling
/// regime), and rho as the grid supremum of t^{-theta_hat} K(t).
SmoothnessFit fit_smoothness(const CoeffTree& f, const SeqNormSpec& minus,
                             const SeqNormSpec& r_spec, std::span<const double> t_grid);

/// Log-spaced grid helper.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace oversmooth
