#include "oversmooth/param_choice.hpp"

#include <cmath>

namespace oversmooth {

double apriori_deterministic(double delta, const SmoothnessSpec& spec, double u, double c) {
  if (!(delta > 0.0)) throw Error("invalid-parameter", "delta: must be positive");
  if (!(c > 0.0)) throw Error("invalid-parameter", "c: must be positive");
  if (!(u > 0.0)) throw Error("invalid-parameter", "u: must be positive");
  RateParameters rp{u, spec};
  return c * std::pow(spec.rho, rp.rho_exponent_det()) * std::pow(delta, rp.delta_exponent());
}

double apriori_stochastic(double sigma, const SmoothnessSpec& spec, double u, double c_alpha) {
  if (!(sigma > 0.0)) throw Error("invalid-parameter", "sigma: must be positive");
  if (!(c_alpha > 0.0)) throw Error("invalid-parameter", "c_alpha: must be positive");
  if (!(u > 0.0)) throw Error("invalid-parameter", "u: must be positive");
  RateParameters rp{u, spec};
  return c_alpha * std::pow(spec.rho, rp.rho_exponent_stoch()) *
         std::pow(sigma, rp.sigma_exponent());
}

DiscrepancyResult discrepancy_search(const ForwardOp& op, const Signal& g_obs, double delta,
                                     double c_D, double C_D, const PenaltySpec& penalty,
                                     const std::optional<WaveletSpec>& w,
                                     const SolveOptions& opts) {
  if (!(delta > 0.0)) throw Error("invalid-parameter", "delta: must be positive");
  if (!(c_D > 1.0)) throw Error("invalid-parameter", "c_D: must exceed 1");
  if (!(c_D <= C_D)) throw Error("invalid-parameter", "C_D: required c_D <= C_D");

  constexpr double kAlphaMin = 1e-14;
  constexpr double kAlphaMax = 1e14;
  SolveOptions walk_opts = opts;
  auto solve_at = [&](double alpha) {
    SolveReport rep = minimize_tikhonov(op, g_obs, alpha, penalty, w, walk_opts);
    walk_opts.warm_start = rep.minimizer;  // warm-start subsequent solves
    return rep;
  };
  auto in_window = [&](double res) { return res >= c_D * delta && res <= C_D * delta; };

  // geometric walk from a moderate alpha to obtain a bracketing pair
  double alpha = 1.0;
  SolveReport rep = solve_at(alpha);
  if (in_window(rep.residual)) return {alpha, std::move(rep)};

  double lo = 0.0, hi = 0.0, res_lo = 0.0, res_hi = 0.0;
  const double slack = 1e-9 * (1.0 + delta);
  if (rep.residual > C_D * delta) {
    hi = alpha;
    res_hi = rep.residual;
    while (true) {
      alpha /= 8.0;
      if (alpha < kAlphaMin)
        throw Error("no-bracket", "residual never drops below the window");
      rep = solve_at(alpha);
      if (in_window(rep.residual)) return {alpha, std::move(rep)};
      if (rep.residual > res_hi + slack)
        throw Error("non-monotone", "residual grows as alpha shrinks near alpha = " +
                                        std::to_string(alpha));
      if (rep.residual < c_D * delta) {
        lo = alpha;
        res_lo = rep.residual;
        break;
      }
      hi = alpha;
      res_hi = rep.residual;
    }
  } else {
    lo = alpha;
    res_lo = rep.residual;
    while (true) {
      alpha *= 8.0;
      if (alpha > kAlphaMax)
        throw Error("no-bracket", "residual never reaches the window from below");
      rep = solve_at(alpha);
      if (in_window(rep.residual)) return {alpha, std::move(rep)};
      if (rep.residual < res_lo - slack)
        throw Error("non-monotone", "residual drops as alpha grows near alpha = " +
                                        std::to_string(alpha));
      if (rep.residual > C_D * delta) {
        hi = alpha;
        res_hi = rep.residual;
        break;
      }
      lo = alpha;
      res_lo = rep.residual;
    }
  }

  // bisection on log alpha inside the bracket
  for (int it = 0; it < 60; ++it) {
    double mid = std::sqrt(lo * hi);
    rep = solve_at(mid);
    double res = rep.residual;
    if (res < res_lo - slack || res > res_hi + slack)
      throw Error("non-monotone",
                  "residual is not monotone in alpha near alpha = " + std::to_string(mid));
    if (in_window(res)) return {mid, std::move(rep)};
    if (res < c_D * delta) {
      lo = mid;
      res_lo = res;
    } else {
      hi = mid;
      res_hi = res;
    }
  }
  throw Error("no-bracket", "bisection exhausted without entering the window");
}

}  // namespace oversmooth
