#pragma once

#include "oversmooth/core.hpp"
#include "oversmooth/wavelet.hpp"

namespace oversmooth {

/// Parameters of the weighted sequence quasi-norm: level j carries the weight
/// 2^{js} 2^{jd(1/2 - 1/p)} on the lp-norm of its coefficients, combined in
/// lq over levels.  p, q < 1 give quasi-norms; infinity means supremum.
struct SeqNormSpec {
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  int d = 1;

  double level_weight(int j) const {
    double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    return std::exp2(j * s + j * d * (0.5 - inv_p));
  }
};

/// Weighted sequence quasi-norm of a coefficient tree.  The scaling block is
/// assigned the level-0 weight alongside detail level 0.
double besov_seq_norm(const CoeffTree& x, const SeqNormSpec& spec);

/// Discrete Lp norm with uniform mesh weight h (midpoint rule); max for p = inf.
double lp_norm(const Signal& f, double p);

/// Discrete total variation: sum of absolute increments.  The full BV norm is
/// lp_norm(f, 1) + bv_seminorm_1d(f).
double bv_seminorm_1d(const Signal& f);

/// Weak-lp quasi-norm via order statistics: (max_k k |x|_(k)^v)^{1/v} where
/// |x|_(k) is the k-th largest magnitude.
double weak_lp_quasinorm(std::span<const double> x, double v);

/// Sequence norm of the wavelet coefficients of a signal; s may be negative.
double besov_error_norm(const Signal& f, const SeqNormSpec& spec, const WaveletSpec& w);

/// lp norm of a plain vector (no mesh weight), sup for p = inf; helper shared
/// by the sequence norms.
double vector_lp(std::span<const double> x, double p);

}  // namespace oversmooth
