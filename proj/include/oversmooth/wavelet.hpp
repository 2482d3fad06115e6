#pragma once

#include "oversmooth/core.hpp"

namespace oversmooth {

/// Orthonormal Daubechies wavelet system on [0,1] with periodized boundary
/// handling.  The filter uses the L2-orthonormal convention (sum h = sqrt(2),
/// sum h^2 = 1), so Parseval holds exactly between signal and coefficients.
struct WaveletSpec {
  int order = 7;                 // dbN family order
  std::vector<double> lowpass;   // 2*order taps
  int max_level = 0;             // J: detail levels for the associated n
  int coarse_len = 0;            // coarsest scaling block length (power of two)

  /// Spec for signals of length n (power of two).  The pyramid descends to
  /// the smallest power-of-two block that still covers the filter support.
  static WaveletSpec make(int order, int signal_n);

  int signal_length() const { return coarse_len << max_level; }
};

/// Lowpass filter of the dbN family, length 2*order.
/// order 1 is the Haar filter (1/sqrt2, 1/sqrt2).
std::vector<double> daubechies_filter(int order);

/// Periodized orthogonal wavelet decomposition.  Energy preserving:
/// sum of squared coefficients equals sum of squared samples.
CoeffTree analyze(const Signal& f, const WaveletSpec& w);

/// Exact inverse of analyze; linear in the coefficients.
Signal synthesize(const CoeffTree& x, const WaveletSpec& w);

/// Marks coefficients whose dependency window wraps around the boundary at
/// any pyramid stage.  Interior (unmarked) detail coefficients of a sampled
/// polynomial of degree < order vanish to roundoff.
CoeffTree wraparound_mask(const WaveletSpec& w);

}  // namespace oversmooth
