#include "oversmooth/norms.hpp"

#include <algorithm>
#include <cmath>

namespace oversmooth {

double vector_lp(std::span<const double> x, double p) {
  if (x.empty()) return 0.0;
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

namespace {

// lp norm over the level-0 pair (scaling block + detail level 0).
double level0_lp(const CoeffTree& x, double p) {
  if (x.max_level == 0) return vector_lp(x.scaling, p);
  if (std::isinf(p))
    return std::max(vector_lp(x.scaling, p), vector_lp(x.detail[0], p));
  if (p == 2.0) {
    double s = 0.0;
    for (double v : x.scaling) s += v * v;
    for (double v : x.detail[0]) s += v * v;
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double v : x.scaling) s += std::abs(v);
    for (double v : x.detail[0]) s += std::abs(v);
    return s;
  }
  double s = 0.0;
  for (double v : x.scaling) s += std::pow(std::abs(v), p);
  for (double v : x.detail[0]) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

double besov_seq_norm(const CoeffTree& x, const SeqNormSpec& spec) {
  const int levels = x.weight_levels();
  if (x.size() == 0) return 0.0;

  std::vector<double> per_level(levels);
  per_level[0] = spec.level_weight(0) * level0_lp(x, spec.p);
  for (int j = 1; j < levels; ++j)
    per_level[j] = spec.level_weight(j) * vector_lp(x.detail[j], spec.p);
  return vector_lp(per_level, spec.q);
}

double lp_norm(const Signal& f, double p) {
  if (!(p > 0.0)) throw Error("invalid-parameter", "p: must be positive");
  if (std::isinf(p)) return vector_lp(f.values, p);
  double s = 0.0;
  if (p == 2.0) {
    for (double v : f.values) s += v * v;
  } else if (p == 1.0) {
    for (double v : f.values) s += std::abs(v);
  } else {
    for (double v : f.values) s += std::pow(std::abs(v), p);
  }
  return std::pow(f.grid.h * s, 1.0 / p);
}

double bv_seminorm_1d(const Signal& f) {
  if (f.n() < 2) throw Error("invalid-parameter", "n: need at least 2 samples");
  double s = 0.0;
  for (int i = 0; i + 1 < f.n(); ++i) s += std::abs(f.values[i + 1] - f.values[i]);
  return s;
}

double weak_lp_quasinorm(std::span<const double> x, double v) {
  if (!(v > 0.0)) throw Error("invalid-parameter", "v: must be positive");
  std::vector<double> mags(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mags[i] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double best = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    if (mags[k] == 0.0) break;
    best = std::max(best, (k + 1) * std::pow(mags[k], v));
  }
  return std::pow(best, 1.0 / v);
}

double besov_error_norm(const Signal& f, const SeqNormSpec& spec, const WaveletSpec& w) {
  return besov_seq_norm(analyze(f, w), spec);
}

}  // namespace oversmooth
