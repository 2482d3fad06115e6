#include "oversmooth/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oversmooth {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0 && lo < hi) || count < 2)
    throw Error("invalid-parameter", "log grid: need 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return g;
}

namespace {

int coeff_level(const CoeffTree& x, std::size_t flat_index) {
  std::size_t pos = x.scaling.size();
  if (flat_index < pos) return 0;
  for (int j = 0; j < x.max_level; ++j) {
    pos += x.detail[j].size();
    if (flat_index < pos) return j;
  }
  return x.max_level > 0 ? x.max_level - 1 : 0;
}

std::vector<double> per_coefficient_weights(const CoeffTree& shape, const SeqNormSpec& spec) {
  std::vector<double> w(shape.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = spec.level_weight(coeff_level(shape, i));
  return w;
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

struct FlatCouple {
  std::vector<double> f;   // flat coefficients
  std::vector<double> w;   // weak-side weights (l2)
  std::vector<double> v;   // strong-side per-coefficient weights
};

KResult finish(double t, const SeqNormSpec& minus, const SeqNormSpec& r_spec,
               const CoeffTree& f, CoeffTree h) {
  KResult res;
  res.t = t;
  res.split_minus = besov_seq_norm(f - h, minus);
  res.split_r = besov_seq_norm(h, r_spec);
  res.value = res.split_minus + t * res.split_r;
  res.minimizer = std::move(h);
  return res;
}

// Exact minimizer for weighted-l2 vs weighted-l1: the solution is a soft
// threshold z_i = soft(y_i, kappa lambda_i) in transformed coordinates, and
// the optimal kappa solves kappa = t |y - z(kappa)|_2, found by walking the
// sorted breakpoints |y_i| / lambda_i.
KResult k_breakpoint(const CoeffTree& f, double t, const SeqNormSpec& minus,
                     const SeqNormSpec& r_spec) {
  const auto flat = f.flatten();
  const auto w = per_coefficient_weights(f, minus);
  const auto v = per_coefficient_weights(f, r_spec);
  const std::size_t n = flat.size();

  std::vector<double> y(n), lam(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = w[i] * flat[i];
    lam[i] = v[i] / w[i];
    beta[i] = std::abs(y[i]) / lam[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&beta](std::size_t a, std::size_t b) { return beta[a] < beta[b]; });

  // Walk segments of constant active set.  Inactive (thresholded) entries
  // contribute y_i^2 to the residual, active ones kappa^2 lambda_i^2.
  double s2 = 0.0;  // sum of y_i^2 over thresholded entries
  double m2 = 0.0;  // sum of lambda_i^2 over surviving entries
  for (std::size_t i = 0; i < n; ++i) m2 += lam[i] * lam[i];

  double kappa = std::numeric_limits<double>::infinity();  // default: h = 0
  std::size_t idx = 0;
  double seg_lo = 0.0;
  bool found = false;
  while (!found) {
    double seg_hi = idx < n ? beta[order[idx]] : std::numeric_limits<double>::infinity();
    if (t * t * m2 < 1.0) {
      double cand = t * std::sqrt(s2 / (1.0 - t * t * m2));
      if (cand >= seg_lo && cand <= seg_hi) {
        kappa = cand;
        found = true;
        break;
      }
    }
    if (idx >= n) break;
    std::size_t i = order[idx];
    s2 += y[i] * y[i];
    m2 -= lam[i] * lam[i];
    seg_lo = beta[i];
    ++idx;
  }

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i)
    h[i] = std::isinf(kappa) ? 0.0 : soft(y[i], kappa * lam[i]) / w[i];
  CoeffTree ht = CoeffTree::unflatten(h, static_cast<int>(f.scaling.size()), f.max_level);
  return finish(t, minus, r_spec, f, std::move(ht));
}

// Fixed point of R -> |W(f - h(R))|_2 where h(R) minimizes the quadratic
// surrogate 1/2 |W(f-h)|^2 + t R |h|_R.  The subproblem is closed form for
// q_R = 1 (coordinatewise or blockwise soft threshold).  Any fixed point with
// R > 0 is a stationary point of the convex objective, hence global.
KResult k_fixed_point(const CoeffTree& f, double t, const SeqNormSpec& minus,
                      const SeqNormSpec& r_spec) {
  const int levels = f.weight_levels();
  const bool blockwise = r_spec.p == 2.0;

  auto subproblem = [&](double R) {
    CoeffTree h = f;
    auto shrink_block = [&](std::vector<double>& scaling, std::vector<double>* det0,
                            int level) {
      double wl = minus.level_weight(level);
      double vl = r_spec.level_weight(level);
      double c = t * R * vl / (wl * wl);
      double nrm = 0.0;
      for (double x : scaling) nrm += x * x;
      if (det0)
        for (double x : *det0) nrm += x * x;
      nrm = std::sqrt(nrm);
      double factor = nrm > 0.0 ? std::max(1.0 - c / nrm, 0.0) : 0.0;
      for (double& x : scaling) x *= factor;
      if (det0)
        for (double& x : *det0) x *= factor;
    };
    if (blockwise) {
      shrink_block(h.scaling, h.max_level > 0 ? &h.detail[0] : nullptr, 0);
      for (int j = 1; j < levels; ++j) shrink_block(h.detail[j], nullptr, j);
    } else {
      auto shrink_coord = [&](std::vector<double>& vec, int level) {
        double wl = minus.level_weight(level);
        double vl = r_spec.level_weight(level);
        double c = t * R * vl / (wl * wl);
        for (double& x : vec) x = soft(x, c);
      };
      shrink_coord(h.scaling, 0);
      for (int j = 0; j < f.max_level; ++j) shrink_coord(h.detail[j], j);
    }
    return h;
  };

  double best_value = std::numeric_limits<double>::infinity();
  CoeffTree best_h = CoeffTree::zeros_like(f);
  auto consider = [&](const CoeffTree& h) {
    double val = besov_seq_norm(f - h, minus) + t * besov_seq_norm(h, r_spec);
    if (val < best_value) {
      best_value = val;
      best_h = h;
    }
  };
  consider(CoeffTree::zeros_like(f));  // h = 0
  consider(f);                         // h = f

  double R = besov_seq_norm(f, minus);
  for (int it = 0; it < 500 && R > 0.0; ++it) {
    CoeffTree h = subproblem(R);
    consider(h);
    double R_next = besov_seq_norm(f - h, minus);
    bool done = std::abs(R_next - R) <= 1e-8 * (1.0 + R);
    R = R_next;
    if (done) break;
  }
  return finish(t, minus, r_spec, f, std::move(best_h));
}

// Hilbert couple: stationary points lie on the path h_i(mu) =
// f_i w_i^2 / (w_i^2 + mu v_i^2); scan mu on a wide log grid and refine the
// best bracket by golden section.
KResult k_path(const CoeffTree& f, double t, const SeqNormSpec& minus,
               const SeqNormSpec& r_spec) {
  const auto flat = f.flatten();
  const auto w = per_coefficient_weights(f, minus);
  const auto v = per_coefficient_weights(f, r_spec);
  const std::size_t n = flat.size();

  auto value_at = [&](double mu) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = w[i] * w[i] + mu * v[i] * v[i];
      double hi = flat[i] * w[i] * w[i] / d;
      double rw = w[i] * (flat[i] - hi);
      double rv = v[i] * hi;
      a += rw * rw;
      b += rv * rv;
    }
    return std::sqrt(a) + t * std::sqrt(b);
  };

  double ratio_min = std::numeric_limits<double>::infinity();
  double ratio_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double rr = (w[i] * w[i]) / (v[i] * v[i]);
    ratio_min = std::min(ratio_min, rr);
    ratio_max = std::max(ratio_max, rr);
  }
  double lo = ratio_min * 1e-10, hi = ratio_max * 1e10;
  const int grid_n = 600;
  double best_mu = lo, best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_n; ++i) {
    double mu = lo * std::pow(hi / lo, static_cast<double>(i) / (grid_n - 1));
    double val = value_at(mu);
    if (val < best_val) {
      best_val = val;
      best_mu = mu;
    }
  }
  // golden refinement around the best grid point
  double l = best_mu / std::pow(hi / lo, 1.0 / (grid_n - 1));
  double r = best_mu * std::pow(hi / lo, 1.0 / (grid_n - 1));
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = r - gr * (r - l), x2 = l + gr * (r - l);
  double f1 = value_at(x1), f2 = value_at(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      r = x2;
      x2 = x1;
      f2 = f1;
      x1 = r - gr * (r - l);
      f1 = value_at(x1);
    } else {
      l = x1;
      x1 = x2;
      f1 = f2;
      x2 = l + gr * (r - l);
      f2 = value_at(x2);
    }
  }
  double mu = f1 < f2 ? x1 : x2;
  if (value_at(mu) > best_val) mu = best_mu;

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i)
    h[i] = flat[i] * w[i] * w[i] / (w[i] * w[i] + mu * v[i] * v[i]);
  CoeffTree ht = CoeffTree::unflatten(h, static_cast<int>(f.scaling.size()), f.max_level);
  KResult res = finish(t, minus, r_spec, f, std::move(ht));
  // the endpoints h = f and h = 0 are the path limits
  double at_f = t * besov_seq_norm(f, r_spec);
  double at_zero = besov_seq_norm(f, minus);
  if (at_f < res.value) {
    res.value = at_f;
    res.minimizer = f;
    res.split_minus = 0.0;
    res.split_r = besov_seq_norm(f, r_spec);
  }
  if (at_zero < res.value) {
    res.value = at_zero;
    res.minimizer = CoeffTree::zeros_like(f);
    res.split_minus = at_zero;
    res.split_r = 0.0;
  }
  return res;
}

}  // namespace

KResult k_functional(const CoeffTree& f, double t, const SeqNormSpec& minus,
                     const SeqNormSpec& r_spec, KMethod method) {
  if (!(t > 0.0)) throw Error("invalid-parameter", "t: must be positive");
  if (minus.p != 2.0 || minus.q != 2.0)
    throw Error("unsupported-pair", "weak side must have p = q = 2");
  if (r_spec.p < 1.0)
    throw Error("unsupported-pair", "p < 1 penalties have a nonconvex infimum");

  if (f.size() == 0 || besov_seq_norm(f, minus) == 0.0) {
    KResult res;
    res.t = t;
    res.minimizer = CoeffTree::zeros_like(f);
    return res;
  }

  if (method == KMethod::automatic) {
    if (r_spec.p == 1.0 && r_spec.q == 1.0)
      method = KMethod::breakpoint;
    else if (r_spec.p == 2.0 && r_spec.q == 2.0)
      method = KMethod::path;
    else if (r_spec.q == 1.0 && r_spec.p == 2.0)
      method = KMethod::fixed_point;
    else
      throw Error("unsupported-pair",
                  "strong side must have p in {1,2} and q in {1,p}");
  }
  switch (method) {
    case KMethod::breakpoint:
      if (r_spec.p != 1.0 || r_spec.q != 1.0)
        throw Error("unsupported-pair", "breakpoint route needs p = q = 1");
      return k_breakpoint(f, t, minus, r_spec);
    case KMethod::fixed_point:
      if (r_spec.q != 1.0)
        throw Error("unsupported-pair", "fixed-point route needs q = 1");
      return k_fixed_point(f, t, minus, r_spec);
    case KMethod::path:
      if (r_spec.p != 2.0 || r_spec.q != 2.0)
        throw Error("unsupported-pair", "path route needs p = q = 2");
      return k_path(f, t, minus, r_spec);
    default:
      throw Error("unsupported-pair", "no route for this couple");
  }
}

SmoothApprox smooth_approximation(const CoeffTree& f, double t, const SmoothnessSpec& spec,
                                  const SeqNormSpec& minus, const SeqNormSpec& r_spec,
                                  const KGridOptions& grid) {
  if (!(t > 0.0)) throw Error("invalid-parameter", "t: must be positive");
  const double theta = spec.theta();

  auto ts = log_grid(grid.t_min, grid.t_max, grid.count);
  ts.push_back(t);
  double rho = 0.0;
  KResult at_t;
  for (double tau : ts) {
    KResult k = k_functional(f, tau, minus, r_spec);
    rho = std::max(rho, k.value / std::pow(tau, theta));
    if (tau == t) at_t = std::move(k);
  }

  SmoothApprox out;
  out.t = t;
  out.theta = theta;
  out.rho = rho;
  out.err_minus = at_t.split_minus;
  out.pen_r = at_t.split_r;
  out.f_t = std::move(at_t.minimizer);
  return out;
}

SmoothnessFit fit_smoothness(const CoeffTree& f, const SeqNormSpec& minus,
                             const SeqNormSpec& r_spec, std::span<const double> t_grid) {
  const int m = static_cast<int>(t_grid.size());
  if (m < 10) throw Error("invalid-parameter", "t_grid: need at least 10 points");

  std::vector<double> kv(m);
  double kmax = 0.0;
  for (int i = 0; i < m; ++i) {
    kv[i] = k_functional(f, t_grid[i], minus, r_spec).value;
    kmax = std::max(kmax, kv[i]);
  }
  if (kmax <= 0.0) throw Error("degenerate-fit", "K(t,f) vanishes on the grid");

  // restrict to the scaling regime: trim the outer fifths of the grid
  int trim = m / 5;
  int lo = trim, hi = m - trim;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int cnt = 0;
  for (int i = lo; i < hi; ++i) {
    if (kv[i] <= 0.0) continue;
    double x = std::log(t_grid[i]), y = std::log(kv[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) throw Error("degenerate-fit", "not enough positive K values");
  double denom = cnt * sxx - sx * sx;
  if (denom <= 0.0) throw Error("degenerate-fit", "t grid has no spread");

  SmoothnessFit fit;
  fit.theta_hat = (cnt * sxy - sx * sy) / denom;
  for (int i = 0; i < m; ++i)
    fit.rho_hat = std::max(fit.rho_hat, kv[i] / std::pow(t_grid[i], fit.theta_hat));
  return fit;
}

}  // namespace oversmooth
