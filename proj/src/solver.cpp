#include "oversmooth/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oversmooth {

std::vector<double> prox_level_weights(const PenaltySpec& penalty, int levels, int d) {
  SeqNormSpec base{penalty.r, penalty.p, penalty.q, d};
  std::vector<double> w(levels);
  for (int j = 0; j < levels; ++j) {
    double bw = base.level_weight(j);
    w[j] = penalty.u == 2.0 ? bw * bw : bw;
  }
  return w;
}

namespace {

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void check_levels(const CoeffTree& x, std::span<const double> level_weights) {
  if (static_cast<int>(level_weights.size()) < x.weight_levels())
    throw Error("size-mismatch", "fewer level weights than tree levels");
}

}  // namespace

CoeffTree prox_weighted_l1(const CoeffTree& x, double lambda,
                           std::span<const double> level_weights) {
  if (lambda < 0.0) throw Error("invalid-parameter", "lambda: must be nonnegative");
  check_levels(x, level_weights);
  CoeffTree out = x;
  double t0 = lambda * level_weights[0];
  for (auto& v : out.scaling) v = soft(v, t0);
  for (int j = 0; j < out.max_level; ++j) {
    double t = lambda * level_weights[j];
    for (auto& v : out.detail[j]) v = soft(v, t);
  }
  return out;
}

CoeffTree prox_block_l1(const CoeffTree& x, double lambda,
                        std::span<const double> level_weights) {
  if (lambda < 0.0) throw Error("invalid-parameter", "lambda: must be nonnegative");
  check_levels(x, level_weights);
  CoeffTree out = x;
  // level-0 block: scaling together with detail level 0
  double n0 = 0.0;
  for (double v : x.scaling) n0 += v * v;
  if (x.max_level > 0)
    for (double v : x.detail[0]) n0 += v * v;
  n0 = std::sqrt(n0);
  double f0 = n0 > 0.0 ? std::max(1.0 - lambda * level_weights[0] / n0, 0.0) : 0.0;
  for (auto& v : out.scaling) v *= f0;
  if (out.max_level > 0)
    for (auto& v : out.detail[0]) v *= f0;
  for (int j = 1; j < out.max_level; ++j) {
    double nj = 0.0;
    for (double v : x.detail[j]) nj += v * v;
    nj = std::sqrt(nj);
    double fj = nj > 0.0 ? std::max(1.0 - lambda * level_weights[j] / nj, 0.0) : 0.0;
    for (auto& v : out.detail[j]) v *= fj;
  }
  return out;
}

CoeffTree prox_l2_sq(const CoeffTree& x, double lambda,
                     std::span<const double> level_weights) {
  if (lambda < 0.0) throw Error("invalid-parameter", "lambda: must be nonnegative");
  check_levels(x, level_weights);
  CoeffTree out = x;
  double f0 = 1.0 / (1.0 + lambda * level_weights[0]);
  for (auto& v : out.scaling) v *= f0;
  if (out.max_level > 0)
    for (auto& v : out.detail[0]) v *= f0;
  for (int j = 1; j < out.max_level; ++j) {
    double fj = 1.0 / (1.0 + lambda * level_weights[j]);
    for (auto& v : out.detail[j]) v *= fj;
  }
  return out;
}

Signal prox_tv_1d(const Signal& f, double lambda) {
  if (lambda < 0.0) throw Error("invalid-parameter", "lambda: must be nonnegative");
  const int n = f.n();
  if (lambda == 0.0 || n < 2) return f;
  const auto& y = f.values;
  Signal out = f;
  auto& z = out.values;

  // Taut string through the tube (prefix sums +- lambda, endpoints pinned):
  // scan from the current anchor keeping the extreme chord slopes to the
  // lower and upper tube; when they cross, the string is forced to bend at
  // the opposite contact, which becomes the new anchor.
  int anchor = 0;
  double offset = 0.0;  // string value at the anchor relative to the prefix sum
  while (anchor < n) {
    double run = 0.0;
    double lo_best = -std::numeric_limits<double>::infinity();
    double up_best = std::numeric_limits<double>::infinity();
    int lo_arg = anchor, up_arg = anchor;
    for (int k = anchor + 1; k <= n; ++k) {
      run += y[k - 1];
      const double m = k - anchor;
      const double pad = k < n ? lambda : 0.0;
      const double lo = (run - offset - pad) / m;
      const double up = (run - offset + pad) / m;
      const bool lo_upd = lo > lo_best;
      const bool up_upd = up < up_best;
      if (lo_upd) {
        lo_best = lo;
        lo_arg = k;
      }
      if (up_upd) {
        up_best = up;
        up_arg = k;
      }
      if (lo_best > up_best) {
        if (lo_upd) {  // lower tube forces a bend at the upper contact
          for (int i = anchor; i < up_arg; ++i) z[i] = up_best;
          anchor = up_arg;
          offset = lambda;
        } else {  // upper tube forces a bend at the lower contact
          for (int i = anchor; i < lo_arg; ++i) z[i] = lo_best;
          anchor = lo_arg;
          offset = -lambda;
        }
        break;
      }
      if (k == n) {  // corridor open to the pinned end: straight segment
        const double slope = (run - offset) / m;
        for (int i = anchor; i < n; ++i) z[i] = slope;
        anchor = n;
        break;
      }
    }
  }
  return out;
}

Signal prox_bv_1d(const Signal& f, double lambda, bool tv_only) {
  Signal out = prox_tv_1d(f, lambda);
  if (!tv_only) {
    double t = lambda * f.grid.h;
    for (auto& v : out.values) v = soft(v, t);
  }
  return out;
}

double penalty_value(const CoeffTree& x, const PenaltySpec& penalty, int d) {
  SeqNormSpec spec{penalty.r, penalty.p, penalty.q, d};
  double nrm = besov_seq_norm(x, spec);
  return penalty.u == 2.0 ? 0.5 * nrm * nrm : std::pow(nrm, penalty.u) / penalty.u;
}

double penalty_value_bv(const Signal& f, bool tv_only) {
  double tv = bv_seminorm_1d(f);
  return tv_only ? tv : lp_norm(f, 1.0) + tv;
}

namespace {

// State representation: sequence penalties act on wavelet coefficients (or on
// the raw sequence when no wavelet is given); the BV penalty acts on values.
struct Repr {
  std::optional<WaveletSpec> wavelet;
  int coarse_len = 0;
  int levels = 0;

  Signal synth(const CoeffTree& x) const {
    if (wavelet) return synthesize(x, *wavelet);
    auto flat = x.flatten();
    Signal s = Signal::zeros(Grid::uniform(static_cast<int>(flat.size())));
    s.values = std::move(flat);
    return s;
  }

  CoeffTree to_tree(const Signal& s) const {
    if (wavelet) return analyze(s, *wavelet);
    return CoeffTree::unflatten(s.values, coarse_len, levels);
  }
};

Repr make_repr(const std::optional<WaveletSpec>& w, int n, const PenaltySpec& penalty) {
  Repr repr;
  if (penalty.kind == PenaltyKind::bv_1d) {
    repr.coarse_len = n;
    repr.levels = 0;
    return repr;
  }
  if (w) {
    if (w->signal_length() != n)
      throw Error("size-mismatch", "wavelet spec does not match data length");
    repr.wavelet = *w;
    repr.coarse_len = w->coarse_len;
    repr.levels = w->max_level;
    return repr;
  }
  repr.coarse_len = std::min(n, 16);
  repr.levels = 0;
  for (int len = n; len > repr.coarse_len; len >>= 1) ++repr.levels;
  return repr;
}

struct PenaltyOps {
  std::function<double(const CoeffTree&)> value;
  std::function<CoeffTree(const CoeffTree&, double)> prox;  // prox of step * penalty
};

PenaltyOps make_penalty_ops(const PenaltySpec& penalty, const Repr& repr, int levels,
                            bool tv_only) {
  PenaltyOps ops;
  if (penalty.kind == PenaltyKind::bv_1d) {
    ops.value = [repr, tv_only](const CoeffTree& x) {
      Signal s = repr.synth(x);
      return penalty_value_bv(s, tv_only);
    };
    ops.prox = [repr, tv_only](const CoeffTree& x, double step) {
      return repr.to_tree(prox_bv_1d(repr.synth(x), step, tv_only));
    };
    return ops;
  }
  auto weights = prox_level_weights(penalty, levels);
  ops.value = [penalty](const CoeffTree& x) { return penalty_value(x, penalty); };
  if (penalty.p == 1.0) {
    ops.prox = [weights](const CoeffTree& x, double step) {
      return prox_weighted_l1(x, step, weights);
    };
  } else if (penalty.u == 1.0) {
    ops.prox = [weights](const CoeffTree& x, double step) {
      return prox_block_l1(x, step, weights);
    };
  } else {
    ops.prox = [weights](const CoeffTree& x, double step) {
      return prox_l2_sq(x, step, weights);
    };
  }
  return ops;
}

Signal project_floor(Signal s, std::optional<double> floor) {
  if (floor)
    for (auto& v : s.values) v = std::max(v, *floor);
  return s;
}

// Deterministic pseudo-random start for the power iteration.
CoeffTree power_seed(const CoeffTree& shape) {
  CoeffTree v = CoeffTree::zeros_like(shape);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return (state >> 11) * (1.0 / 9007199254740992.0) - 0.5;
  };
  for (auto& x : v.scaling) x = next();
  for (auto& lvl : v.detail)
    for (auto& x : lvl) x = next();
  return v;
}

struct InnerResult {
  CoeffTree x;
  double objective;
  long iterations;
  bool converged;
  double step;
};

// Accelerated proximal gradient with adaptive restart and backtracking on
//   fidelity_scale/2 |b - K synth(x)|^2 + penalty(x).
// The accepted-iterate objective is nonincreasing by construction.
InnerResult accelerated_prox_gradient(const Linearization& lin, const Signal& b,
                                      double fidelity_scale, const Repr& repr,
                                      const PenaltyOps& pen, const CoeffTree& x0,
                                      double step, const SolveOptions& opts) {
  auto gradient = [&](const CoeffTree& x) {
    Signal r = lin.apply(repr.synth(x)) - b;
    CoeffTree g = repr.to_tree(lin.adjoint(r));
    return fidelity_scale * g;
  };
  auto objective = [&](const CoeffTree& x) {
    Signal r = b - lin.apply(repr.synth(x));
    double s = 0.0;
    for (double v : r.values) s += v * v;
    return fidelity_scale * 0.5 * s + pen.value(x);
  };
  auto forward = [&](const CoeffTree& from, double st) {
    CoeffTree z = from;
    axpy(z, -st, gradient(from));
    return pen.prox(z, st);
  };

  CoeffTree x = x0;
  CoeffTree y = x0;
  double obj = objective(x);
  double t_acc = 1.0;
  long iters = 0;
  bool converged = false;
  for (int k = 0; k < opts.inner_cap; ++k) {
    ++iters;
    CoeffTree z = forward(y, step);
    double obj_z = objective(z);
    if (obj_z > obj) {
      // momentum overshoot: restart from the accepted iterate
      t_acc = 1.0;
      z = forward(x, step);
      obj_z = objective(z);
      // descent can only fail here if the step overestimates 1/L
      for (int bt = 0; bt < 20 && obj_z > obj; ++bt) {
        step *= 0.5;
        z = forward(x, step);
        obj_z = objective(z);
      }
      if (obj_z > obj) break;  // stalled at numerical precision
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    y = z;
    axpy(y, (t_acc - 1.0) / t_next, z - x);
    t_acc = t_next;
    double change = obj - obj_z;
    double moved = norm_l2(z - x);
    double scale = norm_l2(z);
    x = std::move(z);
    obj = obj_z;
    if (k >= 3 && change <= opts.inner_tol * (1.0 + std::abs(obj)) &&
        moved <= 1e-8 * (1.0 + scale)) {
      converged = true;
      break;
    }
  }
  return InnerResult{std::move(x), obj, iters, converged, step};
}

}  // namespace

double residual_norm(const ForwardOp& op, const Signal& r) {
  double s = 0.0;
  for (double v : r.values) s += v * v;
  return std::sqrt(op.y_weight() * s);
}

SolveReport minimize_tikhonov(const ForwardOp& op, const Signal& g_obs, double alpha,
                              const PenaltySpec& penalty,
                              const std::optional<WaveletSpec>& w,
                              const SolveOptions& opts) {
  if (!(alpha > 0.0)) throw Error("invalid-parameter", "alpha: must be positive");
  const int n = g_obs.n();
  if (op.domain_size() != n) throw Error("size-mismatch", "operator/data length mismatch");

  Repr repr = make_repr(w, n, penalty);
  CoeffTree shape = CoeffTree::zeros(repr.coarse_len, repr.levels);
  PenaltyOps pen = make_penalty_ops(penalty, repr, shape.weight_levels(), opts.tv_only);
  const double fidelity_scale = op.y_weight() / alpha;
  const auto floor = op.coefficient_floor();

  auto true_objective = [&](const CoeffTree& x) {
    Signal c = project_floor(repr.synth(x), floor);
    Signal r = g_obs - op.apply(c);
    double s = 0.0;
    for (double v : r.values) s += v * v;
    return fidelity_scale * 0.5 * s + pen.value(x);
  };

  // start from the constant signal at the data mean, or the caller's iterate
  CoeffTree x;
  if (opts.warm_start && opts.warm_start->same_shape(shape)) {
    x = *opts.warm_start;
  } else {
    double mean = 0.0;
    for (double v : g_obs.values) mean += v;
    mean /= n;
    x = repr.to_tree(Signal::constant(g_obs.grid, mean));
  }

  auto estimate_step = [&](const Linearization& lin) {
    CoeffTree v = power_seed(shape);
    double lam = 0.0;
    for (int it = 0; it < opts.power_iterations; ++it) {
      double nv = norm_l2(v);
      if (nv == 0.0) break;
      v = (1.0 / nv) * v;
      v = repr.to_tree(lin.adjoint(lin.apply(repr.synth(v))));
      lam = norm_l2(v);
    }
    double lipschitz = fidelity_scale * std::max(lam, 1e-300) * 1.05;
    return 1.0 / lipschitz;
  };

  SolveReport report;
  report.objective_trace.clear();

  if (op.linear()) {
    Linearization lin = op.linearize(Signal::zeros(g_obs.grid));
    double step = estimate_step(lin);
    InnerResult res = accelerated_prox_gradient(lin, g_obs, fidelity_scale, repr, pen, x,
                                                step, opts);
    report.minimizer = res.x;
    report.objective_trace.push_back(res.objective);
    report.inner_iterations = res.iterations;
    report.outer_iterations = 1;
    report.converged = res.converged;
    report.status = res.converged ? "converged" : "iteration-cap";
    report.step = res.step;
  } else {
    double obj = true_objective(x);
    report.objective_trace.push_back(obj);
    report.status = "iteration-cap";
    for (int outer = 0; outer < opts.outer_cap; ++outer) {
      ++report.outer_iterations;
      Signal c_k = project_floor(repr.synth(x), floor);
      Linearization lin = op.linearize(c_k);
      // linearized data: g_obs - F(c_k) + K c_k
      Signal b = g_obs - op.apply(c_k) + lin.apply(c_k);
      double step = estimate_step(lin);
      InnerResult res = accelerated_prox_gradient(lin, b, fidelity_scale, repr, pen, x,
                                                  step, opts);
      report.step = res.step;
      report.inner_iterations += res.iterations;

      CoeffTree direction = res.x - x;
      double beta = 1.0;
      bool accepted = false;
      CoeffTree x_try = x;
      double obj_try = obj;
      const double slack = 1e-12 * (1.0 + std::abs(obj));
      for (int ls = 0; ls <= opts.linesearch_cap; ++ls) {
        x_try = x;
        axpy(x_try, beta, direction);
        obj_try = true_objective(x_try);
        if (obj_try <= obj + slack) {
          accepted = true;
          break;
        }
        beta *= 0.5;
      }
      if (!accepted) {
        report.status = "no-descent";
        report.converged = false;
        break;
      }
      x = x_try;
      report.objective_trace.push_back(obj_try);
      double drop = obj - obj_try;
      obj = obj_try;
      if (drop <= opts.outer_tol * (1.0 + std::abs(obj))) {
        report.converged = true;
        report.status = "converged";
        break;
      }
    }
    report.minimizer = x;
  }

  report.reconstruction = repr.synth(report.minimizer);
  if (penalty.kind == PenaltyKind::bv_1d) report.minimizer_signal = report.reconstruction;
  Signal r = g_obs - op.apply(project_floor(report.reconstruction, floor));
  report.residual = residual_norm(op, r);
  return report;
}

SolveReport minimize_tikhonov_whitenoise(const ForwardOp& op, const Signal& g_obs,
                                         double alpha, const PenaltySpec& penalty,
                                         const std::optional<WaveletSpec>& w,
                                         const SolveOptions& opts) {
  SolveReport report = minimize_tikhonov(op, g_obs, alpha, penalty, w, opts);
  // the shifted fidelity differs from the standard one by |g_obs|^2 / (2 alpha)
  double gg = 0.0;
  for (double v : g_obs.values) gg += v * v;
  double shift = op.y_weight() * gg / (2.0 * alpha);
  for (double& t : report.objective_trace) t -= shift;
  return report;
}

}  // namespace oversmooth
