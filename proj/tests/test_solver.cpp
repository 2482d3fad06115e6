#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oversmooth/solver.hpp"

using namespace oversmooth;

namespace {

std::mt19937_64 rng(20240801);

double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

Signal random_signal(int n, double scale = 1.0) {
  std::normal_distribution<double> gauss;
  Signal s = Signal::zeros(Grid::uniform(n));
  for (auto& v : s.values) v = scale * gauss(rng);
  return s;
}

CoeffTree random_tree(int coarse, int levels, double scale = 1.0) {
  CoeffTree t = CoeffTree::zeros(coarse, levels);
  std::normal_distribution<double> gauss;
  for (auto& v : t.scaling) v = scale * gauss(rng);
  for (auto& lvl : t.detail)
    for (auto& v : lvl) v = scale * gauss(rng);
  return t;
}

// scalar brute force: argmin over a fine grid of 1/2 (z-x)^2 + lam w |z|
double scalar_l1_oracle(double x, double lamw) {
  double best_z = 0.0, best = 0.5 * x * x;
  double span = std::abs(x) + 1.0;
  for (int i = -40000; i <= 40000; ++i) {
    double z = span * i / 40000.0;
    double val = 0.5 * (z - x) * (z - x) + lamw * std::abs(z);
    if (val < best) {
      best = val;
      best_z = z;
    }
  }
  return best_z;
}

// projected gradient on the dual of the block prox:
// min_z 1/2|z-x|^2 + c|z|_2  <=>  z = x - proj_{|.|<=c}(dual)
std::vector<double> block_oracle(const std::vector<double>& x, double c) {
  // projected gradient on p: min_p 1/2|x - p|^2 s.t. |p|_2 <= c
  std::vector<double> p(x.size(), 0.0);
  for (int it = 0; it < 20000; ++it) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      p[i] += 0.5 * (x[i] - p[i]);
      nrm += p[i] * p[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm > c)
      for (auto& v : p) v *= c / nrm;
  }
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - p[i];
  return z;
}

// Chambolle-type dual projection for the TV prox:
// z = v - D^T p with p the projection iterate, |p|_inf <= lam.
Signal tv_dual_oracle(const Signal& v, double lam, int iters = 60000) {
  const int n = v.n();
  std::vector<double> p(n - 1, 0.0);
  Signal z = v;
  for (int it = 0; it < iters; ++it) {
    // z = v - D^T p
    for (int i = 0; i < n; ++i) {
      double dtp = 0.0;
      if (i < n - 1) dtp -= p[i];
      if (i > 0) dtp += p[i - 1];
      z.values[i] = v.values[i] - dtp;
    }
    for (int i = 0; i < n - 1; ++i) {
      p[i] += 0.25 * (z.values[i + 1] - z.values[i]);
      p[i] = std::clamp(p[i], -lam, lam);
    }
  }
  for (int i = 0; i < n; ++i) {
    double dtp = 0.0;
    if (i < n - 1) dtp -= p[i];
    if (i > 0) dtp += p[i - 1];
    z.values[i] = v.values[i] - dtp;
  }
  return z;
}

// consensus ADMM for 1/2|z-v|^2 + c1 |z|_1 + c2 |Dz|_1 (independent route
// for the composite BV prox)
Signal bv_admm_oracle(const Signal& v, double c1, double c2, int iters = 20000) {
  const int n = v.n();
  const double rho = 1.0;
  std::vector<double> z(v.values), a(n, 0.0), b(n - 1, 0.0), ua(n, 0.0), ub(n - 1, 0.0);
  // tridiagonal factor of (1 + rho) I + rho D^T D
  std::vector<double> diag(n), off(n - 1, -rho);
  auto soft_s = [](double x, double t) {
    return x > t ? x - t : (x < -t ? x + t : 0.0);
  };
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < n; ++i) {
      double d = 1.0 + rho;
      if (i > 0) d += rho;
      if (i < n - 1) d += rho;
      diag[i] = d;
      double rhs = v.values[i] + rho * (a[i] - ua[i]);
      if (i < n - 1) rhs -= rho * (b[i] - ub[i]);
      if (i > 0) rhs += rho * (b[i - 1] - ub[i - 1]);
      z[i] = rhs;
    }
    // Thomas solve in place
    std::vector<double> dd(diag), cc(off);
    for (int i = 1; i < n; ++i) {
      double m = cc[i - 1] / dd[i - 1];
      dd[i] -= m * cc[i - 1];
      z[i] -= m * z[i - 1];
    }
    z[n - 1] /= dd[n - 1];
    for (int i = n - 2; i >= 0; --i) z[i] = (z[i] - cc[i] * z[i + 1]) / dd[i];

    for (int i = 0; i < n; ++i) a[i] = soft_s(z[i] + ua[i], c1 / rho);
    for (int i = 0; i < n - 1; ++i) b[i] = soft_s(z[i + 1] - z[i] + ub[i], c2 / rho);
    for (int i = 0; i < n; ++i) ua[i] += z[i] - a[i];
    for (int i = 0; i < n - 1; ++i) ub[i] += z[i + 1] - z[i] - b[i];
  }
  Signal out = v;
  out.values = a;  // the l1 block carries the constrained copy
  return out;
}

std::vector<double> weights_for(const PenaltySpec& pen, int levels) {
  return prox_level_weights(pen, levels);
}

}  // namespace

TEST_CASE("weighted l1 prox: spec examples") {
  CoeffTree t = CoeffTree::zeros(1, 0);
  t.scaling[0] = 3.0;
  std::vector<double> w = {1.0};
  CHECK(prox_weighted_l1(t, 1.0, w).scaling[0] == doctest::Approx(2.0));
  t.scaling[0] = 0.8;
  CHECK(prox_weighted_l1(t, 1.0, w).scaling[0] == 0.0);
  t.scaling[0] = -0.5;
  CHECK(prox_weighted_l1(t, 0.0, w).scaling[0] == -0.5);
}

TEST_CASE("weighted l1 prox matches the scalar brute-force oracle") {
  for (int trial = 0; trial < 100; ++trial) {
    double x = uniform(-3.0, 3.0);
    double lam = uniform(0.0, 1.5);
    double w = uniform(0.1, 3.0);
    CoeffTree t = CoeffTree::zeros(1, 0);
    t.scaling[0] = x;
    std::vector<double> ws = {w};
    double got = prox_weighted_l1(t, lam, ws).scaling[0];
    CHECK(std::abs(got - scalar_l1_oracle(x, lam * w)) <= 1e-4);
    CHECK(std::abs(got - (std::abs(x) > lam * w ? (x > 0 ? x - lam * w : x + lam * w) : 0.0)) <=
          1e-12);
  }
}

TEST_CASE("block l1 prox: zeroing, scalar reduction, oracle") {
  PenaltySpec pen{2.0, 2.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  // a small level gets zeroed when its norm is below the threshold
  CoeffTree t = CoeffTree::zeros(4, 2);
  for (auto& v : t.detail[1]) v = 0.01;
  auto w = weights_for(pen, t.weight_levels());
  CoeffTree out = prox_block_l1(t, 1.0, w);
  for (double v : out.detail[1]) CHECK(v == 0.0);

  // single-coefficient block reduces to the scalar soft threshold
  CoeffTree s = CoeffTree::zeros(1, 0);
  s.scaling[0] = 2.0;
  std::vector<double> ones = {1.0};
  CHECK(prox_block_l1(s, 0.5, ones).scaling[0] == doctest::Approx(1.5));

  // random 8-vectors against the projected-gradient oracle
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(8);
    for (auto& v : x) v = uniform(-2.0, 2.0);
    double c = uniform(0.0, 3.0);
    CoeffTree blk = CoeffTree::zeros(8, 0);
    blk.scaling = x;
    auto got = prox_block_l1(blk, c, ones).scaling;
    auto want = block_oracle(x, c);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-6);
  }
}

TEST_CASE("tv prox: identity at zero, mean under huge lambda") {
  Signal f = random_signal(64);
  Signal same = prox_tv_1d(f, 0.0);
  for (int i = 0; i < 64; ++i) CHECK(same.values[i] == f.values[i]);

  Signal flat = prox_tv_1d(f, 1e6);
  double mean = 0.0;
  for (double v : f.values) mean += v;
  mean /= 64;
  for (double v : flat.values) CHECK(v == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("tv prox matches the dual-projection oracle on random signals") {
  for (int trial = 0; trial < 100; ++trial) {
    int n = 64;
    Signal f = random_signal(n);
    double lam = uniform(0.01, 2.0);
    Signal got = prox_tv_1d(f, lam);
    Signal want = tv_dual_oracle(f, lam);
    for (int i = 0; i < n; ++i) CHECK(std::abs(got.values[i] - want.values[i]) <= 1e-6);
  }
}

TEST_CASE("tv prox objective is never beaten by nearby candidates") {
  auto objective = [](const Signal& z, const Signal& f, double lam) {
    double v = 0.0;
    for (int i = 0; i < f.n(); ++i) v += 0.5 * (z.values[i] - f.values[i]) * (z.values[i] - f.values[i]);
    return v + lam * bv_seminorm_1d(z);
  };
  for (int trial = 0; trial < 50; ++trial) {
    Signal f = random_signal(32);
    double lam = uniform(0.05, 1.0);
    Signal z = prox_tv_1d(f, lam);
    double base = objective(z, f, lam);
    std::normal_distribution<double> gauss;
    for (int probe = 0; probe < 30; ++probe) {
      Signal zp = z;
      for (auto& v : zp.values) v += 1e-3 * gauss(rng);
      CHECK(objective(zp, f, lam) >= base - 1e-12);
    }
  }
}

TEST_CASE("bv prox (tv + weighted l1 shift) matches the admm oracle") {
  for (int trial = 0; trial < 25; ++trial) {
    int n = 48;
    Signal f = random_signal(n);
    double lam = uniform(0.02, 1.0);
    Signal got = prox_bv_1d(f, lam);
    Signal want = bv_admm_oracle(f, lam * f.grid.h, lam);
    for (int i = 0; i < n; ++i) CHECK(std::abs(got.values[i] - want.values[i]) <= 1e-5);
  }
}

TEST_CASE("l2 squared prox closed form") {
  CoeffTree t = CoeffTree::zeros(2, 1);
  t.scaling[0] = 4.0;
  t.detail[0][1] = -2.0;
  std::vector<double> w = {1.0};
  CoeffTree same = prox_l2_sq(t, 0.0, w);
  CHECK(same.scaling[0] == 4.0);
  CoeffTree out = prox_l2_sq(t, 3.0, w);
  CHECK(out.scaling[0] == doctest::Approx(1.0));
  CHECK(out.detail[0][1] == doctest::Approx(-0.5));
  // 1d quadratic argmin oracle: z = x / (1 + lam w)
  for (int trial = 0; trial < 100; ++trial) {
    double x = uniform(-4.0, 4.0), lam = uniform(0.0, 2.0), wj = uniform(0.2, 5.0);
    CoeffTree u = CoeffTree::zeros(1, 0);
    u.scaling[0] = x;
    std::vector<double> ws = {wj};
    double best_z = 0.0, best = 1e300;
    for (int i = -20000; i <= 20000; ++i) {
      double z = 5.0 * i / 20000.0;
      double val = 0.5 * (z - x) * (z - x) + 0.5 * lam * wj * z * z;
      if (val < best) {
        best = val;
        best_z = z;
      }
    }
    CHECK(std::abs(prox_l2_sq(u, lam, ws).scaling[0] - best_z) <= 1e-3);
  }
}

TEST_CASE("prox nonexpansiveness on random pairs") {
  PenaltySpec l1{2.0, 1.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  PenaltySpec bl{2.0, 2.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  PenaltySpec sq{2.0, 2.0, 2.0, 2.0, PenaltyKind::besov_sequence};
  for (int trial = 0; trial < 40; ++trial) {
    CoeffTree x = random_tree(4, 3);
    CoeffTree y = random_tree(4, 3);
    double lam = uniform(0.0, 2.0);
    double dxy = norm_l2(x - y);
    auto wl1 = weights_for(l1, x.weight_levels());
    auto wbl = weights_for(bl, x.weight_levels());
    auto wsq = weights_for(sq, x.weight_levels());
    CHECK(norm_l2(prox_weighted_l1(x, lam, wl1) - prox_weighted_l1(y, lam, wl1)) <=
          dxy * (1 + 1e-12));
    CHECK(norm_l2(prox_block_l1(x, lam, wbl) - prox_block_l1(y, lam, wbl)) <=
          dxy * (1 + 1e-12));
    CHECK(norm_l2(prox_l2_sq(x, lam, wsq) - prox_l2_sq(y, lam, wsq)) <= dxy * (1 + 1e-12));

    Signal fs = random_signal(32);
    Signal gs = random_signal(32);
    double dfg = 0.0;
    Signal pf = prox_tv_1d(fs, lam), pg = prox_tv_1d(gs, lam);
    double dpq = 0.0;
    for (int i = 0; i < 32; ++i) {
      dfg += (fs.values[i] - gs.values[i]) * (fs.values[i] - gs.values[i]);
      dpq += (pf.values[i] - pg.values[i]) * (pf.values[i] - pg.values[i]);
    }
    CHECK(std::sqrt(dpq) <= std::sqrt(dfg) * (1 + 1e-10));
  }
}

TEST_CASE("identity operator with quadratic penalty has the closed form g/(1+alpha)") {
  const int n = 64;
  DiagonalOp op = DiagonalOp::identity(n);
  PenaltySpec pen{0.0, 2.0, 2.0, 2.0, PenaltyKind::besov_sequence};
  pen.r = 0.0;  // flat weights: plain squared l2 penalty
  Signal g = random_signal(n);
  for (double alpha : {0.1, 1.0, 10.0}) {
    SolveReport rep = minimize_tikhonov(op, g, alpha, pen);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(rep.reconstruction.values[i] - g.values[i] / (1.0 + alpha)) <= 1e-8);
    CHECK(rep.converged);
    // residual of the closed form: alpha/(1+alpha) |g|
    double gn = 0.0;
    for (double v : g.values) gn += v * v;
    gn = std::sqrt(gn);
    CHECK(rep.residual == doctest::Approx(alpha / (1.0 + alpha) * gn).epsilon(1e-7));
  }
}

TEST_CASE("alpha to zero recovers the data for the identity operator") {
  const int n = 32;
  DiagonalOp op = DiagonalOp::identity(n);
  PenaltySpec pen{0.5, 1.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  Signal g = random_signal(n);
  SolveReport rep = minimize_tikhonov(op, g, 1e-10, pen);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(rep.reconstruction.values[i] - g.values[i]) <= 1e-6);
}

TEST_CASE("fixed-point optimality at the linear minimizer") {
  const int n = 64;
  CoeffTree shape = CoeffTree::zeros(16, 2);
  DiagonalOp op = DiagonalOp::smoothing(shape, 1.0);
  PenaltySpec pen{1.0, 1.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  Signal g = random_signal(n);
  SolveReport rep = minimize_tikhonov(op, g, 0.05, pen);
  REQUIRE(rep.converged);

  // one more forward-backward application must (almost) fix the minimizer
  auto weights = prox_level_weights(pen, shape.weight_levels());
  CoeffTree x = rep.minimizer;
  Signal sx = Signal::zeros(Grid::uniform(n));
  sx.values = x.flatten();
  Signal r = op.apply(sx) - g;
  Signal ar = op.adjoint_derivative(sx, r);
  CoeffTree grad = CoeffTree::unflatten(ar.values, 16, 2);
  CoeffTree y = x;
  axpy(y, -rep.step / 0.05, grad);
  CoeffTree z = prox_weighted_l1(y, rep.step, weights);
  CHECK(norm_l2(x - z) <= 1e-6 * (1.0 + norm_l2(x)));
}

TEST_CASE("white-noise entry point returns the same minimizer and shifted objective") {
  const int n = 64;
  DiagonalOp op = DiagonalOp::identity(n);
  PenaltySpec pen{0.5, 1.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  Signal g = random_signal(n);
  double alpha = 0.3;
  SolveReport a = minimize_tikhonov(op, g, alpha, pen);
  SolveReport b = minimize_tikhonov_whitenoise(op, g, alpha, pen);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(a.reconstruction.values[i] - b.reconstruction.values[i]) <= 1e-10);

  // S_g(F(fhat)) + 1/2 |g|^2 equals the standard fidelity at fhat
  double gg = 0.0, fid = 0.0, sg = 0.0;
  for (int i = 0; i < n; ++i) {
    double gv = g.values[i], fv = a.reconstruction.values[i];
    gg += gv * gv;
    fid += 0.5 * (gv - fv) * (gv - fv);
    sg += 0.5 * fv * fv - gv * fv;
  }
  CHECK(std::abs((sg + 0.5 * gg) - fid) <= 1e-10 * (1.0 + std::abs(fid)));

  // zero data with a quadratic penalty gives the zero minimizer
  PenaltySpec sq{0.0, 2.0, 2.0, 2.0, PenaltyKind::besov_sequence};
  SolveReport z = minimize_tikhonov_whitenoise(op, Signal::zeros(Grid::uniform(n)), 1.0, sq);
  for (double v : z.reconstruction.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("tv-mode solver equals the closed-form prox for the identity operator") {
  const int n = 64;
  DiagonalOp op = DiagonalOp::identity(n);
  PenaltySpec pen{1.0, 1.0, 1.0, 1.0, PenaltyKind::bv_1d};
  Signal g = random_signal(n);
  double alpha = 0.2;
  SolveReport rep = minimize_tikhonov(op, g, alpha, pen);
  Signal want = prox_bv_1d(g, alpha);
  for (int i = 0; i < n; ++i)
    CHECK(std::abs(rep.reconstruction.values[i] - want.values[i]) <= 1e-7);
  REQUIRE(rep.minimizer_signal.has_value());
}

TEST_CASE("residual is nondecreasing in alpha for convex penalties") {
  const int n = 128;
  CoeffTree shape = CoeffTree::zeros(16, 3);
  DiagonalOp op = DiagonalOp::smoothing(shape, 1.5);
  Signal truth = Signal::zeros(Grid::uniform(n));
  std::normal_distribution<double> gauss;
  for (auto& v : truth.values) v = gauss(rng);
  Signal g = op.apply(truth);
  for (auto& v : g.values) v += 0.01 * gauss(rng);

  for (PenaltySpec pen : {PenaltySpec{1.0, 1.0, 1.0, 1.0, PenaltyKind::besov_sequence},
                          PenaltySpec{1.0, 2.0, 2.0, 2.0, PenaltyKind::besov_sequence}}) {
    double prev = -1.0;
    for (double alpha = 1e-6; alpha <= 1e3; alpha *= 10.0) {
      SolveReport rep = minimize_tikhonov(op, g, alpha, pen);
      CHECK(rep.residual >= prev - 1e-7);
      prev = rep.residual;
    }
  }
}

TEST_CASE("elliptic solve: monotone trace and minimizer property on exact data") {
  const int n = 256;
  Grid grid = Grid::uniform(n);
  EllipticBVP op(make_rhs("one", grid));
  WaveletSpec w = WaveletSpec::make(7, n);
  Signal truth = make_truth("jump", grid);
  Signal g = op.apply(truth);
  PenaltySpec pen{2.0, 2.0, 1.0, 1.0, PenaltyKind::besov_sequence};
  double alpha = 1e-5;

  SolveReport rep = minimize_tikhonov(op, g, alpha, pen, w);
  for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
    CHECK(rep.objective_trace[i] <=
          rep.objective_trace[i - 1] + 1e-12 * (1.0 + std::abs(rep.objective_trace[i - 1])));

  // the solver's objective does not exceed the objective at the truth
  double truth_obj = penalty_value(analyze(truth, w), pen);
  CHECK(rep.objective_trace.back() <= truth_obj * (1.0 + 1e-9));

  // residual recomputed from the minimizer matches the report
  Signal r = g - op.apply(rep.reconstruction);
  CHECK(std::abs(residual_norm(op, r) - rep.residual) <= 1e-10 * (1.0 + rep.residual));
}
