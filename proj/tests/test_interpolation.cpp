#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oversmooth/interpolation.hpp"
#include "oversmooth/wavelet.hpp"

using namespace oversmooth;

namespace {

const SeqNormSpec kL2{0.0, 2.0, 2.0, 1};        // plain l2
const SeqNormSpec kL1{0.5, 1.0, 1.0, 1};        // plain l1 (weights collapse at d=1)
const SeqNormSpec kMinus{-2.0, 2.0, 2.0, 1};    // weak side of the jump-truth couple
const SeqNormSpec kStrong11{2.0, 1.0, 1.0, 1};  // strong side, p=q=1
const SeqNormSpec kStrong21{2.0, 2.0, 1.0, 1};  // strong side, p=2 q=1
const SeqNormSpec kStrong22{2.0, 2.0, 2.0, 1};  // strong side, p=q=2

CoeffTree random_tree(int coarse, int levels, std::uint64_t seed, double decay = 1.0) {
  CoeffTree t = CoeffTree::zeros(coarse, levels);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss;
  for (auto& v : t.scaling) v = gauss(gen);
  for (int j = 0; j < levels; ++j) {
    double scale = std::pow(decay, j);
    for (auto& v : t.detail[j]) v = scale * gauss(gen);
  }
  return t;
}

CoeffTree unit_tree() {
  CoeffTree t = CoeffTree::zeros(4, 0);
  t.scaling[0] = 1.0;
  return t;
}

CoeffTree jump_truth_tree(int n = 512) {
  Grid g = Grid::uniform(n);
  WaveletSpec w = WaveletSpec::make(7, n);
  return analyze(make_truth("jump", g), w);
}

}  // namespace

TEST_CASE("K(t, e1) = min(1, t) for the (l2, l1) couple") {
  CoeffTree e1 = unit_tree();
  for (double t : {0.01, 0.2, 0.5, 0.94, 1.0, 1.3, 5.0, 100.0}) {
    KResult res = k_functional(e1, t, kL2, kL1);
    CHECK(res.value == doctest::Approx(std::min(1.0, t)).epsilon(1e-12));
    CHECK(res.value <= res.split_minus + t * res.split_r + 1e-12);
    CHECK(res.split_minus + t * res.split_r <= 2.0 * res.value + 1e-12);
  }
}

TEST_CASE("zero input gives a zero K and minimizer") {
  CoeffTree z = CoeffTree::zeros(4, 2);
  KResult res = k_functional(z, 1.0, kL2, kL1);
  CHECK(res.value == 0.0);
  CHECK(norm_l2(res.minimizer) == 0.0);
}

TEST_CASE("large t saturates at the weak norm with vanishing minimizer") {
  CoeffTree f = random_tree(8, 3, 7);
  double weak = besov_seq_norm(f, kMinus);
  KResult res = k_functional(f, 1e9, kMinus, kStrong11);
  CHECK(res.value == doctest::Approx(weak).epsilon(1e-10));
  CHECK(norm_l2(res.minimizer) <= 1e-12);
}

TEST_CASE("K is bounded by both endpoint insertions") {
  for (int trial = 0; trial < 20; ++trial) {
    CoeffTree f = random_tree(4, 4, 100 + trial, 0.6);
    for (double t : {1e-3, 0.1, 1.0, 10.0}) {
      for (const auto& strong : {kStrong11, kStrong21, kStrong22}) {
        KResult res = k_functional(f, t, kMinus, strong);
        CHECK(res.value <= besov_seq_norm(f, kMinus) * (1 + 1e-12));
        CHECK(res.value <= t * besov_seq_norm(f, strong) * (1 + 1e-12));
        CHECK(res.value <= res.split_minus + t * res.split_r + 1e-12);
        CHECK(res.split_minus + t * res.split_r <= 2.0 * res.value + 1e-10);
      }
    }
  }
}

TEST_CASE("scaling: K(t, lam f) = lam K(t, f) for the exact couple") {
  CoeffTree f = random_tree(4, 3, 55);
  const double lam = 2.75;
  CoeffTree g = lam * f;
  for (double t : {0.05, 0.7, 3.0}) {
    double a = k_functional(f, t, kMinus, kStrong11).value;
    double b = k_functional(g, t, kMinus, kStrong11).value;
    CHECK(b == doctest::Approx(lam * a).epsilon(1e-12));
  }
}

TEST_CASE("K is nondecreasing and concave in t") {
  CoeffTree f = jump_truth_tree();
  auto grid = log_grid(1e-4, 1e2, 20);
  std::vector<double> kv;
  for (double t : grid) kv.push_back(k_functional(f, t, kMinus, kStrong11).value);
  for (std::size_t i = 1; i < kv.size(); ++i) CHECK(kv[i] >= kv[i - 1] - 1e-10);
  for (std::size_t i = 1; i + 1 < kv.size(); ++i) {
    double chord = kv[i - 1] + (kv[i + 1] - kv[i - 1]) * (grid[i] - grid[i - 1]) /
                                   (grid[i + 1] - grid[i - 1]);
    CHECK(kv[i] >= chord - 1e-10);
  }
}

TEST_CASE("breakpoint and fixed-point routes agree on the (2,2)-(1,1) couple") {
  for (int trial = 0; trial < 15; ++trial) {
    CoeffTree f = random_tree(4, 4, 700 + trial, 0.5);
    for (double t : {1e-3, 0.03, 0.4, 2.0, 50.0}) {
      double exact = k_functional(f, t, kMinus, kStrong11, KMethod::breakpoint).value;
      double fixed = k_functional(f, t, kMinus, kStrong11, KMethod::fixed_point).value;
      CHECK(fixed >= exact * (1.0 - 1e-9));
      CHECK(fixed <= exact * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("unsupported couples are rejected") {
  CoeffTree f = random_tree(4, 2, 1);
  CHECK_THROWS_AS(k_functional(f, 1.0, SeqNormSpec{0.0, 1.0, 1.0, 1}, kStrong11), Error);
  CHECK_THROWS_AS(k_functional(f, 1.0, kMinus, SeqNormSpec{2.0, 0.5, 0.5, 1}), Error);
  CHECK_THROWS_AS(k_functional(f, 1.0, kMinus, SeqNormSpec{2.0, 1.0, 2.0, 1}), Error);
  CHECK_THROWS_AS(k_functional(f, 0.0, kMinus, kStrong11), Error);
}

TEST_CASE("smooth approximation: tiny t reproduces f, huge t gives zero") {
  CoeffTree f = random_tree(4, 3, 31, 0.7);
  SmoothnessSpec spec{0.5, 2.0, 2.0, 1, 1.0};

  SmoothApprox tiny = smooth_approximation(f, 1e-9, spec, kMinus, kStrong11,
                                           KGridOptions{1e-9, 1e2, 23});
  CHECK(tiny.err_minus <= 1e-7 * besov_seq_norm(f, kMinus));

  SmoothApprox huge = smooth_approximation(f, 1e9, spec, kMinus, kStrong11,
                                           KGridOptions{1e-4, 1e9, 23});
  CHECK(norm_l2(huge.f_t) == 0.0);
  CHECK(huge.pen_r == 0.0);
}

TEST_CASE("smooth approximation bounds hold on the jump truth across six decades") {
  CoeffTree f = jump_truth_tree();
  SmoothnessSpec spec{0.5, 2.0, 2.0, 1, 1.0};
  const double theta = spec.theta();
  for (double t : log_grid(1e-4, 1e2, 20)) {
    SmoothApprox ap = smooth_approximation(f, t, spec, kMinus, kStrong11);
    CHECK(ap.err_minus <= 2.0 * ap.rho * std::pow(t, theta) * (1 + 1e-12));
    CHECK(ap.pen_r <= 2.0 * ap.rho * std::pow(t, theta - 1.0) * (1 + 1e-12));
  }
}

TEST_CASE("fit_smoothness recovers an exact power law") {
  // trees scaled so that K(t) = t^0.5 over the fitting window: use a
  // synthetic K via a one-coefficient family is not possible, so check the
  // API on e1 where K = min(1, t) instead, in the small-t regime.
  CoeffTree e1 = unit_tree();
  auto small_t = log_grid(1e-6, 1e-2, 12);
  SmoothnessFit fit = fit_smoothness(e1, kL2, kL1, small_t);
  CHECK(fit.theta_hat == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(fit_smoothness(e1, kL2, kL1, log_grid(1e-3, 1e2, 5)), Error);
  CoeffTree z = CoeffTree::zeros(4, 1);
  CHECK_THROWS_AS(fit_smoothness(z, kL2, kL1, small_t), Error);
}

TEST_CASE("fit_smoothness on the jump truth respects the smoothness ceiling") {
  // In the (B^{-2}, b^2_{1,1}) couple the jump truth has smoothness below
  // 6/7, so theta_hat should not exceed (6/7 + 2)/4 materially.
  CoeffTree f = jump_truth_tree(1024);
  SmoothnessFit fit = fit_smoothness(f, kMinus, kStrong11, log_grid(1e-4, 1e2, 25));
  CHECK(fit.theta_hat <= (6.0 / 7.0 + 2.0) / 4.0 + 0.05);
  CHECK(fit.theta_hat > 0.3);  // and it is a genuine scaling regime
  CHECK(fit.rho_hat > 0.0);
}

TEST_CASE("rho_hat dominates the K profile over the whole grid") {
  CoeffTree f = jump_truth_tree();
  auto grid = log_grid(1e-4, 1e2, 16);
  SmoothnessFit fit = fit_smoothness(f, kMinus, kStrong11, grid);
  for (double t : grid) {
    double k = k_functional(f, t, kMinus, kStrong11).value;
    CHECK(k <= fit.rho_hat * std::pow(t, fit.theta_hat) * (1.0 + 1e-12));
  }
}
