#include "oversmooth/wavelet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace oversmooth {

namespace {

// Roots of a real polynomial c[0] + c[1] x + ... + c[deg] x^deg via the
// companion matrix.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && c[deg] == 0.0) --deg;
  if (deg < 1) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  std::vector<std::complex<double>> roots(deg);
  for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

std::vector<std::complex<double>> poly_mul(const std::vector<std::complex<double>>& a,
                                           const std::vector<std::complex<double>>& b) {
  std::vector<std::complex<double>> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Minimal-phase spectral factor of |m0|^2: initial guess for the filter.
std::vector<double> daubechies_initial(int N) {
  // P(y) = sum_{k<N} binom(N-1+k, k) y^k has no zeros on [0,1].
  std::vector<double> P(N, 0.0);
  double binom = 1.0;
  for (int k = 0; k < N; ++k) {
    P[k] = binom;
    binom *= static_cast<double>(N + k) / (k + 1);
  }

  // Map each root y to z-plane roots of z^2 - (2 - 4y) z + 1 and keep the
  // factor inside the unit circle.
  std::vector<std::complex<double>> q = {1.0};
  for (const auto& y : poly_roots(P)) {
    std::complex<double> b = 2.0 - 4.0 * y;
    std::complex<double> disc = std::sqrt(b * b - 4.0);
    std::complex<double> z1 = (b + disc) / 2.0;
    std::complex<double> z2 = (b - disc) / 2.0;
    std::complex<double> z = std::abs(z1) < std::abs(z2) ? z1 : z2;
    q = poly_mul(q, {-z, 1.0});
  }

  // h(z) = c (1+z)^N q(z), scaled so that sum h = sqrt(2).
  std::vector<std::complex<double>> h = q;
  for (int i = 0; i < N; ++i) h = poly_mul(h, {1.0, 1.0});
  std::vector<double> filter(2 * N);
  double sum = 0.0;
  for (int i = 0; i < 2 * N; ++i) {
    filter[i] = h[i].real();
    sum += filter[i];
  }
  double scale = std::sqrt(2.0) / sum;
  for (double& v : filter) v *= scale;
  return filter;
}

// Newton polish on the defining system: double-shift orthonormality plus
// discrete vanishing moments (with normalized abscissae for conditioning).
std::vector<double> daubechies_polish(std::vector<double> h) {
  const int L = static_cast<int>(h.size());
  const int N = L / 2;
  const double c = L - 1;

  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(h.data(), L);
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::VectorXd F(2 * N);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, L);
    for (int m = 0; m < N; ++m) {
      double g = (m == 0) ? -1.0 : 0.0;
      for (int k = 0; k + 2 * m < L; ++k) {
        g += x[k] * x[k + 2 * m];
        J(m, k) += x[k + 2 * m];
        J(m, k + 2 * m) += x[k];
      }
      F(m) = g;
    }
    for (int m = 0; m < N; ++m) {
      double g = 0.0;
      for (int k = 0; k < L; ++k) {
        double w = (k % 2 ? -1.0 : 1.0) * std::pow(k / c, m);
        g += w * x[k];
        J(N + m, k) = w;
      }
      F(N + m) = g;
    }
    if (F.lpNorm<Eigen::Infinity>() < 1e-14) break;
    Eigen::VectorXd dx = J.fullPivLu().solve(F);
    x -= dx;
  }

  std::vector<double> out(L);
  double sum = 0.0;
  for (int i = 0; i < L; ++i) sum += x[i];
  double sign = sum < 0 ? -1.0 : 1.0;
  for (int i = 0; i < L; ++i) out[i] = sign * x[i];
  // extremal-phase orientation: energy at the front
  if (std::abs(out.front()) < std::abs(out.back())) std::reverse(out.begin(), out.end());
  return out;
}

// Highpass by the alternating-flip rule.
std::vector<double> highpass_of(const std::vector<double>& h) {
  const int L = static_cast<int>(h.size());
  std::vector<double> g(L);
  for (int k = 0; k < L; ++k) g[k] = (k % 2 ? -1.0 : 1.0) * h[L - 1 - k];
  return g;
}

int ceil_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> daubechies_filter(int order) {
  if (order < 1 || order > 10)
    throw Error("unsupported-order", "daubechies order must be in 1..10");
  if (order == 1) {
    double v = 1.0 / std::sqrt(2.0);
    return {v, v};
  }
  return daubechies_polish(daubechies_initial(order));
}

WaveletSpec WaveletSpec::make(int order, int signal_n) {
  if (!is_power_of_two(signal_n))
    throw Error("invalid-parameter", "n: power of two required");
  WaveletSpec w;
  w.order = order;
  w.lowpass = daubechies_filter(order);
  w.coarse_len = std::min(signal_n, ceil_pow2(2 * order));
  w.max_level = 0;
  for (int len = signal_n; len > w.coarse_len; len >>= 1) ++w.max_level;
  return w;
}

CoeffTree analyze(const Signal& f, const WaveletSpec& w) {
  if (f.n() != w.signal_length())
    throw Error("size-mismatch", "signal length does not match wavelet spec");
  const auto& h = w.lowpass;
  const auto g = highpass_of(h);
  const int L = static_cast<int>(h.size());

  CoeffTree tree = CoeffTree::zeros(w.coarse_len, w.max_level);
  std::vector<double> a = f.values;
  for (int j = w.max_level - 1; j >= 0; --j) {
    const int m = static_cast<int>(a.size());
    const int half = m / 2;
    std::vector<double> next(half);
    for (int i = 0; i < half; ++i) {
      double sa = 0.0, sd = 0.0;
      for (int k = 0; k < L; ++k) {
        double v = a[(2 * i + k) % m];
        sa += h[k] * v;
        sd += g[k] * v;
      }
      next[i] = sa;
      tree.detail[j][i] = sd;
    }
    a.swap(next);
  }
  tree.scaling = a;
  return tree;
}

Signal synthesize(const CoeffTree& x, const WaveletSpec& w) {
  if (static_cast<int>(x.scaling.size()) != w.coarse_len || x.max_level != w.max_level)
    throw Error("size-mismatch", "tree shape does not match wavelet spec");
  const auto& h = w.lowpass;
  const auto g = highpass_of(h);
  const int L = static_cast<int>(h.size());

  std::vector<double> a = x.scaling;
  for (int j = 0; j < w.max_level; ++j) {
    const int half = static_cast<int>(a.size());
    const int m = 2 * half;
    if (static_cast<int>(x.detail[j].size()) != half)
      throw Error("size-mismatch", "detail level has unexpected length");
    std::vector<double> next(m, 0.0);
    for (int i = 0; i < half; ++i) {
      double av = a[i], dv = x.detail[j][i];
      for (int k = 0; k < L; ++k) next[(2 * i + k) % m] += h[k] * av + g[k] * dv;
    }
    a.swap(next);
  }
  Signal out = Signal::zeros(Grid::uniform(static_cast<int>(a.size())));
  out.values = std::move(a);
  return out;
}

CoeffTree wraparound_mask(const WaveletSpec& w) {
  const int L = 2 * w.order;
  CoeffTree mask = CoeffTree::zeros(w.coarse_len, w.max_level);
  std::vector<double> flag(w.signal_length(), 0.0);
  for (int j = w.max_level - 1; j >= 0; --j) {
    const int m = static_cast<int>(flag.size());
    const int half = m / 2;
    std::vector<double> next(half, 0.0);
    for (int i = 0; i < half; ++i) {
      double tainted = (2 * i + L - 1 >= m) ? 1.0 : 0.0;
      for (int k = 0; k < L && tainted == 0.0; ++k) tainted = flag[(2 * i + k) % m];
      next[i] = tainted;
      mask.detail[j][i] = tainted;
    }
    flag.swap(next);
  }
  for (std::size_t i = 0; i < mask.scaling.size(); ++i) mask.scaling[i] = flag[i];
  return mask;
}

}  // namespace oversmooth
