#include "oversmooth/operators.hpp"

#include <algorithm>
#include <cmath>

namespace oversmooth {

namespace {

// Symmetric tridiagonal Thomas elimination.  diag/off are the matrix bands
// (off has n-1 entries); rhs is overwritten with the solution.
void solve_tridiagonal(std::vector<double> diag, const std::vector<double>& off,
                       std::vector<double>& rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw Error("singular-system", "zero pivot in elimination");
    double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0) throw Error("singular-system", "zero pivot in elimination");
  rhs[n - 1] /= diag[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
}

// Bands of the discretized operator -u'' + c u on the midpoint grid.  The
// Dirichlet boundary enters through the half-cell flux, which makes the first
// and last diagonal entries 3/h^2.
void assemble_bands(const Signal& c, std::vector<double>& diag, std::vector<double>& off) {
  const int n = c.n();
  const double inv_h2 = 1.0 / (c.grid.h * c.grid.h);
  diag.resize(n);
  off.assign(n - 1, -inv_h2);
  for (int i = 0; i < n; ++i) diag[i] = 2.0 * inv_h2 + c.values[i];
  diag[0] += inv_h2;
  diag[n - 1] += inv_h2;
}

void check_coefficient(const Signal& c) {
  for (double v : c.values)
    if (v < 0.0)
      throw Error("nonpositive-coefficient", "coefficient must be nonnegative");
}

}  // namespace

Signal solve_bvp(const Signal& c, const Signal& phi) {
  if (c.n() != phi.n()) throw Error("size-mismatch", "coefficient and rhs lengths differ");
  check_coefficient(c);
  const int n = c.n();
  const double inv_h2 = 1.0 / (c.grid.h * c.grid.h);
  std::vector<double> diag, off;
  assemble_bands(c, diag, off);
  Signal u = phi;
  // boundary values u(0) = u(1) = 1 folded into the first/last equations
  u.values[0] += 2.0 * inv_h2;
  u.values[n - 1] += 2.0 * inv_h2;
  solve_tridiagonal(diag, off, u.values);
  return u;
}

Signal forward_derivative(const Signal& c, const Signal& dc, const Signal& u) {
  if (c.n() != dc.n() || c.n() != u.n())
    throw Error("size-mismatch", "derivative inputs differ in length");
  check_coefficient(c);
  std::vector<double> diag, off;
  assemble_bands(c, diag, off);
  Signal w = Signal::zeros(c.grid);
  for (int i = 0; i < c.n(); ++i) w.values[i] = -dc.values[i] * u.values[i];
  solve_tridiagonal(diag, off, w.values);
  return w;
}

Signal forward_adjoint(const Signal& c, const Signal& r, const Signal& u) {
  if (c.n() != r.n() || c.n() != u.n())
    throw Error("size-mismatch", "adjoint inputs differ in length");
  check_coefficient(c);
  std::vector<double> diag, off;
  assemble_bands(c, diag, off);
  Signal z = r;
  solve_tridiagonal(diag, off, z.values);
  for (int i = 0; i < c.n(); ++i) z.values[i] *= -u.values[i];
  return z;
}

std::vector<double> diagonal_apply(std::span<const double> x, std::span<const double> weights) {
  if (x.size() != weights.size())
    throw Error("size-mismatch", "vector and weights differ in length");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = weights[i] * x[i];
  return out;
}

EllipticBVP::EllipticBVP(Signal rhs, double c_min) : rhs_(std::move(rhs)), c_min_(c_min) {
  for (double v : rhs_.values)
    if (!std::isfinite(v)) throw Error("invalid-parameter", "rhs: values must be finite");
  if (c_min_ < 0.0) throw Error("invalid-parameter", "c_min: must be nonnegative");
}

Linearization ForwardOp::linearize(const Signal& c) const {
  Signal point = c;
  return Linearization{
      [this, point](const Signal& dc) { return derivative(point, dc); },
      [this, point](const Signal& r) { return adjoint_derivative(point, r); }};
}

Signal EllipticBVP::apply(const Signal& c) const { return solve_bvp(c, rhs_); }

Linearization EllipticBVP::linearize(const Signal& c) const {
  Signal point = c;
  Signal state = apply(c);
  return Linearization{
      [point, state](const Signal& dc) { return forward_derivative(point, dc, state); },
      [point, state](const Signal& r) { return forward_adjoint(point, r, state); }};
}

Signal EllipticBVP::derivative(const Signal& c, const Signal& dc) const {
  return forward_derivative(c, dc, apply(c));
}

Signal EllipticBVP::adjoint_derivative(const Signal& c, const Signal& r) const {
  return forward_adjoint(c, r, apply(c));
}

DiagonalOp::DiagonalOp(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error("invalid-parameter", "weights: must not be empty");
}

DiagonalOp DiagonalOp::identity(int n) { return DiagonalOp(std::vector<double>(n, 1.0)); }

DiagonalOp DiagonalOp::smoothing(const CoeffTree& shape, double a) {
  std::vector<double> w;
  w.reserve(shape.size());
  w.insert(w.end(), shape.scaling.size(), 1.0);
  for (int j = 0; j < shape.max_level; ++j)
    w.insert(w.end(), shape.detail[j].size(), std::exp2(-a * j));
  return DiagonalOp(std::move(w));
}

Signal DiagonalOp::apply(const Signal& c) const {
  if (c.n() != domain_size()) throw Error("size-mismatch", "signal length mismatch");
  Signal out = c;
  out.values = diagonal_apply(c.values, weights_);
  return out;
}

Signal DiagonalOp::derivative(const Signal&, const Signal& dc) const { return apply(dc); }

Signal DiagonalOp::adjoint_derivative(const Signal&, const Signal& r) const {
  return apply(r);
}

}  // namespace oversmooth
