#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "oversmooth/core.hpp"

namespace oversmooth {

/// Frozen derivative K = F'(c) at a fixed linearization point, with the
/// state solve cached so repeated applications stay cheap.
struct Linearization {
  std::function<Signal(const Signal&)> apply;    // dc -> K dc
  std::function<Signal(const Signal&)> adjoint;  // r -> K* r
};

/// Forward operator with Frechet derivative and its adjoint in the weighted
/// data inner product <u,v> = y_weight * sum u_i v_i.
class ForwardOp {
 public:
  virtual ~ForwardOp() = default;

  virtual Signal apply(const Signal& c) const = 0;
  /// Derivative dF(c)[dc]; linear in dc at fixed c.
  virtual Signal derivative(const Signal& c, const Signal& dc) const = 0;
  /// Adjoint of the derivative: <derivative(c,dc), r> = <dc, adjoint(c,r)>
  /// coordinatewise in the y_weight inner product.
  virtual Signal adjoint_derivative(const Signal& c, const Signal& r) const = 0;

  virtual Linearization linearize(const Signal& c) const;

  virtual bool linear() const = 0;
  virtual double y_weight() const = 0;
  virtual int domain_size() const = 0;
  /// Admissibility floor for the coefficient; the solver projects onto it.
  virtual std::optional<double> coefficient_floor() const { return std::nullopt; }

  // two-sided Lipschitz metadata (not used algorithmically)
  std::optional<double> m1, m2, degree_a;
};

/// Solves -u'' + c u = phi on (0,1), u(0) = u(1) = 1, on the midpoint grid by
/// symmetric second-order central differences with the Dirichlet data folded
/// into the boundary rows; O(n) tridiagonal elimination.
Signal solve_bvp(const Signal& c, const Signal& phi);

/// Frechet derivative of the parameter-to-state map: solves
/// -w'' + c w = -dc * u with homogeneous Dirichlet data.
Signal forward_derivative(const Signal& c, const Signal& dc, const Signal& u);

/// Adjoint of the derivative in the h-weighted inner product: solves
/// -z'' + c z = r with homogeneous Dirichlet data and returns -u * z.
Signal forward_adjoint(const Signal& c, const Signal& r, const Signal& u);

/// Elementwise product; the embedding/diagonal sequence-space model.
std::vector<double> diagonal_apply(std::span<const double> x, std::span<const double> weights);

/// Nonlinear parameter-to-state map c -> u for the elliptic problem above,
/// with fixed right-hand side.  Data inner product carries the mesh weight h.
class EllipticBVP final : public ForwardOp {
 public:
  EllipticBVP(Signal rhs, double c_min = 0.0);

  Signal apply(const Signal& c) const override;
  Signal derivative(const Signal& c, const Signal& dc) const override;
  Signal adjoint_derivative(const Signal& c, const Signal& r) const override;
  Linearization linearize(const Signal& c) const override;
  bool linear() const override { return false; }
  double y_weight() const override { return rhs_.grid.h; }
  int domain_size() const override { return rhs_.n(); }
  std::optional<double> coefficient_floor() const override { return c_min_; }

  const Signal& rhs() const { return rhs_; }

 private:
  Signal rhs_;
  double c_min_;
};

/// Diagonal (possibly identity) operator on sequence-space signals with the
/// Euclidean data inner product.
class DiagonalOp final : public ForwardOp {
 public:
  explicit DiagonalOp(std::vector<double> weights);
  static DiagonalOp identity(int n);
  /// Weights 2^{-a j} per weight level of the given tree shape: a finitely
  /// smoothing diagonal model of degree a.
  static DiagonalOp smoothing(const CoeffTree& shape, double a);

  Signal apply(const Signal& c) const override;
  Signal derivative(const Signal& c, const Signal& dc) const override;
  Signal adjoint_derivative(const Signal& c, const Signal& r) const override;
  bool linear() const override { return true; }
  double y_weight() const override { return 1.0; }
  int domain_size() const override { return static_cast<int>(weights_.size()); }

  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

}  // namespace oversmooth
