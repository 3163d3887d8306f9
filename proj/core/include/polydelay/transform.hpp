#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polydelay/dde_solver.hpp"
#include "polydelay/distributed_dde.hpp"
#include "polydelay/quadrature.hpp"
#include "polydelay/weight.hpp"

namespace polydelay {

/// Augmented two-delay system equivalent to a polynomially distributed DDE.
///
/// State layout of `assembled`: the d base components, followed by one chain
/// x_0..x_n per delayed component (in the order of base.delayed_components),
/// where x_i(t) = int_a^b y_c(t - tau) tau^i dtau obeys
///   x_i' = a^i y_c(t - a) - b^i y_c(t - b) + i x_{i-1}.
/// When a == 0 the first delay is degenerate and y_c(t - a) is the current state.
struct EquivalentSystem {
  DistributedDelayDde base;  // in the time variable of `assembled`
  std::size_t degree = 0;
  std::size_t aux_count = 0;
  double delay_a = 0.0;
  double delay_b = 0.0;
  /// original time = time_scale * integration time
  double time_scale = 1.0;
  std::vector<double> aux_initial;
  DiscreteDelayDde assembled;

  [[nodiscard]] std::size_t chain_offset(std::size_t chain) const { return base.dimension + chain * (degree + 1); }
};

[[nodiscard]] EquivalentSystem build_equivalent(const DistributedDelayDde& dde);

/// x_i(0) = int_a^b phi(-tau) tau^i dtau for i = 0..n, by the given
/// Gauss-Legendre rule on [a, b]. Throws std::invalid_argument on an interval mismatch.
[[nodiscard]] std::vector<double> aux_initial_values(const std::function<double(double)>& phi,
                                                     const PolynomialWeight& w, const QuadratureRule& rule);

/// Initial chain for component `component` of `history`: closed form for
/// constant histories, 48-point Gauss-Legendre otherwise.
[[nodiscard]] std::vector<double> aux_initial_values(const History& history, std::size_t component,
                                                     const PolynomialWeight& w);

/// x_i* = y* (b^(i+1) - a^(i+1)) / (i + 1) for i = 0..n.
[[nodiscard]] std::vector<double> stationary_aux(double y_star, const PolynomialWeight& w);

/// The problem in scaled time s = t / b: right-hand side multiplied by b,
/// density rescaled to [a/b, 1], history phi(b s).
[[nodiscard]] DistributedDelayDde scale_distributed(const DistributedDelayDde& dde);

/// Equivalent system of the time-scaled problem; delays become {a/b, 1}.
[[nodiscard]] EquivalentSystem scale_system(const EquivalentSystem& sys);

/// (n+1) x (n+1) matrix with sub-diagonal 1, 2, ..., n coupling the auxiliary chain.
struct StructureMatrix {
  std::size_t n = 0;
  Eigen::MatrixXd entries;
};

[[nodiscard]] StructureMatrix structure_matrix(std::size_t n);

/// exp(tA) = sum_{j=0}^n t^j / j! A^j, exact because A^(n+1) = 0.
[[nodiscard]] Eigen::MatrixXd nilpotent_exponential(const StructureMatrix& a, double t);

struct StationaryPoint {
  std::vector<double> y_star;
  /// Concatenated auxiliary chains in EquivalentSystem order.
  std::vector<double> x_star;
};

/// Max-norm residual of f(y*, y*), the constant-solution condition.
[[nodiscard]] double stationary_residual(const DistributedDelayDde& dde, std::span<const double> y_star);

/// Completes y* with its auxiliary values. Throws std::invalid_argument when
/// the residual exceeds 1e-10.
[[nodiscard]] StationaryPoint make_stationary_point(const DistributedDelayDde& dde, std::vector<double> y_star);

/// Damped Newton on f(y, y) = 0 from each guess (minimum-norm steps, so
/// families of equilibria are tolerated). Converged roots with residual
/// <= 1e-12 are returned in guess order, duplicates within 1e-8 removed.
[[nodiscard]] std::vector<StationaryPoint> find_stationary_points(const DistributedDelayDde& dde,
                                                                  std::span<const std::vector<double>> guesses);

}  // namespace polydelay
