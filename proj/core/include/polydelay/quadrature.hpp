#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "polydelay/dde_solver.hpp"
#include "polydelay/distributed_dde.hpp"

namespace polydelay {

/// m-point Gaussian rule for a probability density on [lower, upper]:
/// sum_k weights[k] * f(nodes[k]) ~ int f(tau) g(tau) dtau, exact for
/// polynomials of degree <= exactness = 2m - 1. Weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing, inside (lower, upper)
  std::vector<double> weights;  // positive
  int exactness = 0;
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// Three-term recurrence of the monic orthogonal polynomials, stored as the
/// symmetric Jacobi matrix: diag = alpha_0..alpha_{m-1}, offdiag = sqrt(beta_1..beta_{m-1}).
struct RecurrenceCoefficients {
  std::vector<double> diag;
  std::vector<double> offdiag;
  double mu0 = 1.0;

  /// Coefficients after the affine change of variable [-1, 1] -> [lower, upper].
  [[nodiscard]] RecurrenceCoefficients mapped(double lower, double upper) const;
};

/// Jacobi weight (1 - x)^alpha (1 + x)^beta on [-1, 1], alpha, beta > -1.
[[nodiscard]] RecurrenceCoefficients jacobi_recurrence(std::size_t m, double alpha, double beta);

/// Golub-Welsch: nodes are the Jacobi-matrix eigenvalues, weights mu0 times the
/// squared first eigenvector components, renormalised to unit mass.
[[nodiscard]] QuadratureRule gauss_rule(const RecurrenceCoefficients& rc, double lower, double upper);

/// Rule for the uniform density on [a, b].
[[nodiscard]] QuadratureRule gauss_legendre(std::size_t m, double a, double b);

/// Rule for the beta density C (tau - a)^p (b - tau)^q on [a, b].
[[nodiscard]] QuadratureRule gauss_jacobi(std::size_t m, int p, int q, double a, double b);

[[nodiscard]] double apply(const QuadratureRule& rule, const std::function<double(double)>& f);

/// Replaces the distributed-delay integral by sum_k w_k y(t - tau_k); the
/// discrete delays are the rule's nodes. Throws std::invalid_argument when the
/// rule interval does not match the weight interval.
[[nodiscard]] DiscreteDelayDde build_quadrature_dde(const DistributedDelayDde& dde, const QuadratureRule& rule);

/// True when [lo1, hi1] and [lo2, hi2] agree to 1e-12 relative to their scale.
[[nodiscard]] bool same_interval(double lo1, double hi1, double lo2, double hi2);

}  // namespace polydelay
