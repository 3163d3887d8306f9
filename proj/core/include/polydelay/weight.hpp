#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polydelay {

/// Polynomial probability density g(tau) = sum_i coeffs[i] * tau^i on a compact
/// interval [lower, upper] with 0 <= lower < upper.
///
/// Construction validates the density: nonzero leading coefficient, unit mass
/// (1e-12 relative) and nonnegativity on a 1001-point grid. Both checks allow
/// for the rounding of the coefficients themselves, which dominates for
/// high degrees on intervals far from the origin (see condition()).
/// Instances are immutable.
class PolynomialWeight {
 public:
  /// Throws std::invalid_argument if any density invariant is violated.
  PolynomialWeight(double lower, double upper, std::vector<double> coeffs);

  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }
  [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Horner evaluation; throws std::domain_error outside [lower, upper].
  [[nodiscard]] double evaluate(double tau) const;

  /// Closed-form moment int_a^b tau^i g(tau) dtau.
  [[nodiscard]] double moment(std::size_t i) const;

  /// sum_i |coeffs[i]| (b^(i+1) - a^(i+1)) / (i+1), the amplification of
  /// coefficient rounding in moment(0). Equals 1 for densities without
  /// cancellation.
  [[nodiscard]] double condition() const;

  /// Density of tau / upper on [lower / upper, 1], i.e. upper * g(upper * s).
  [[nodiscard]] PolynomialWeight rescaled_to_unit() const;

 private:
  double lower_;
  double upper_;
  std::vector<double> coeffs_;
};

/// Largest supported p + q for beta_polynomial.
inline constexpr int kMaxBetaDegree = 30;

/// Beta density C (tau - a)^p (b - tau)^q on [a, b], expanded in monomials.
/// Throws std::invalid_argument for b <= a, a < 0, negative exponents, or
/// p + q > kMaxBetaDegree ("degree too large").
[[nodiscard]] PolynomialWeight beta_polynomial(double a, double b, int p, int q);

/// Uniform density 1 / (b - a) on [a, b].
[[nodiscard]] inline PolynomialWeight uniform_weight(double a, double b) {
  return beta_polynomial(a, b, 0, 0);
}

}  // namespace polydelay
