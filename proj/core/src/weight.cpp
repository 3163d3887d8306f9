#include "polydelay/weight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace polydelay {
namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kNegativityTolerance = 1e-12;
constexpr int kNonnegativityGrid = 1001;
// Multiple of the unit roundoff times the condition estimate that is
// attributed to coefficient rounding rather than to an invalid density.
constexpr double kRoundoffAllowance = 64.0 * std::numeric_limits<double>::epsilon();

long double ipow(long double x, std::size_t k) {
  long double r = 1.0L;
  for (std::size_t i = 0; i < k; ++i) r *= x;
  return r;
}

long double horner(std::span<const double> c, long double x) {
  long double acc = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// int_a^b tau^shift g(tau) dtau, accumulated in extended precision.
long double shifted_moment(std::span<const double> c, double a, double b, std::size_t shift) {
  long double sum = 0.0L;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const std::size_t k = shift + j + 1;
    sum += static_cast<long double>(c[j]) * (ipow(b, k) - ipow(a, k)) / static_cast<long double>(k);
  }
  return sum;
}

long double abs_horner(std::span<const double> c, long double x) {
  long double acc = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * fabsl(x) + fabsl(static_cast<long double>(*it));
  return acc;
}

long double abs_mass(std::span<const double> c, double a, double b) {
  long double sum = 0.0L;
  for (std::size_t j = 0; j < c.size(); ++j) {
    sum += fabsl(static_cast<long double>(c[j])) * (ipow(b, j + 1) - ipow(a, j + 1)) / static_cast<long double>(j + 1);
  }
  return sum;
}

long double binomial(int n, int k) {
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

PolynomialWeight::PolynomialWeight(double lower, double upper, std::vector<double> coeffs)
    : lower_{lower}, upper_{upper}, coeffs_{std::move(coeffs)} {
  if (!(lower_ >= 0.0) || !(upper_ > lower_) || !std::isfinite(upper_)) {
    throw std::invalid_argument("PolynomialWeight: interval requires 0 <= a < b < inf");
  }
  if (coeffs_.empty() || coeffs_.back() == 0.0) {
    throw std::invalid_argument("PolynomialWeight: leading coefficient must be nonzero");
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw std::invalid_argument("PolynomialWeight: non-finite coefficient");
  }
  const long double mass = shifted_moment(coeffs_, lower_, upper_, 0);
  const double mass_tol = std::max(kMassTolerance, kRoundoffAllowance * static_cast<double>(abs_mass(coeffs_, lower_, upper_)));
  if (std::fabs(static_cast<double>(mass) - 1.0) > mass_tol) {
    throw std::invalid_argument("PolynomialWeight: density is not normalised (mass " +
                                std::to_string(static_cast<double>(mass)) + ")");
  }
  const double width = upper_ - lower_;
  for (int k = 0; k < kNonnegativityGrid; ++k) {
    const double tau = k + 1 == kNonnegativityGrid ? upper_ : lower_ + width * k / (kNonnegativityGrid - 1);
    const double tol = std::max(kNegativityTolerance, kRoundoffAllowance * static_cast<double>(abs_horner(coeffs_, tau)));
    if (horner(coeffs_, tau) < -tol) {
      throw std::invalid_argument("PolynomialWeight: density is negative at tau = " + std::to_string(tau));
    }
  }
}

double PolynomialWeight::evaluate(double tau) const {
  if (!(tau >= lower_ && tau <= upper_)) {
    throw std::domain_error("PolynomialWeight::evaluate: tau outside [a, b]");
  }
  return static_cast<double>(horner(coeffs_, tau));
}

double PolynomialWeight::condition() const {
  return static_cast<double>(abs_mass(coeffs_, lower_, upper_));
}

double PolynomialWeight::moment(std::size_t i) const {
  const long double m = shifted_moment(coeffs_, lower_, upper_, i);
  if (!std::isfinite(static_cast<double>(m))) {
    throw std::overflow_error("PolynomialWeight::moment: overflow");
  }
  return static_cast<double>(m);
}

PolynomialWeight PolynomialWeight::rescaled_to_unit() const {
  std::vector<double> scaled(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    scaled[i] = static_cast<double>(static_cast<long double>(coeffs_[i]) * ipow(upper_, i + 1));
  }
  return PolynomialWeight(lower_ / upper_, 1.0, std::move(scaled));
}

PolynomialWeight beta_polynomial(double a, double b, int p, int q) {
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b)) {
    throw std::invalid_argument("beta_polynomial: invalid interval, requires 0 <= a < b");
  }
  if (p < 0 || q < 0) throw std::invalid_argument("beta_polynomial: exponents must be nonnegative");
  if (p + q > kMaxBetaDegree) throw std::invalid_argument("beta_polynomial: degree too large");

  // C = (p+q+1)! / (p! q! (b-a)^(p+q+1)) = (p+q+1) * binom(p+q, p) / (b-a)^(p+q+1)
  const int n = p + q;
  const long double width = static_cast<long double>(b) - a;
  const long double scale = (n + 1) * binomial(n, p) / ipow(width, n + 1);

  // (tau - a)^p = sum_k binom(p,k) tau^k (-a)^(p-k);  (b - tau)^q = sum_l binom(q,l) b^(q-l) (-tau)^l
  std::vector<long double> left(p + 1), right(q + 1);
  for (int k = 0; k <= p; ++k) left[k] = binomial(p, k) * ipow(-a, p - k);
  for (int l = 0; l <= q; ++l) right[l] = binomial(q, l) * ipow(b, q - l) * ((l % 2) ? -1.0L : 1.0L);

  std::vector<long double> product(n + 1, 0.0L);
  for (int k = 0; k <= p; ++k) {
    for (int l = 0; l <= q; ++l) product[k + l] += scale * left[k] * right[l];
  }
  std::vector<double> coeffs(product.begin(), product.end());
  return PolynomialWeight(a, b, std::move(coeffs));
}

}  // namespace polydelay
