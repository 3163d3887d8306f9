#include "polydelay/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polydelay/error.hpp"
#include "polydelay/tridiagonal.hpp"

namespace polydelay {

RecurrenceCoefficients RecurrenceCoefficients::mapped(double lower, double upper) const {
  const double center = 0.5 * (lower + upper);
  const double half = 0.5 * (upper - lower);
  RecurrenceCoefficients out;
  out.diag.reserve(diag.size());
  out.offdiag.reserve(offdiag.size());
  for (double v : diag) out.diag.push_back(center + half * v);
  for (double v : offdiag) out.offdiag.push_back(half * v);
  out.mu0 = mu0;
  return out;
}

RecurrenceCoefficients jacobi_recurrence(std::size_t m, double alpha, double beta) {
  if (m == 0) throw std::invalid_argument("jacobi_recurrence: m must be positive");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw std::invalid_argument("jacobi_recurrence: exponents must exceed -1");

  RecurrenceCoefficients rc;
  rc.diag.resize(m);
  rc.offdiag.resize(m - 1);
  const double ab = alpha + beta;
  rc.mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                    std::lgamma(ab + 2.0));

  rc.diag[0] = (beta - alpha) / (ab + 2.0);
  for (std::size_t k = 1; k < m; ++k) {
    const double s = 2.0 * static_cast<double>(k) + ab;
    rc.diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + ab;
    double b;
    if (k == 1) {
      b = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    rc.offdiag[k - 1] = std::sqrt(b);
  }
  return rc;
}

QuadratureRule gauss_rule(const RecurrenceCoefficients& rc, double lower, double upper) {
  const std::size_t m = rc.diag.size();
  if (m == 0) throw std::invalid_argument("gauss_rule: empty recurrence");
  for (double v : rc.offdiag) {
    if (!(v > 0.0)) throw std::invalid_argument("gauss_rule: off-diagonal recurrence entries must be positive");
  }

  const TridiagonalEigen eig = symmetric_tridiagonal_eigen(rc.diag, rc.offdiag);
  QuadratureRule rule;
  rule.lower = lower;
  rule.upper = upper;
  rule.exactness = static_cast<int>(2 * m - 1);
  rule.nodes = eig.values;
  rule.weights.resize(m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    rule.weights[k] = rc.mu0 * eig.first_components[k] * eig.first_components[k];
    total += rule.weights[k];
  }
  for (double& w : rule.weights) w /= total;

  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0 && !(rule.nodes[k] > rule.nodes[k - 1])) {
      throw NumericalError("gauss_rule: coincident nodes");
    }
    if (!(rule.nodes[k] > lower && rule.nodes[k] < upper)) {
      throw NumericalError("gauss_rule: node outside the open interval");
    }
    if (!(rule.weights[k] > 0.0)) throw NumericalError("gauss_rule: non-positive weight");
  }
  return rule;
}

QuadratureRule gauss_legendre(std::size_t m, double a, double b) { return gauss_jacobi(m, 0, 0, a, b); }

QuadratureRule gauss_jacobi(std::size_t m, int p, int q, double a, double b) {
  if (m == 0) throw std::invalid_argument("gauss_jacobi: m must be positive");
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("gauss_jacobi: invalid interval, requires a < b");
  }
  if (p < 0 || q < 0) throw std::invalid_argument("gauss_jacobi: exponents must be nonnegative");
  // (tau - a)^p (b - tau)^q  <->  (1 + x)^p (1 - x)^q on [-1, 1]
  const RecurrenceCoefficients rc = jacobi_recurrence(m, static_cast<double>(q), static_cast<double>(p));
  return gauss_rule(rc.mapped(a, b), a, b);
}

double apply(const QuadratureRule& rule, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * f(rule.nodes[k]);
  return sum;
}

bool same_interval(double lo1, double hi1, double lo2, double hi2) {
  const double scale = std::max({1.0, std::fabs(hi1), std::fabs(hi2)});
  return std::fabs(lo1 - lo2) <= 1e-12 * scale && std::fabs(hi1 - hi2) <= 1e-12 * scale;
}

DiscreteDelayDde build_quadrature_dde(const DistributedDelayDde& dde, const QuadratureRule& rule) {
  dde.validate();
  if (rule.size() == 0) throw std::invalid_argument("build_quadrature_dde: empty rule");
  if (!same_interval(rule.lower, rule.upper, dde.weight.lower(), dde.weight.upper())) {
    throw std::invalid_argument("build_quadrature_dde: rule interval does not match the weight interval");
  }

  DiscreteDelayDde out;
  out.dimension = dde.dimension;
  out.delays = rule.nodes;
  out.history = dde.history;
  out.rhs = [d = dde.dimension, weights = rule.weights, comps = dde.delayed_components, f = dde.rhs](
                double t, std::span<const double> y, const DelayedStates& delayed, std::span<double> dydt) {
    std::vector<double> z(d, 0.0);
    for (std::size_t c : comps) {
      double sum = 0.0;
      for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * delayed(c, k);
      z[c] = sum;
    }
    f(t, y, z, dydt);
  };
  return out;
}

}  // namespace polydelay
