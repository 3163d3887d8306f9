#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "polydelay/dde_solver.hpp"
#include "polydelay/weight.hpp"

namespace polydelay {

/// Right-hand side f(t, y(t), z(t)) where z[c] = int_a^b y_c(t - tau) g(tau) dtau
/// for delayed components c and zero for all others.
using DistributedRhs =
    std::function<void(double t, std::span<const double> y, std::span<const double> z, std::span<double> dydt)>;

/// y'(t) = f(t, y(t), int_a^b y(t - tau) g(tau) dtau) with polynomial density g.
struct DistributedDelayDde {
  std::size_t dimension = 0;
  DistributedRhs rhs;
  PolynomialWeight weight;
  std::vector<std::size_t> delayed_components;  // ascending, unique
  History history;

  /// Throws std::invalid_argument on an ill-formed problem.
  void validate() const;
};

}  // namespace polydelay
