#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "polydelay/dde_solver.hpp"
#include "polydelay/distributed_dde.hpp"
#include "polydelay/transform.hpp"
#include "polydelay/weight.hpp"

namespace polydelay::sir {

inline constexpr std::size_t kSusceptible = 0;
inline constexpr std::size_t kInfected = 1;
inline constexpr std::size_t kRecovered = 2;

/// SIR with temporary immunity whose loss is distributed with density g:
///   S' = -sigma S I + theta int I(t - tau) g
///   I' =  sigma S I - theta I
///   R' =  theta I   - theta int I(t - tau) g
/// with constant history (S0, I0, R0) for t <= 0.
struct Parameters {
  double sigma;
  double theta;
  PolynomialWeight weight;
  std::array<double, 3> y0;

  /// Throws std::invalid_argument unless sigma, theta > 0, y0 >= 0 and
  /// S0 + I0 + R0 = 1 within 1e-14.
  void validate() const;
};

/// sigma = 0.1, theta = 0.05, beta density p = q = 2 on [a, b], y0 = (0.99, 0.01, 0).
[[nodiscard]] Parameters reference_parameters(double a, double b);

[[nodiscard]] DistributedDelayDde distributed(const Parameters& params);
[[nodiscard]] EquivalentSystem equivalent(const Parameters& params);

/// max |S + I + R - 1| over `samples` equidistant dense evaluations.
[[nodiscard]] double conservation_defect(const Trajectory& traj, std::size_t samples = 1000);

/// Equilibria of f(y, y) = 0. Both families are one-parameter: the
/// disease-free family fixes I* = 0 (S* free), the endemic family fixes
/// S* = theta / sigma (I* free); R* follows from S + I + R = 1.
struct Equilibria {
  double disease_free_infected = 0.0;
  double endemic_susceptible = 0.0;

  [[nodiscard]] StationaryPoint disease_free(const Parameters& params, double susceptible) const;
  /// Throws std::invalid_argument when the member would leave the simplex.
  [[nodiscard]] StationaryPoint endemic(const Parameters& params, double infected) const;
};

[[nodiscard]] Equilibria equilibria(const Parameters& params);

}  // namespace polydelay::sir
