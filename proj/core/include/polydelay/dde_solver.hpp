#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace polydelay {

/// Initial function phi(t) for t <= 0. A constant history is tagged so that
/// closed-form initial values can be used downstream.
class History {
 public:
  using Function = std::function<void(double t, std::span<double> out)>;

  static History constant(std::vector<double> value);
  static History from_function(std::size_t dimension, Function fn);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] bool is_constant() const noexcept { return !fn_; }
  /// Only meaningful when is_constant().
  [[nodiscard]] std::span<const double> constant_value() const noexcept { return value_; }

  void evaluate(double t, std::span<double> out) const;
  [[nodiscard]] std::vector<double> operator()(double t) const;

 private:
  History() = default;

  std::size_t dimension_ = 0;
  std::vector<double> value_;
  Function fn_;
};

/// Read-only view of the delayed states y(t - tau_k), one length-d block per delay.
class DelayedStates {
 public:
  DelayedStates(std::span<const double> data, std::size_t dimension) : data_{data}, dimension_{dimension} {}

  [[nodiscard]] double operator()(std::size_t component, std::size_t delay_index) const {
    return data_[delay_index * dimension_ + component];
  }
  [[nodiscard]] std::span<const double> at_delay(std::size_t delay_index) const {
    return data_.subspan(delay_index * dimension_, dimension_);
  }
  [[nodiscard]] std::size_t delay_count() const noexcept { return dimension_ ? data_.size() / dimension_ : 0; }

 private:
  std::span<const double> data_;
  std::size_t dimension_;
};

/// Right-hand side f(t, y(t), {y(t - tau_k)}) writing the derivative into `dydt`.
/// Must be reentrant.
using DiscreteRhs =
    std::function<void(double t, std::span<const double> y, const DelayedStates& delayed, std::span<double> dydt)>;

/// y'(t) = f(t, y(t), y(t - tau_1), ..., y(t - tau_m)) with y = phi on t <= 0.
struct DiscreteDelayDde {
  std::size_t dimension = 0;
  std::vector<double> delays;  // strictly positive, strictly increasing
  DiscreteRhs rhs;
  History history = History::constant({});
  /// y(0) when it differs from phi(0); recorded as an initial discontinuity.
  std::optional<std::vector<double>> initial_state;

  /// Throws std::invalid_argument on an ill-formed problem.
  void validate() const;
};

struct SolverOptions {
  double rtol = 1e-6;
  double atol = 1e-8;
  double h_max = std::numeric_limits<double>::infinity();
  std::optional<double> h_init;
  std::size_t max_steps = 10'000'000;
  /// Disables error control and advances with this step (still landing on breakpoints).
  std::optional<double> fixed_step;

  /// Throws std::invalid_argument unless rtol in [1e-13, 1e-1], atol > 0, h_max > 0.
  void validate() const;
};

/// Accepted mesh with states and derivatives plus a C^1 piecewise cubic
/// Hermite continuous extension.
class Trajectory {
 public:
  explicit Trajectory(std::size_t dimension) : dimension_{dimension} {}

  /// Appends a mesh point; t must exceed the last mesh point.
  void append(double t, std::span<const double> state, std::span<const double> derivative);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t size() const noexcept { return mesh_.size(); }
  [[nodiscard]] bool empty() const noexcept { return mesh_.empty(); }
  [[nodiscard]] std::span<const double> mesh() const noexcept { return mesh_; }
  [[nodiscard]] double front_time() const { return mesh_.front(); }
  [[nodiscard]] double back_time() const { return mesh_.back(); }
  [[nodiscard]] std::span<const double> state(std::size_t i) const;
  [[nodiscard]] std::span<const double> derivative(std::size_t i) const;

  /// Throws std::out_of_range outside [front_time(), back_time()].
  void dense_eval(double t, std::span<double> out) const;
  [[nodiscard]] std::vector<double> dense_eval(double t) const;

  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
  std::size_t rhs_evaluations = 0;
  bool initial_discontinuity = false;
  /// Largest (t - tau) - t_last seen by a delayed lookup before clamping; <= 0
  /// up to rounding when the method-of-steps restriction holds.
  double max_lookup_overshoot = -std::numeric_limits<double>::infinity();

 private:
  std::size_t dimension_;
  std::vector<double> mesh_;
  std::vector<double> states_;
  std::vector<double> derivs_;
};

/// Derivative-discontinuity points k*tau_i + l*tau_j (1 <= k + l <= 4) in
/// (0, t_end], sorted, merged within 1e-12, always ending with t_end.
[[nodiscard]] std::vector<double> propagated_breakpoints(std::span<const double> delays, double t_end);

/// Bogacki-Shampine 3(2) with first-same-as-last, method-of-steps history
/// lookup and Hermite dense output. Throws SolverError on budget exhaustion,
/// step-size underflow or non-finite right-hand side output.
[[nodiscard]] Trajectory solve(const DiscreteDelayDde& dde, double t_end, const SolverOptions& options);

[[nodiscard]] inline std::vector<double> dense_eval(const Trajectory& traj, double t) { return traj.dense_eval(t); }

struct SamplePoint {
  double t;
  std::vector<double> state;
};

/// k >= 2 equidistant dense evaluations over the trajectory's time span.
[[nodiscard]] std::vector<SamplePoint> sample(const Trajectory& traj, std::size_t k);

}  // namespace polydelay
