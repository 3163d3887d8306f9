#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "polydelay/dde_solver.hpp"
#include "polydelay/error.hpp"

using namespace polydelay;

namespace {

DiscreteDelayDde unit_delay_problem() {
  return DiscreteDelayDde{.dimension = 1,
                          .delays = {1.0},
                          .rhs = [](double, std::span<const double>, const DelayedStates& z,
                                    std::span<double> dy) { dy[0] = -z(0, 0); },
                          .history = History::constant({1.0})};
}

DiscreteDelayDde decay_ode() {
  return DiscreteDelayDde{.dimension = 1,
                          .delays = {0.5},
                          .rhs = [](double, std::span<const double> y, const DelayedStates&,
                                    std::span<double> dy) { dy[0] = -y[0]; },
                          .history = History::constant({1.0})};
}

double max_global_error(const Trajectory& traj) {
  double e = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    e = std::max(e, std::fabs(traj.state(i)[0] - oracle::unit_delay_exact(traj.mesh()[i])));
  }
  return e;
}

}  // namespace

TEST_CASE("unit delay benchmark: method-of-steps values") {
  SolverOptions opts;
  opts.rtol = 1e-6;
  opts.atol = 1e-8;
  const auto traj = solve(unit_delay_problem(), 2.0, opts);
  const double tol = 10.0 * (opts.atol + opts.rtol);
  // y = 1 - t on [0, 1], y = 1 - t + (t - 1)^2 / 2 on [1, 2]
  for (double t : {0.0, 0.25, 0.5, 1.0}) CHECK(std::fabs(traj.dense_eval(t)[0] - (1.0 - t)) <= tol);
  CHECK(std::fabs(traj.dense_eval(1.5)[0] - (-0.375)) <= tol);
  CHECK(std::fabs(traj.dense_eval(2.0)[0] - (-0.5)) <= tol);
  CHECK(traj.back_time() == 2.0);
}

TEST_CASE("reduces to an ODE when delayed states are unused") {
  SolverOptions opts;
  const auto traj = solve(decay_ode(), 1.0, opts);
  CHECK(std::fabs(traj.dense_eval(1.0)[0] - std::exp(-1.0)) <= 10.0 * (opts.atol + opts.rtol));
}

TEST_CASE("zero right-hand side keeps the state constant without rejections") {
  const DiscreteDelayDde dde{.dimension = 2,
                             .delays = {0.3, 0.7},
                             .rhs = [](double, std::span<const double>, const DelayedStates&,
                                       std::span<double> dy) { std::fill(dy.begin(), dy.end(), 0.0); },
                             .history = History::constant({2.0, -3.0})};
  const auto traj = solve(dde, 5.0, SolverOptions{});
  CHECK(traj.steps_rejected == 0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(traj.state(i)[0] == 2.0);
    CHECK(traj.state(i)[1] == -3.0);
  }
}

TEST_CASE("fixed-step convergence order on the unit delay benchmark") {
  // Pieces on [0, 3] are polynomials of degree <= 3 that the pair integrates
  // exactly, so the order is measured at t = 5.
  std::vector<double> errors;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    SolverOptions opts;
    opts.fixed_step = h;
    const auto traj = solve(unit_delay_problem(), 5.0, opts);
    errors.push_back(std::fabs(traj.state(traj.size() - 1)[0] - oracle::unit_delay_exact(5.0)));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double order = std::log2(errors[k - 1] / errors[k]);
    CAPTURE(order);
    CHECK(order >= 2.7);
    CHECK(order <= 3.3);
  }
}

TEST_CASE("dense output converges with third order at step midpoints") {
  double previous = 0.0;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    SolverOptions opts;
    opts.fixed_step = h;
    const auto traj = solve(decay_ode(), 2.0, opts);
    double err = 0.0;
    const auto mesh = traj.mesh();
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
      const double t = 0.5 * (mesh[i] + mesh[i + 1]);
      err = std::max(err, std::fabs(traj.dense_eval(t)[0] - std::exp(-t)));
    }
    if (previous > 0.0) CHECK(std::log2(previous / err) >= 3.0);
    previous = err;
  }
}

TEST_CASE("error control: halving tolerances never worsens the error by more than 2x") {
  double previous = std::numeric_limits<double>::infinity();
  for (double tol = 1e-3; tol >= 1e-9; tol *= 0.5) {
    SolverOptions opts;
    opts.rtol = tol;
    opts.atol = tol;
    const double err = max_global_error(solve(unit_delay_problem(), 5.0, opts));
    CAPTURE(tol);
    CHECK(err <= 2.0 * previous);
    previous = err;
  }
}

TEST_CASE("dense_eval: mesh points, continuity, range") {
  const auto traj = solve(unit_delay_problem(), 4.0, SolverOptions{});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto v = traj.dense_eval(traj.mesh()[i]);
    CHECK(v[0] == traj.state(i)[0]);
  }
  double jump = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double t = traj.mesh()[i];
    const double left = traj.dense_eval(std::nextafter(t, -1.0))[0];
    const double right = traj.dense_eval(std::nextafter(t, 10.0))[0];
    jump = std::max(jump, std::fabs(left - right));
  }
  CHECK(jump <= 1e-14);
  CHECK_THROWS_AS((void)traj.dense_eval(-1e-9), std::out_of_range);
  CHECK_THROWS_AS((void)traj.dense_eval(4.0 + 1e-9), std::out_of_range);
}

TEST_CASE("Hermite extension reproduces cubics") {
  Trajectory traj(2);
  for (double t : {0.0, 0.3, 1.1, 2.0}) {
    const std::vector<double> y{t, t * t * t - 2.0 * t};
    const std::vector<double> dy{1.0, 3.0 * t * t - 2.0};
    traj.append(t, y, dy);
  }
  for (double t = 0.0; t <= 2.0; t += 0.0625) {
    const auto v = traj.dense_eval(t);
    CHECK(v[0] == doctest::Approx(t).epsilon(1e-15).scale(1.0));
    CHECK(v[1] == doctest::Approx(t * t * t - 2.0 * t).epsilon(1e-14).scale(1.0));
  }
  CHECK_THROWS_AS(traj.append(2.0, std::vector<double>{0, 0}, std::vector<double>{0, 0}), std::invalid_argument);
}

TEST_CASE("delayed lookups never run ahead of the accepted mesh") {
  const DiscreteDelayDde dde{.dimension = 1,
                             .delays = {0.21, 0.37, 0.5, 0.93},
                             .rhs = [](double, std::span<const double> y, const DelayedStates& z,
                                       std::span<double> dy) {
                               dy[0] = -0.5 * y[0] + 0.2 * z(0, 0) - 0.3 * z(0, 1) + std::sin(z(0, 2)) - 0.1 * z(0, 3);
                             },
                             .history = History::from_function(1, [](double t, std::span<double> out) {
                               out[0] = std::cos(t);
                             })};
  SolverOptions opts;
  opts.h_max = 0.05;
  const auto traj = solve(dde, 6.0, opts);
  CHECK(traj.max_lookup_overshoot <= 1e-12);
}

TEST_CASE("breakpoints are generated, merged and hit exactly") {
  const std::vector<double> delays{0.2, 1.0};
  const auto bps = propagated_breakpoints(delays, 2.0);
  const std::vector<double> expected{0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 2.0};
  REQUIRE(bps.size() == expected.size());
  for (std::size_t i = 0; i < bps.size(); ++i) CHECK(bps[i] == doctest::Approx(expected[i]).epsilon(1e-14));
  for (std::size_t i = 1; i < bps.size(); ++i) CHECK(bps[i] - bps[i - 1] > 1e-12);

  const DiscreteDelayDde dde{.dimension = 1,
                             .delays = delays,
                             .rhs = [](double, std::span<const double>, const DelayedStates& z,
                                       std::span<double> dy) { dy[0] = -z(0, 0) + 0.5 * z(0, 1); },
                             .history = History::constant({1.0})};
  const auto traj = solve(dde, 2.0, SolverOptions{});
  const auto mesh = traj.mesh();
  for (double bp : bps) CHECK(std::find(mesh.begin(), mesh.end(), bp) != mesh.end());
  for (std::size_t i = 1; i < mesh.size(); ++i) CHECK(mesh[i] - mesh[i - 1] <= 0.2 + 1e-15);
}

TEST_CASE("failure modes") {
  SolverOptions budget;
  budget.max_steps = 5;
  CHECK_THROWS_AS((void)solve(unit_delay_problem(), 10.0, budget), SolverError);

  const DiscreteDelayDde blowup{.dimension = 1,
                                .delays = {},
                                .rhs = [](double, std::span<const double> y, const DelayedStates&,
                                          std::span<double> dy) { dy[0] = y[0] * y[0]; },
                                .history = History::constant({1.0})};
  CHECK_THROWS_AS((void)solve(blowup, 2.0, SolverOptions{}), SolverError);

  const DiscreteDelayDde nan_rhs{.dimension = 1,
                                 .delays = {1.0},
                                 .rhs = [](double t, std::span<const double>, const DelayedStates&,
                                           std::span<double> dy) { dy[0] = t > 0.5 ? std::nan("") : 0.0; },
                                 .history = History::constant({1.0})};
  CHECK_THROWS_AS((void)solve(nan_rhs, 1.0, SolverOptions{}), SolverError);

  SolverOptions bad;
  bad.rtol = 1.0;
  CHECK_THROWS_AS((void)solve(unit_delay_problem(), 1.0, bad), std::invalid_argument);
  bad = SolverOptions{};
  bad.atol = 0.0;
  CHECK_THROWS_AS((void)solve(unit_delay_problem(), 1.0, bad), std::invalid_argument);
  CHECK_THROWS_AS((void)solve(unit_delay_problem(), 0.0, SolverOptions{}), std::invalid_argument);

  auto unsorted = unit_delay_problem();
  unsorted.delays = {1.0, 0.5};
  CHECK_THROWS_AS((void)solve(unsorted, 1.0, SolverOptions{}), std::invalid_argument);
  unsorted.delays = {0.0};
  CHECK_THROWS_AS((void)solve(unsorted, 1.0, SolverOptions{}), std::invalid_argument);
}

TEST_CASE("initial discontinuity is recorded") {
  auto dde = unit_delay_problem();
  dde.initial_state = std::vector<double>{2.0};
  const auto traj = solve(dde, 1.0, SolverOptions{});
  CHECK(traj.initial_discontinuity);
  CHECK(traj.state(0)[0] == 2.0);
  CHECK_FALSE(solve(unit_delay_problem(), 1.0, SolverOptions{}).initial_discontinuity);
}

TEST_CASE("sample") {
  const auto traj = solve(unit_delay_problem(), 3.0, SolverOptions{});
  const auto two = sample(traj, 2);
  REQUIRE(two.size() == 2);
  CHECK(two.front().t == 0.0);
  CHECK(two.back().t == 3.0);
  const auto many = sample(traj, 1000);
  REQUIRE(many.size() == 1000);
  for (std::size_t i = 1; i < many.size(); ++i) CHECK(many[i].t > many[i - 1].t);
  CHECK_THROWS_AS((void)sample(traj, 1), std::invalid_argument);
}
