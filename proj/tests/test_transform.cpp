#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "polydelay/models.hpp"
#include "polydelay/quadrature.hpp"
#include "polydelay/transform.hpp"

using namespace polydelay;

namespace {

DistributedDelayDde linear_scalar(const PolynomialWeight& w, History history) {
  return DistributedDelayDde{.dimension = 1,
                             .rhs = [](double, std::span<const double>, std::span<const double> z,
                                       std::span<double> dy) { dy[0] = -z[0]; },
                             .weight = w,
                             .delayed_components = {0},
                             .history = std::move(history)};
}

// x_i(t) = int_a^b y(t - tau) tau^i dtau by adaptive Simpson.
double aux_by_simpson(const std::function<double(double)>& y, double a, double b, std::size_t i, double t) {
  return oracle::adaptive_simpson([&](double tau) { return y(t - tau) * std::pow(tau, static_cast<double>(i)); }, a,
                                  b, 1e-14);
}

}  // namespace

TEST_CASE("build_equivalent: scalar problem with uniform density") {
  const auto sys = build_equivalent(linear_scalar(uniform_weight(0.5, 2.0), History::constant({1.0})));
  CHECK(sys.degree == 0);
  CHECK(sys.aux_count == 1);
  CHECK(sys.assembled.dimension == 2);
  CHECK(sys.assembled.delays == std::vector<double>{0.5, 2.0});
  REQUIRE(sys.aux_initial.size() == 1);
  CHECK(sys.aux_initial[0] == doctest::Approx(1.5));

  // x_0' = y(t - a) - y(t - b); y' = -alpha_0 x_0
  const std::vector<double> y{0.3, 0.9};
  const std::vector<double> delayed{0.7, 5.0, 0.2, 6.0};  // (y, x) at t-a, then at t-b
  std::vector<double> dy(2);
  sys.assembled.rhs(1.0, y, DelayedStates(delayed, 2), dy);
  CHECK(dy[0] == doctest::Approx(-0.9 / 1.5));
  CHECK(dy[1] == doctest::Approx(0.7 - 0.2));
}

TEST_CASE("build_equivalent: SIR with beta(2,2) has dimension 8") {
  const auto sys = sir::equivalent(sir::reference_parameters(30.0, 150.0));
  CHECK(sys.degree == 4);
  CHECK(sys.assembled.dimension == 8);
  CHECK(sys.assembled.delays == std::vector<double>{30.0, 150.0});
  CHECK(sys.chain_offset(0) == 3);
}

TEST_CASE("build_equivalent: degenerate zero minimum delay") {
  const auto sys = build_equivalent(linear_scalar(beta_polynomial(0.0, 1.0, 1, 0), History::constant({1.0})));
  CHECK(sys.assembled.delays == std::vector<double>{1.0});
  // y(t - 0) is routed through the current state
  const std::vector<double> y{0.4, 0.1, 0.2};
  const std::vector<double> delayed{0.25, 9.0, 9.0};
  std::vector<double> dy(3);
  sys.assembled.rhs(0.5, y, DelayedStates(delayed, 3), dy);
  CHECK(dy[1] == doctest::Approx(0.4 - 0.25));
  CHECK(dy[2] == doctest::Approx(0.4 * 0.0 - 0.25 * 1.0 + 1.0 * 0.1));
}

TEST_CASE("auxiliary derivative identity against finite differences") {
  const double a = 0.5;
  const double b = 2.0;
  const auto y = [](double s) { return std::sin(s); };
  const double h = 1e-4;
  for (double t : {3.0, 5.0, 7.0}) {
    for (std::size_t i = 0; i <= 4; ++i) {
      const double fd = (aux_by_simpson(y, a, b, i, t + h) - aux_by_simpson(y, a, b, i, t - h)) / (2.0 * h);
      const double prev = i == 0 ? 0.0 : aux_by_simpson(y, a, b, i - 1, t);
      const double formula = std::pow(a, i) * y(t - a) - std::pow(b, i) * y(t - b) + static_cast<double>(i) * prev;
      CAPTURE(t);
      CAPTURE(i);
      CHECK(std::fabs(fd - formula) <= 1e-6);
    }
  }

  // The assembled right-hand side implements the same identity.
  const auto w = beta_polynomial(a, b, 2, 2);
  const auto sys = build_equivalent(linear_scalar(w, History::constant({0.0})));
  const double t = 5.0;
  std::vector<double> state{y(t)};
  for (std::size_t i = 0; i <= 4; ++i) state.push_back(aux_by_simpson(y, a, b, i, t));
  std::vector<double> delayed(2 * state.size(), 0.0);
  delayed[0] = y(t - a);
  delayed[state.size()] = y(t - b);
  std::vector<double> dy(state.size());
  sys.assembled.rhs(t, state, DelayedStates(delayed, state.size()), dy);
  for (std::size_t i = 0; i <= 4; ++i) {
    const double fd = (aux_by_simpson(y, a, b, i, t + h) - aux_by_simpson(y, a, b, i, t - h)) / (2.0 * h);
    CHECK(std::fabs(dy[1 + i] - fd) <= 1e-6);
  }
  // base equation sees z = int y(t - tau) g(tau) dtau
  const double z = oracle::adaptive_simpson([&](double tau) { return y(t - tau) * w.evaluate(tau); }, a, b, 1e-14);
  CHECK(dy[0] == doctest::Approx(-z).epsilon(1e-10));
}

TEST_CASE("aux_initial_values") {
  const auto unit = uniform_weight(0.0, 1.0);
  const auto leg_unit = gauss_legendre(8, 0.0, 1.0);
  CHECK(aux_initial_values([](double) { return 1.0; }, unit, leg_unit)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(aux_initial_values([](double t) { return t; }, unit, leg_unit)[0] == doctest::Approx(-0.5).epsilon(1e-15));

  const auto w = beta_polynomial(30.0, 150.0, 2, 2);
  const auto leg = gauss_legendre(16, 30.0, 150.0);
  const auto by_rule = aux_initial_values([](double) { return 0.01; }, w, leg);
  const auto closed = stationary_aux(0.01, w);
  CHECK(closed[0] == doctest::Approx(1.2).epsilon(1e-15));
  for (std::size_t i = 0; i <= 4; ++i) CHECK(std::fabs(by_rule[i] - closed[i]) <= 1e-12 * std::fabs(closed[i]));

  CHECK_THROWS_AS((void)aux_initial_values([](double) { return 1.0; }, w, gauss_legendre(4, 0.0, 1.0)),
                  std::invalid_argument);

  // function history: phi(t) = exp(t) has closed-form moments on [0.5, 1.5]
  const auto beta = beta_polynomial(0.5, 1.5, 1, 1);
  const auto hist = History::from_function(1, [](double t, std::span<double> out) { out[0] = std::exp(t); });
  const auto chain = aux_initial_values(hist, 0, beta);
  for (std::size_t i = 0; i <= 2; ++i) {
    const double exact = oracle::adaptive_simpson(
        [&](double tau) { return std::exp(-tau) * std::pow(tau, static_cast<double>(i)); }, 0.5, 1.5, 1e-15);
    CHECK(chain[i] == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("stationary_aux") {
  for (double v : stationary_aux(0.0, beta_polynomial(30.0, 150.0, 2, 2))) CHECK(v == 0.0);
  const auto ones = stationary_aux(1.0, beta_polynomial(0.0, 1.0, 3, 1));
  for (std::size_t i = 0; i < ones.size(); ++i) CHECK(ones[i] == doctest::Approx(1.0 / static_cast<double>(i + 1)));

  const auto w = beta_polynomial(150.0, 250.0, 2, 2);
  const auto from_history = aux_initial_values(History::constant({0.37}), 0, w);
  CHECK(from_history == stationary_aux(0.37, w));
}

TEST_CASE("scale_system: delays and horizons") {
  const auto case_i = scale_system(sir::equivalent(sir::reference_parameters(30.0, 150.0)));
  REQUIRE(case_i.assembled.delays.size() == 2);
  CHECK(case_i.assembled.delays[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(case_i.assembled.delays[1] == 1.0);
  CHECK(case_i.time_scale == 150.0);
  CHECK(1000.0 / case_i.time_scale == doctest::Approx(20.0 / 3.0).epsilon(1e-15));

  const auto case_ii = scale_system(sir::equivalent(sir::reference_parameters(150.0, 250.0)));
  CHECK(case_ii.assembled.delays[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(1000.0 / case_ii.time_scale == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(case_ii.degree == 4);
}

TEST_CASE("scale_system: scaled and unscaled solves agree") {
  // Both runs carry global error proportional to the tolerance (about 1e3 * rtol
  // over this horizon), so agreement is checked in that form.
  const auto unscaled = sir::equivalent(sir::reference_parameters(30.0, 150.0));
  const auto scaled = scale_system(unscaled);
  std::vector<double> gaps;
  for (double rtol : {1e-7, 1e-8}) {
    SolverOptions opts;
    opts.rtol = rtol;
    opts.atol = 1e-2 * rtol;
    const auto ref = solve(unscaled.assembled, 1000.0, opts);
    const auto sc = solve(scaled.assembled, 1000.0 / scaled.time_scale, opts);
    double worst = 0.0;
    double worst_aux = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double t = 10.0 * (k + 1);
      const auto y = ref.dense_eval(t);
      const auto ys = sc.dense_eval(std::min(t / 150.0, sc.back_time()));
      for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(y[c] - ys[c]));
      // x~_i(s) = x_i(b s) / b^(i+1)
      for (std::size_t i = 0; i <= 4; ++i) {
        const double expected = y[3 + i] / std::pow(150.0, static_cast<double>(i + 1));
        worst_aux = std::max(worst_aux, std::fabs(ys[3 + i] - expected) / std::max(1e-3, std::fabs(expected)));
      }
    }
    CAPTURE(rtol);
    CHECK(worst <= 2e3 * rtol);
    CHECK(worst_aux <= 2e4 * rtol);
    gaps.push_back(worst);
  }
  CHECK(gaps[1] <= gaps[0] / 5.0);
}

TEST_CASE("equivalent system reproduces the distributed-delay integral (function history)") {
  const auto w = beta_polynomial(0.5, 1.5, 1, 1);
  const auto dde = linear_scalar(w, History::from_function(1, [](double t, std::span<double> out) {
                                   out[0] = std::cos(2.0 * t);
                                 }));
  const auto sys = build_equivalent(dde);
  SolverOptions opts;
  opts.rtol = 1e-9;
  opts.atol = 1e-11;
  opts.h_max = 0.01;
  const auto traj = solve(sys.assembled, 6.0, opts);
  const auto y = [&](double s) { return s <= 0.0 ? std::cos(2.0 * s) : traj.dense_eval(s)[0]; };
  const auto leg = gauss_legendre(32, 0.5, 1.5);
  for (double t = 1.5; t <= 6.0; t += 0.5) {
    const auto x = traj.dense_eval(t);
    for (std::size_t i = 0; i <= 2; ++i) {
      const double direct = apply(leg, [&](double tau) { return y(t - tau) * std::pow(tau, static_cast<double>(i)); });
      CHECK(std::fabs(x[1 + i] - direct) <= 1e-6 * std::max(1.0, std::fabs(direct)));
    }
  }
}

TEST_CASE("structure_matrix") {
  const auto a0 = structure_matrix(0);
  CHECK(a0.entries.rows() == 1);
  CHECK(a0.entries(0, 0) == 0.0);

  for (std::size_t n = 0; n <= 6; ++n) {
    const auto a = structure_matrix(n);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a.entries);
    CHECK(static_cast<std::size_t>(lu.rank()) == n);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n + 1, n + 1);
    for (std::size_t k = 0; k < n; ++k) power = power * a.entries;
    if (n > 0) CHECK(power.norm() > 0.0);
    power = power * a.entries;
    CHECK(power.norm() == 0.0);

    const Eigen::MatrixXd kernel = lu.kernel();
    REQUIRE(kernel.cols() == 1);
    const Eigen::VectorXd e = kernel.col(0) / kernel.col(0).lpNorm<Eigen::Infinity>();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) CHECK(e[k] == 0.0);
    CHECK(std::fabs(e[static_cast<Eigen::Index>(n)]) == 1.0);
  }
}

TEST_CASE("nilpotent_exponential") {
  const auto a4 = structure_matrix(4);
  CHECK(nilpotent_exponential(a4, 0.0).isIdentity(0.0));

  const auto a1 = structure_matrix(1);
  const Eigen::MatrixXd e1 = nilpotent_exponential(a1, 2.5);
  CHECK(e1(0, 0) == 1.0);
  CHECK(e1(0, 1) == 0.0);
  CHECK(e1(1, 0) == 2.5);
  CHECK(e1(1, 1) == 1.0);

  for (std::size_t n : {2u, 4u, 6u}) {
    const auto a = structure_matrix(n);
    for (double t : {-1.0, 0.5, 1.0, 3.0}) {
      const Eigen::MatrixXd oracle = (a.entries * t).exp();
      const Eigen::MatrixXd mine = nilpotent_exponential(a, t);
      CHECK((mine - oracle).lpNorm<Eigen::Infinity>() <= 1e-12 * oracle.lpNorm<Eigen::Infinity>());
    }
  }
}

TEST_CASE("polynomial growth of the auxiliary chain") {
  for (std::size_t n = 2; n <= 6; ++n) {
    const auto a = structure_matrix(n);
    Eigen::VectorXd v(n + 1);
    for (Eigen::Index k = 0; k <= static_cast<Eigen::Index>(n); ++k) v[k] = 1.0 + 0.1 * static_cast<double>(k);
    const double ratio = (nilpotent_exponential(a, 100.0) * v).lpNorm<Eigen::Infinity>() /
                         (nilpotent_exponential(a, 10.0) * v).lpNorm<Eigen::Infinity>();
    const double expected = std::pow(10.0, static_cast<double>(n));
    CAPTURE(n);
    CHECK(ratio >= expected / 2.0);
    CHECK(ratio <= expected * 2.0);
  }
}

TEST_CASE("stationary points by damped Newton") {
  const auto w = beta_polynomial(1.0, 2.0, 1, 1);
  // y' = y (1 - z): y* in {0, 1}
  DistributedDelayDde logistic{.dimension = 1,
                               .rhs = [](double, std::span<const double> y, std::span<const double> z,
                                         std::span<double> dy) { dy[0] = y[0] * (1.0 - z[0]); },
                               .weight = w,
                               .delayed_components = {0},
                               .history = History::constant({0.5})};
  const std::vector<std::vector<double>> guesses{{0.8}, {1.3}, {-0.2}};
  const auto roots = find_stationary_points(logistic, guesses);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0].y_star[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(roots[1].y_star[0]) <= 1e-12);
  CHECK(roots[0].x_star == stationary_aux(roots[0].y_star[0], w));

  // The SIR disease-free state is a degenerate (non-isolated) root; Newton still lands on the family.
  const auto sir_dde = sir::distributed(sir::reference_parameters(30.0, 150.0));
  const std::vector<std::vector<double>> sir_guess{{0.55, 0.2, 0.25}};
  for (const auto& sp : find_stationary_points(sir_dde, sir_guess)) {
    CHECK(stationary_residual(sir_dde, sp.y_star) <= 1e-12);
  }

  CHECK_THROWS_AS((void)make_stationary_point(logistic, {0.5}), std::invalid_argument);
}
