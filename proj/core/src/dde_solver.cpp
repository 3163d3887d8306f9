#include "polydelay/dde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "polydelay/error.hpp"

namespace polydelay {

History History::constant(std::vector<double> value) {
  History h;
  h.dimension_ = value.size();
  h.value_ = std::move(value);
  return h;
}

History History::from_function(std::size_t dimension, Function fn) {
  if (!fn) throw std::invalid_argument("History::from_function: empty callback");
  History h;
  h.dimension_ = dimension;
  h.fn_ = std::move(fn);
  return h;
}

void History::evaluate(double t, std::span<double> out) const {
  if (fn_) {
    fn_(t, out);
  } else {
    std::copy(value_.begin(), value_.end(), out.begin());
  }
}

std::vector<double> History::operator()(double t) const {
  std::vector<double> out(dimension_);
  evaluate(t, out);
  return out;
}

void DiscreteDelayDde::validate() const {
  if (dimension == 0) throw std::invalid_argument("DiscreteDelayDde: dimension must be positive");
  if (!rhs) throw std::invalid_argument("DiscreteDelayDde: missing right-hand side");
  if (history.dimension() != dimension) throw std::invalid_argument("DiscreteDelayDde: history dimension mismatch");
  for (std::size_t k = 0; k < delays.size(); ++k) {
    if (!(delays[k] > 0.0) || !std::isfinite(delays[k])) {
      throw std::invalid_argument("DiscreteDelayDde: delays must be positive and finite");
    }
    if (k > 0 && !(delays[k] > delays[k - 1])) {
      throw std::invalid_argument("DiscreteDelayDde: delays must be distinct and ascending");
    }
  }
  if (initial_state && initial_state->size() != dimension) {
    throw std::invalid_argument("DiscreteDelayDde: initial state dimension mismatch");
  }
}

void SolverOptions::validate() const {
  if (!(rtol >= 1e-13 && rtol <= 1e-1)) throw std::invalid_argument("SolverOptions: rtol must lie in [1e-13, 1e-1]");
  if (!(atol > 0.0)) throw std::invalid_argument("SolverOptions: atol must be positive");
  if (!(h_max > 0.0)) throw std::invalid_argument("SolverOptions: h_max must be positive");
  if (h_init && !(*h_init > 0.0)) throw std::invalid_argument("SolverOptions: h_init must be positive");
  if (fixed_step && !(*fixed_step > 0.0)) throw std::invalid_argument("SolverOptions: fixed_step must be positive");
  if (max_steps == 0) throw std::invalid_argument("SolverOptions: max_steps must be positive");
}

void Trajectory::append(double t, std::span<const double> state, std::span<const double> derivative) {
  if (state.size() != dimension_ || derivative.size() != dimension_) {
    throw std::invalid_argument("Trajectory::append: dimension mismatch");
  }
  if (!mesh_.empty() && !(t > mesh_.back())) {
    throw std::invalid_argument("Trajectory::append: mesh must be strictly increasing");
  }
  mesh_.push_back(t);
  states_.insert(states_.end(), state.begin(), state.end());
  derivs_.insert(derivs_.end(), derivative.begin(), derivative.end());
}

std::span<const double> Trajectory::state(std::size_t i) const {
  return std::span<const double>(states_).subspan(i * dimension_, dimension_);
}

std::span<const double> Trajectory::derivative(std::size_t i) const {
  return std::span<const double>(derivs_).subspan(i * dimension_, dimension_);
}

void Trajectory::dense_eval(double t, std::span<double> out) const {
  if (mesh_.empty() || !(t >= mesh_.front() && t <= mesh_.back())) {
    throw std::out_of_range("Trajectory::dense_eval: t outside the integrated interval");
  }
  // First mesh point strictly greater than t; the containing step is [i, i+1].
  const auto upper = std::upper_bound(mesh_.begin(), mesh_.end(), t);
  const std::size_t i = static_cast<std::size_t>(upper - mesh_.begin()) - 1;
  const auto y0 = state(i);
  if (t == mesh_[i] || i + 1 == mesh_.size()) {
    std::copy(y0.begin(), y0.end(), out.begin());
    return;
  }
  const auto y1 = state(i + 1);
  const auto f0 = derivative(i);
  const auto f1 = derivative(i + 1);
  const double h = mesh_[i + 1] - mesh_[i];
  const double s = (t - mesh_[i]) / h;
  const double r = 1.0 - s;
  const double h00 = (1.0 + 2.0 * s) * r * r;
  const double h10 = s * r * r * h;
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = -s * s * r * h;
  for (std::size_t c = 0; c < dimension_; ++c) {
    out[c] = h00 * y0[c] + h10 * f0[c] + h01 * y1[c] + h11 * f1[c];
  }
}

std::vector<double> Trajectory::dense_eval(double t) const {
  std::vector<double> out(dimension_);
  dense_eval(t, out);
  return out;
}

std::vector<double> propagated_breakpoints(std::span<const double> delays, double t_end) {
  constexpr int kMaxOrder = 4;
  std::vector<double> points;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    for (int k = 1; k <= kMaxOrder; ++k) points.push_back(k * delays[i]);
    for (std::size_t j = i + 1; j < delays.size(); ++j) {
      for (int k = 1; k < kMaxOrder; ++k) {
        for (int l = 1; k + l <= kMaxOrder; ++l) points.push_back(k * delays[i] + l * delays[j]);
      }
    }
  }
  std::sort(points.begin(), points.end());

  const auto merge_tol = [](double t) { return 1e-12 * std::max(1.0, std::fabs(t)); };
  std::vector<double> out;
  for (double p : points) {
    if (!(p > 0.0) || p >= t_end - merge_tol(t_end)) continue;
    if (!out.empty() && p - out.back() <= merge_tol(p)) continue;
    out.push_back(p);
  }
  out.push_back(t_end);
  return out;
}

namespace {

class Stepper {
 public:
  Stepper(const DiscreteDelayDde& dde, Trajectory& traj)
      : dde_{dde}, traj_{traj}, d_{dde.dimension}, delayed_(dde.dimension * dde.delays.size()) {}

  // Evaluates f at (t, y) with delayed states from history or dense output.
  void rhs(double t, std::span<const double> y, std::span<double> dydt) {
    for (std::size_t k = 0; k < dde_.delays.size(); ++k) {
      double u = t - dde_.delays[k];
      const std::span<double> slot(delayed_.data() + k * d_, d_);
      if (u <= 0.0) {
        dde_.history.evaluate(u, slot);
        continue;
      }
      const double last = traj_.back_time();
      traj_.max_lookup_overshoot = std::max(traj_.max_lookup_overshoot, u - last);
      if (u > last) u = last;
      traj_.dense_eval(u, slot);
    }
    dde_.rhs(t, y, DelayedStates(delayed_, d_), dydt);
    ++traj_.rhs_evaluations;
    for (std::size_t c = 0; c < d_; ++c) {
      if (!std::isfinite(dydt[c])) {
        std::ostringstream msg;
        msg << "solve: non-finite right-hand side at t = " << t << " (component " << c << ")";
        throw SolverError(msg.str());
      }
    }
  }

 private:
  const DiscreteDelayDde& dde_;
  Trajectory& traj_;
  std::size_t d_;
  std::vector<double> delayed_;
};

double scaled_rms(std::span<const double> v, std::span<const double> scale) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] / scale[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(v.size()));
}

}  // namespace

Trajectory solve(const DiscreteDelayDde& dde, double t_end, const SolverOptions& options) {
  dde.validate();
  options.validate();
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("solve: t_end must be positive");

  const std::size_t d = dde.dimension;
  const double eps = std::numeric_limits<double>::epsilon();
  Trajectory traj(d);
  Stepper stepper(dde, traj);

  std::vector<double> y = dde.history(0.0);
  if (dde.initial_state) {
    traj.initial_discontinuity = !std::equal(y.begin(), y.end(), dde.initial_state->begin());
    y = *dde.initial_state;
  }
  std::vector<double> f(d);
  stepper.rhs(0.0, y, f);
  traj.append(0.0, y, f);

  double h_cap = std::min(options.h_max, t_end);
  if (!dde.delays.empty()) h_cap = std::min(h_cap, dde.delays.front());

  const std::vector<double> breakpoints = propagated_breakpoints(dde.delays, t_end);
  std::size_t next_bp = 0;

  std::vector<double> k2(d), k3(d), k4(d), stage(d), y_new(d), scale(d);

  double h = 0.0;
  if (options.fixed_step) {
    h = *options.fixed_step;
  } else if (options.h_init) {
    h = *options.h_init;
  } else {
    // Curvature probe: one explicit Euler step of size h0, then h ~ (0.01 / max(|f|, |f'|))^(1/3).
    for (std::size_t c = 0; c < d; ++c) scale[c] = options.atol + options.rtol * std::fabs(y[c]);
    const double d0 = scaled_rms(y, scale);
    const double d1 = scaled_rms(f, scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, h_cap);
    for (std::size_t c = 0; c < d; ++c) stage[c] = y[c] + h0 * f[c];
    stepper.rhs(h0, stage, k2);
    for (std::size_t c = 0; c < d; ++c) k3[c] = k2[c] - f[c];
    const double d2 = scaled_rms(k3, scale) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::cbrt(0.01 / dmax);
    h = std::min(100.0 * h0, h1);
  }

  double t = 0.0;
  while (t < t_end) {
    if (traj.steps_taken + traj.steps_rejected >= options.max_steps) {
      std::ostringstream msg;
      msg << "solve: step budget of " << options.max_steps << " exhausted at t = " << t;
      throw SolverError(msg.str());
    }
    const double h_proposed = std::min(h, h_cap);
    double step = h_proposed;
    const double target = breakpoints[next_bp];
    const bool lands = t + step * (1.0 + 1e-8) >= target;
    if (lands) step = target - t;

    const double h_min = 1e3 * eps * std::max(std::fabs(t), std::numeric_limits<double>::min());
    if (!(step > h_min)) {
      std::ostringstream msg;
      msg << "solve: step size underflow (h = " << step << ") at t = " << t;
      throw SolverError(msg.str());
    }

    // Bogacki-Shampine 3(2); f holds k1 (first-same-as-last).
    for (std::size_t c = 0; c < d; ++c) stage[c] = y[c] + 0.5 * step * f[c];
    stepper.rhs(t + 0.5 * step, stage, k2);
    for (std::size_t c = 0; c < d; ++c) stage[c] = y[c] + 0.75 * step * k2[c];
    stepper.rhs(t + 0.75 * step, stage, k3);
    for (std::size_t c = 0; c < d; ++c) {
      y_new[c] = y[c] + step * (2.0 / 9.0 * f[c] + 1.0 / 3.0 * k2[c] + 4.0 / 9.0 * k3[c]);
    }
    const double t_new = lands ? target : t + step;
    stepper.rhs(t_new, y_new, k4);

    double err = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double e = step * (-5.0 / 72.0 * f[c] + 1.0 / 12.0 * k2[c] + 1.0 / 9.0 * k3[c] - 1.0 / 8.0 * k4[c]);
      const double sc = options.atol + options.rtol * std::fabs(y_new[c]);
      err = std::max(err, std::fabs(e) / sc);
    }
    if (!std::isfinite(err)) throw SolverError("solve: non-finite error estimate");

    if (options.fixed_step) {
      t = t_new;
      y.swap(y_new);
      f.swap(k4);
      traj.append(t, y, f);
      ++traj.steps_taken;
      if (lands) ++next_bp;
      continue;
    }

    const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -1.0 / 3.0);
    if (err <= 1.0) {
      t = t_new;
      y.swap(y_new);
      f.swap(k4);
      traj.append(t, y, f);
      ++traj.steps_taken;
      if (lands) ++next_bp;
      h = h_proposed * std::min(5.0, std::max(0.2, factor));
    } else {
      ++traj.steps_rejected;
      h = step * std::max(0.2, std::min(1.0, factor));
    }
  }
  return traj;
}

std::vector<SamplePoint> sample(const Trajectory& traj, std::size_t k) {
  if (k < 2) throw std::invalid_argument("sample: k must be at least 2");
  if (traj.empty()) throw std::invalid_argument("sample: empty trajectory");
  const double t0 = traj.front_time();
  const double t1 = traj.back_time();
  std::vector<SamplePoint> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = i + 1 == k ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(k - 1);
    out.push_back({t, traj.dense_eval(t)});
  }
  return out;
}

}  // namespace polydelay
