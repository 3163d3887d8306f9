#include "polydelay/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "polydelay/dde_solver.hpp"
#include "polydelay/error.hpp"
#include "polydelay/models.hpp"
#include "polydelay/transform.hpp"
#include "polydelay/weight.hpp"

namespace polydelay {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return v;
}

long long parse_integer(std::string_view key, std::string_view text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigError("'" + std::string(key) + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

DistributedDelayDde make_model(const ExperimentConfig& config) {
  const PolynomialWeight weight = beta_polynomial(config.a, config.b, config.p, config.q);
  if (config.model == ModelKind::sir) {
    return sir::distributed(
        sir::Parameters{.sigma = config.sigma, .theta = config.theta, .weight = weight, .y0 = config.sir_initial});
  }
  // y'(t) = -int_a^b y(t - tau) g(tau) dtau
  DistributedDelayDde dde{.dimension = 1,
                          .rhs = [](double, std::span<const double>, std::span<const double> z,
                                    std::span<double> dydt) { dydt[0] = -z[0]; },
                          .weight = weight,
                          .delayed_components = {0},
                          .history = History::constant({config.scalar_initial})};
  return dde;
}

std::vector<std::string> model_columns(ModelKind model) {
  if (model == ModelKind::sir) return {"S", "I", "R"};
  return {"y"};
}

struct PreparedProblem {
  DiscreteDelayDde dde;
  double time_scale = 1.0;
  std::vector<std::string> columns;  // state columns, without time
};

PreparedProblem prepare(const ExperimentConfig& config, Variant variant, std::size_t m) {
  DistributedDelayDde base = make_model(config);
  PreparedProblem out;
  out.columns = model_columns(config.model);
  if (config.scale) {
    out.time_scale = base.weight.upper();
    base = scale_distributed(base);
  }
  if (variant == Variant::equivalent) {
    EquivalentSystem sys = build_equivalent(base);
    for (std::size_t j = 0; j < base.delayed_components.size(); ++j) {
      for (std::size_t i = 0; i <= sys.degree; ++i) {
        std::string name = "x" + std::to_string(i);
        if (base.delayed_components.size() > 1) name = "x" + std::to_string(j) + "_" + std::to_string(i);
        out.columns.push_back(std::move(name));
      }
    }
    out.dde = std::move(sys.assembled);
  } else {
    const QuadratureRule rule = gauss_jacobi(m, config.p, config.q, base.weight.lower(), base.weight.upper());
    out.dde = build_quadrature_dde(base, rule);
  }
  return out;
}

SolverOptions solver_options(const ExperimentConfig& config) {
  SolverOptions opts;
  opts.rtol = config.rtol;
  opts.atol = config.atol;
  opts.h_max = config.h_max;
  opts.max_steps = config.max_steps;
  return opts;
}

struct SampledSolve {
  std::vector<SamplePoint> points;
  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
};

SampledSolve solve_sampled(const PreparedProblem& problem, double horizon, const ExperimentConfig& config) {
  const Trajectory traj = solve(problem.dde, horizon, solver_options(config));
  return SampledSolve{sample(traj, config.samples), traj.steps_taken, traj.steps_rejected};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(sigma > 0.0) || !(theta > 0.0)) throw ConfigError("sigma and theta must be positive");
  if (!(a >= 0.0) || !(b > a)) throw ConfigError("delay bounds require 0 <= a < b");
  if (p < 0 || q < 0) throw ConfigError("beta exponents p, q must be nonnegative");
  if (p + q > kMaxBetaDegree) throw ConfigError("beta degree p + q exceeds " + std::to_string(kMaxBetaDegree));
  if (variant == Variant::quadrature && m < 1) throw ConfigError("quadrature variant requires m >= 1");
  if (!(rtol >= 1e-13 && rtol <= 1e-1)) throw ConfigError("rtol must lie in [1e-13, 1e-1]");
  if (!(atol > 0.0)) throw ConfigError("atol must be positive");
  if (!(h_max > 0.0)) throw ConfigError("h_max must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (samples < 2) throw ConfigError("samples must be at least 2");
  if (model == ModelKind::sir) {
    for (double v : sir_initial) {
      if (!(v >= 0.0)) throw ConfigError("initial populations must be nonnegative");
    }
    if (std::fabs(sir_initial[0] + sir_initial[1] + sir_initial[2] - 1.0) > 1e-14) {
      throw ConfigError("initial populations s0 + i0 + r0 must equal 1");
    }
  }
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  if (name == "case-i") {
    c.a = 30.0;
    c.b = 150.0;
    c.h_max = 1e-3;
  } else if (name == "case-ii") {
    c.a = 150.0;
    c.b = 250.0;
    c.h_max = 5e-4;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected case-i or case-ii)");
  }
  return c;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "preset") {
    config = preset(value);
  } else if (key == "model") {
    if (value == "sir") {
      config.model = ModelKind::sir;
    } else if (value == "scalar-benchmark") {
      config.model = ModelKind::scalar_benchmark;
    } else {
      throw ConfigError("unknown model '" + std::string(value) + "' (expected sir or scalar-benchmark)");
    }
  } else if (key == "variant") {
    if (value == "equivalent") {
      config.variant = Variant::equivalent;
    } else if (value == "quadrature") {
      config.variant = Variant::quadrature;
    } else {
      throw ConfigError("unknown variant '" + std::string(value) + "' (expected equivalent or quadrature)");
    }
  } else if (key == "sigma") {
    config.sigma = parse_double(key, value);
  } else if (key == "theta") {
    config.theta = parse_double(key, value);
  } else if (key == "a") {
    config.a = parse_double(key, value);
  } else if (key == "b") {
    config.b = parse_double(key, value);
  } else if (key == "p") {
    config.p = static_cast<int>(parse_count(key, value));
  } else if (key == "q") {
    config.q = static_cast<int>(parse_count(key, value));
  } else if (key == "m") {
    config.m = parse_count(key, value);
  } else if (key == "rtol") {
    config.rtol = parse_double(key, value);
  } else if (key == "atol") {
    config.atol = parse_double(key, value);
  } else if (key == "h_max" || key == "hmax") {
    config.h_max = parse_double(key, value);
  } else if (key == "max_steps" || key == "max-steps") {
    config.max_steps = parse_count(key, value);
  } else if (key == "t_end" || key == "t-end") {
    config.t_end = parse_double(key, value);
  } else if (key == "samples") {
    config.samples = parse_count(key, value);
  } else if (key == "scale") {
    config.scale = parse_bool(key, value);
  } else if (key == "s0") {
    config.sir_initial[0] = parse_double(key, value);
  } else if (key == "i0") {
    config.sir_initial[1] = parse_double(key, value);
  } else if (key == "r0") {
    config.sir_initial[2] = parse_double(key, value);
  } else if (key == "y0") {
    config.scalar_initial = parse_double(key, value);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto prefix = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(prefix + "expected key = value");
    try {
      apply_setting(base, view.substr(0, eq), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base), path);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: missing header");
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.emplace_back(trim(cell));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      const auto cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw std::runtime_error("read_csv: bad value on line " + std::to_string(line_no));
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("read_csv: column count mismatch on line " + std::to_string(line_no));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

SolveResult run_solve(const ExperimentConfig& config) {
  config.validate();
  const PreparedProblem problem = prepare(config, config.variant, config.m);
  const double horizon = config.t_end / problem.time_scale;
  const SampledSolve solved = solve_sampled(problem, horizon, config);

  SolveResult result;
  result.time_scale = problem.time_scale;
  result.integration_end = horizon;
  result.steps_taken = solved.steps_taken;
  result.steps_rejected = solved.steps_rejected;
  result.table.columns.push_back("t");
  result.table.columns.insert(result.table.columns.end(), problem.columns.begin(), problem.columns.end());
  result.table.rows.reserve(solved.points.size());
  for (const auto& pt : solved.points) {
    std::vector<double> row;
    row.reserve(pt.state.size() + 1);
    row.push_back(pt.t * problem.time_scale);
    row.insert(row.end(), pt.state.begin(), pt.state.end());
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

std::size_t configured_threads() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POLYDELAY_THREADS")) {
    const std::string_view text(env);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && ptr == text.data() + text.size() && v > 0) return v;
  }
  return hw;
}

ConvergenceReport run_convergence(const ExperimentConfig& config, const std::vector<std::size_t>& m_values) {
  config.validate();
  if (m_values.empty()) throw ConfigError("convergence: m list must be nonempty");
  for (std::size_t k = 0; k < m_values.size(); ++k) {
    if (m_values[k] < 1) throw ConfigError("convergence: m values must be positive");
    if (k > 0 && m_values[k] <= m_values[k - 1]) throw ConfigError("convergence: m list must be strictly ascending");
  }

  const PreparedProblem reference = prepare(config, Variant::equivalent, 0);
  const double horizon = config.t_end / reference.time_scale;
  const std::size_t model_dim = model_columns(config.model).size();
  const SampledSolve ref = solve_sampled(reference, horizon, config);

  ConvergenceReport report;
  report.m_values = m_values;
  report.components = model_columns(config.model);
  report.differences.assign(m_values.size(), std::vector<double>(model_dim, 0.0));
  report.quadrature_steps.assign(m_values.size(), 0);
  report.reference_steps = ref.steps_taken;
  report.samples = config.samples;
  report.integration_end = horizon;

  std::vector<std::exception_ptr> errors(m_values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < m_values.size(); k = next++) {
      try {
        const PreparedProblem problem = prepare(config, Variant::quadrature, m_values[k]);
        const SampledSolve approx = solve_sampled(problem, horizon, config);
        for (std::size_t i = 0; i < approx.points.size(); ++i) {
          for (std::size_t c = 0; c < model_dim; ++c) {
            const double diff = std::fabs(approx.points[i].state[c] - ref.points[i].state[c]);
            report.differences[k][c] = std::max(report.differences[k][c], diff);
          }
        }
        report.quadrature_steps[k] = approx.steps_taken;
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(configured_threads(), m_values.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "m";
  for (const auto& c : report.components) out << "," << c;
  out << '\n';
  for (std::size_t k = 0; k < report.m_values.size(); ++k) {
    out << report.m_values[k];
    for (double d : report.differences[k]) out << "," << format_double(d);
    out << '\n';
  }
}

void write_convergence_summary(std::ostream& out, const ConvergenceReport& report) {
  out << "reference (equivalent system): " << report.reference_steps << " steps, " << report.samples
      << " samples on [0, " << report.integration_end << "] (integration time)\n";
  for (std::size_t k = 0; k < report.m_values.size(); ++k) {
    out << "m = " << report.m_values[k] << ":";
    for (std::size_t c = 0; c < report.components.size(); ++c) {
      out << "  max|d" << report.components[c] << "| = " << format_double(report.differences[k][c]);
    }
    out << "  (" << report.quadrature_steps[k] << " steps)\n";
  }
}

QuadTable run_quad_table(const ExperimentConfig& config, std::size_t m) {
  config.validate();
  if (m < 1) throw ConfigError("quad: m must be positive");
  const PolynomialWeight weight = beta_polynomial(config.a, config.b, config.p, config.q);
  QuadTable table{.rule = gauss_jacobi(m, config.p, config.q, config.a, config.b), .residuals = {}};
  for (int i = 0; i <= table.rule.exactness; ++i) {
    const double exact = weight.moment(static_cast<std::size_t>(i));
    const double approx = apply(table.rule, [i](double tau) { return std::pow(tau, i); });
    table.residuals.push_back(std::fabs(approx - exact) / std::max(1.0, std::fabs(exact)));
  }
  return table;
}

void write_quad_table(std::ostream& out, const QuadTable& table) {
  const auto& rule = table.rule;
  out << "# m = " << rule.size() << ", interval [" << format_double(rule.lower) << ", " << format_double(rule.upper)
      << "], exactness degree " << rule.exactness << "\n";
  out << "k,node,weight\n";
  for (std::size_t k = 0; k < rule.size(); ++k) {
    out << k << "," << format_double(rule.nodes[k]) << "," << format_double(rule.weights[k]) << "\n";
  }
  out << "i,residual\n";
  for (std::size_t i = 0; i < table.residuals.size(); ++i) {
    out << i << "," << format_double(table.residuals[i]) << "\n";
  }
}

void write_stationary_report(std::ostream& out, const ExperimentConfig& config) {
  config.validate();
  const DistributedDelayDde model = make_model(config);
  const auto per_unit = stationary_aux(1.0, model.weight);

  if (config.model == ModelKind::sir) {
    const sir::Parameters params{
        .sigma = config.sigma, .theta = config.theta, .weight = model.weight, .y0 = config.sir_initial};
    const sir::Equilibria eq = sir::equilibria(params);
    out << "model: sir\n";
    out << "disease-free family: I* = " << format_double(eq.disease_free_infected)
        << ", S* + R* = 1 (S* free); auxiliary values x_i* = 0\n";
    out << "endemic family: S* = theta / sigma = " << format_double(eq.endemic_susceptible)
        << ", I* free, R* = 1 - S* - I*\n";
  } else {
    const std::vector<std::vector<double>> guesses{{config.scalar_initial}, {0.0}};
    out << "model: scalar-benchmark\n";
    for (const auto& sp : find_stationary_points(model, guesses)) {
      out << "stationary y* = " << format_double(sp.y_star[0]) << "\n";
    }
  }
  out << "stationary auxiliary values per unit delayed state, x_i* / y* = (b^(i+1) - a^(i+1)) / (i+1):\n";
  for (std::size_t i = 0; i < per_unit.size(); ++i) out << "x" << i << "," << format_double(per_unit[i]) << "\n";
}

}  // namespace polydelay
