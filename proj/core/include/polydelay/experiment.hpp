#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "polydelay/quadrature.hpp"

namespace polydelay {

enum class ModelKind { sir, scalar_benchmark };
enum class Variant { equivalent, quadrature };

/// Flat experiment description. Defaults equal the "case-i" preset.
///
/// `h_max` and the solver tolerances apply in the integration time variable,
/// i.e. scaled time when `scale` is set. `t_end` is always original time.
struct ExperimentConfig {
  ModelKind model = ModelKind::sir;
  Variant variant = Variant::equivalent;
  double sigma = 0.1;
  double theta = 0.05;
  double a = 30.0;
  double b = 150.0;
  int p = 2;
  int q = 2;
  std::size_t m = 1;
  double rtol = 1e-6;
  double atol = 1e-8;
  double h_max = 1e-3;
  std::size_t max_steps = 10'000'000;
  double t_end = 1000.0;
  std::size_t samples = 1000;
  bool scale = true;
  std::array<double, 3> sir_initial = {0.99, 0.01, 0.0};
  double scalar_initial = 1.0;

  /// Throws ConfigError on inconsistent or out-of-range values.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// "case-i": [a, b] = [30, 150], h_max 1e-3; "case-ii": [150, 250], h_max 5e-4.
/// Throws ConfigError for unknown names.
[[nodiscard]] ExperimentConfig preset(std::string_view name);

/// Applies one key=value setting (keys as in the config file). Throws ConfigError.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses a key=value file ('#' starts a comment) on top of `base`. Errors carry
/// "<source>:<line>:" prefixes. A `preset` key resets all fields to that preset.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in, ExperimentConfig base, std::string_view source = "config");

[[nodiscard]] ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

/// Header plus rows; the first column is time.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Comma-separated with a header row; values rendered with 17 significant digits.
void write_csv(std::ostream& out, const Table& table);
[[nodiscard]] Table read_csv(std::istream& in);
/// 17-significant-digit, locale-independent rendering.
[[nodiscard]] std::string format_double(double v);

struct SolveResult {
  Table table;  // time axis in original time
  std::size_t steps_taken = 0;
  std::size_t steps_rejected = 0;
  double time_scale = 1.0;
  double integration_end = 0.0;
};

/// Builds the configured model and variant, optionally scales it, solves and
/// samples `samples` equidistant points. Throws ConfigError / SolverError.
[[nodiscard]] SolveResult run_solve(const ExperimentConfig& config);

struct ConvergenceReport {
  std::vector<std::size_t> m_values;
  std::vector<std::string> components;
  /// differences[k][c]: max over the sample grid of |quadrature(m_k) - equivalent| for component c.
  std::vector<std::vector<double>> differences;
  std::size_t reference_steps = 0;
  std::vector<std::size_t> quadrature_steps;
  std::size_t samples = 0;
  double integration_end = 0.0;
};

/// One equivalent-system reference solve plus one quadrature solve per m.
/// Quadrature solves run on up to POLYDELAY_THREADS threads; results are
/// ordered by m.
[[nodiscard]] ConvergenceReport run_convergence(const ExperimentConfig& config, const std::vector<std::size_t>& m_values);

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
void write_convergence_summary(std::ostream& out, const ConvergenceReport& report);

struct QuadTable {
  QuadratureRule rule;
  /// |sum w_k tau_k^i - moment_i| / max(1, |moment_i|) for i = 0..2m-1.
  std::vector<double> residuals;
};

/// Beta(p, q) rule on the configured, unscaled interval [a, b].
[[nodiscard]] QuadTable run_quad_table(const ExperimentConfig& config, std::size_t m);
void write_quad_table(std::ostream& out, const QuadTable& table);

/// Human-readable equilibria and stationary auxiliary values of the configured model.
void write_stationary_report(std::ostream& out, const ExperimentConfig& config);

/// Parallelism cap from POLYDELAY_THREADS (unset or invalid: hardware concurrency, at least 1).
[[nodiscard]] std::size_t configured_threads();

}  // namespace polydelay
