// polydelay: solve SIR / scalar DDEs with polynomially distributed delay via the
// equivalent two-delay system or Gaussian-quadrature discretisation.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 internal
// numerical error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polydelay/error.hpp"
#include "polydelay/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitNumerical = 4;

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::optional<std::string> model;
  std::optional<std::string> variant;
  std::optional<std::size_t> m;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> h_max;
  std::optional<double> t_end;
  std::optional<std::size_t> samples;
  std::vector<std::string> settings;
  std::optional<std::string> out_path;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--preset", o.preset, "Parameter preset: case-i or case-ii");
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--model", o.model, "sir or scalar-benchmark");
  cmd->add_option("--variant", o.variant, "equivalent or quadrature");
  cmd->add_option("--m", o.m, "Number of quadrature nodes");
  cmd->add_option("--rtol", o.rtol, "Relative error tolerance");
  cmd->add_option("--atol", o.atol, "Absolute error tolerance");
  cmd->add_option("--hmax", o.h_max, "Maximum step size (integration time)");
  cmd->add_option("--t-end", o.t_end, "Horizon in original time");
  cmd->add_option("--samples", o.samples, "Number of equidistant output points");
  cmd->add_option("--set", o.settings, "Additional key=value override (repeatable)");
  cmd->add_option("--out", o.out_path, "Write CSV output to this path instead of stdout");
}

polydelay::ExperimentConfig resolve(const Overrides& o) {
  polydelay::ExperimentConfig config = o.preset ? polydelay::preset(*o.preset) : polydelay::ExperimentConfig{};
  if (o.config_path) config = polydelay::load_config(*o.config_path, config);
  if (o.model) polydelay::apply_setting(config, "model", *o.model);
  if (o.variant) polydelay::apply_setting(config, "variant", *o.variant);
  if (o.m) config.m = *o.m;
  if (o.rtol) config.rtol = *o.rtol;
  if (o.atol) config.atol = *o.atol;
  if (o.h_max) config.h_max = *o.h_max;
  if (o.t_end) config.t_end = *o.t_end;
  if (o.samples) config.samples = *o.samples;
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw polydelay::ConfigError("--set expects key=value, got '" + s + "'");
    polydelay::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  config.validate();
  return config;
}

std::vector<std::size_t> parse_m_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw polydelay::ConfigError("invalid --m-list entry '" + item + "'");
    }
  }
  return out;
}

template <typename Writer>
void emit(const std::optional<std::string>& path, Writer&& write) {
  if (!path) {
    write(std::cout);
    return;
  }
  std::ofstream file(*path);
  if (!file) throw polydelay::ConfigError("cannot open output file '" + *path + "'");
  write(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay differential equations with polynomially distributed delay"};
  app.require_subcommand(1);

  Overrides solve_opts, conv_opts, quad_opts, stat_opts;
  std::string m_list = "1,2,3,4,5,6,7,8";

  auto* solve_cmd = app.add_subcommand("solve", "Solve one configuration and write sampled CSV");
  add_common_options(solve_cmd, solve_opts);
  auto* conv_cmd = app.add_subcommand("convergence", "Quadrature-vs-equivalent maximum differences per m");
  add_common_options(conv_cmd, conv_opts);
  conv_cmd->add_option("--m-list", m_list, "Comma-separated ascending node counts");
  auto* quad_cmd = app.add_subcommand("quad", "Print the Gauss-Jacobi rule and its exactness residuals");
  add_common_options(quad_cmd, quad_opts);
  auto* stat_cmd = app.add_subcommand("stationary", "Report stationary solutions and auxiliary values");
  add_common_options(stat_cmd, stat_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve_cmd) {
      const auto config = resolve(solve_opts);
      const auto result = polydelay::run_solve(config);
      emit(solve_opts.out_path, [&](std::ostream& os) { polydelay::write_csv(os, result.table); });
      std::cerr << "steps: " << result.steps_taken << " accepted, " << result.steps_rejected << " rejected\n";
    } else if (*conv_cmd) {
      const auto config = resolve(conv_opts);
      const auto report = polydelay::run_convergence(config, parse_m_list(m_list));
      emit(conv_opts.out_path, [&](std::ostream& os) { polydelay::write_convergence_csv(os, report); });
      polydelay::write_convergence_summary(conv_opts.out_path ? std::cout : std::cerr, report);
    } else if (*quad_cmd) {
      const auto config = resolve(quad_opts);
      const auto table = polydelay::run_quad_table(config, config.m);
      emit(quad_opts.out_path, [&](std::ostream& os) { polydelay::write_quad_table(os, table); });
    } else if (*stat_cmd) {
      const auto config = resolve(stat_opts);
      emit(stat_opts.out_path, [&](std::ostream& os) { polydelay::write_stationary_report(os, config); });
    }
  } catch (const polydelay::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const polydelay::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
