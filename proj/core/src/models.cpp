#include "polydelay/models.hpp"

#include <cmath>
#include <stdexcept>

namespace polydelay::sir {

void Parameters::validate() const {
  if (!(sigma > 0.0) || !(theta > 0.0)) throw std::invalid_argument("sir: sigma and theta must be positive");
  for (double v : y0) {
    if (!(v >= 0.0)) throw std::invalid_argument("sir: initial populations must be nonnegative");
  }
  if (std::fabs(y0[0] + y0[1] + y0[2] - 1.0) > 1e-14) {
    throw std::invalid_argument("sir: initial populations must sum to one");
  }
}

Parameters reference_parameters(double a, double b) {
  return Parameters{.sigma = 0.1, .theta = 0.05, .weight = beta_polynomial(a, b, 2, 2), .y0 = {0.99, 0.01, 0.0}};
}

DistributedDelayDde distributed(const Parameters& params) {
  params.validate();
  DistributedDelayDde dde{.dimension = 3,
                          .rhs = {},
                          .weight = params.weight,
                          .delayed_components = {kInfected},
                          .history = History::constant({params.y0.begin(), params.y0.end()})};
  dde.rhs = [sigma = params.sigma, theta = params.theta](double, std::span<const double> y, std::span<const double> z,
                                                         std::span<double> dydt) {
    const double infection = sigma * y[kSusceptible] * y[kInfected];
    const double waning = theta * z[kInfected];
    const double recovery = theta * y[kInfected];
    dydt[kSusceptible] = -infection + waning;
    dydt[kInfected] = infection - recovery;
    dydt[kRecovered] = recovery - waning;
  };
  return dde;
}

EquivalentSystem equivalent(const Parameters& params) { return build_equivalent(distributed(params)); }

double conservation_defect(const Trajectory& traj, std::size_t samples) {
  if (traj.dimension() < 3) throw std::invalid_argument("conservation_defect: trajectory has fewer than 3 components");
  double worst = 0.0;
  for (const auto& pt : sample(traj, samples)) {
    const double total = pt.state[kSusceptible] + pt.state[kInfected] + pt.state[kRecovered];
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  return worst;
}

StationaryPoint Equilibria::disease_free(const Parameters& params, double susceptible) const {
  if (!(susceptible >= 0.0 && susceptible <= 1.0)) throw std::invalid_argument("sir: S* must lie in [0, 1]");
  return make_stationary_point(distributed(params), {susceptible, disease_free_infected, 1.0 - susceptible});
}

StationaryPoint Equilibria::endemic(const Parameters& params, double infected) const {
  const double recovered = 1.0 - endemic_susceptible - infected;
  if (!(infected > 0.0) || recovered < 0.0) throw std::invalid_argument("sir: endemic member outside the simplex");
  return make_stationary_point(distributed(params), {endemic_susceptible, infected, recovered});
}

Equilibria equilibria(const Parameters& params) {
  params.validate();
  return Equilibria{.disease_free_infected = 0.0, .endemic_susceptible = params.theta / params.sigma};
}

}  // namespace polydelay::sir
