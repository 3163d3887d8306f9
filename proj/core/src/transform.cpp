#include "polydelay/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polydelay {
namespace {

constexpr std::size_t kHistoryNodes = 48;

std::vector<double> powers(double x, std::size_t n) {
  std::vector<double> out(n + 1);
  double v = 1.0;
  for (std::size_t i = 0; i <= n; ++i) {
    out[i] = v;
    v *= x;
  }
  return out;
}

std::vector<double> delayed_integrals(const DistributedDelayDde& dde, std::span<const double> y) {
  std::vector<double> z(dde.dimension, 0.0);
  for (std::size_t c : dde.delayed_components) z[c] = y[c];
  return z;
}

}  // namespace

void DistributedDelayDde::validate() const {
  if (dimension == 0) throw std::invalid_argument("DistributedDelayDde: dimension must be positive");
  if (!rhs) throw std::invalid_argument("DistributedDelayDde: missing right-hand side");
  if (delayed_components.empty()) throw std::invalid_argument("DistributedDelayDde: no delayed components");
  for (std::size_t k = 0; k < delayed_components.size(); ++k) {
    if (delayed_components[k] >= dimension) {
      throw std::invalid_argument("DistributedDelayDde: delayed component index out of range");
    }
    if (k > 0 && delayed_components[k] <= delayed_components[k - 1]) {
      throw std::invalid_argument("DistributedDelayDde: delayed components must be ascending and unique");
    }
  }
  if (history.dimension() != dimension) throw std::invalid_argument("DistributedDelayDde: history dimension mismatch");
}

std::vector<double> aux_initial_values(const std::function<double(double)>& phi, const PolynomialWeight& w,
                                       const QuadratureRule& rule) {
  if (!same_interval(rule.lower, rule.upper, w.lower(), w.upper())) {
    throw std::invalid_argument("aux_initial_values: rule interval does not match the weight interval");
  }
  // The rule integrates against the uniform density 1 / (b - a).
  const double width = w.upper() - w.lower();
  std::vector<double> out(w.degree() + 1, 0.0);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double tau = rule.nodes[k];
    const double v = width * rule.weights[k] * phi(-tau);
    double p = 1.0;
    for (double& x : out) {
      x += v * p;
      p *= tau;
    }
  }
  return out;
}

std::vector<double> aux_initial_values(const History& history, std::size_t component, const PolynomialWeight& w) {
  if (component >= history.dimension()) throw std::invalid_argument("aux_initial_values: component out of range");
  if (history.is_constant()) return stationary_aux(history.constant_value()[component], w);
  std::vector<double> buf(history.dimension());
  const auto phi = [&](double t) {
    history.evaluate(t, buf);
    return buf[component];
  };
  return aux_initial_values(phi, w, gauss_legendre(kHistoryNodes, w.lower(), w.upper()));
}

std::vector<double> stationary_aux(double y_star, const PolynomialWeight& w) {
  const double a = w.lower();
  const double b = w.upper();
  std::vector<double> out(w.degree() + 1);
  double ap = a;
  double bp = b;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = y_star * (bp - ap) / static_cast<double>(i + 1);
    ap *= a;
    bp *= b;
  }
  return out;
}

EquivalentSystem build_equivalent(const DistributedDelayDde& dde) {
  dde.validate();
  const std::size_t d = dde.dimension;
  const std::size_t n = dde.weight.degree();
  const std::size_t chains = dde.delayed_components.size();
  const double a = dde.weight.lower();
  const double b = dde.weight.upper();
  const bool degenerate = a == 0.0;

  EquivalentSystem sys{.base = dde,
                       .degree = n,
                       .aux_count = (n + 1) * chains,
                       .delay_a = a,
                       .delay_b = b,
                       .time_scale = 1.0,
                       .aux_initial = {},
                       .assembled = {}};
  for (std::size_t c : dde.delayed_components) {
    const auto chain = aux_initial_values(dde.history, c, dde.weight);
    sys.aux_initial.insert(sys.aux_initial.end(), chain.begin(), chain.end());
  }

  DiscreteDelayDde& out = sys.assembled;
  out.dimension = d + sys.aux_count;
  out.delays = degenerate ? std::vector<double>{b} : std::vector<double>{a, b};

  if (dde.history.is_constant()) {
    std::vector<double> init(dde.history.constant_value().begin(), dde.history.constant_value().end());
    init.insert(init.end(), sys.aux_initial.begin(), sys.aux_initial.end());
    out.history = History::constant(std::move(init));
  } else {
    out.history = History::from_function(
        out.dimension, [phi = dde.history, aux = sys.aux_initial, d](double t, std::span<double> dst) {
          phi.evaluate(t, dst.first(d));
          std::copy(aux.begin(), aux.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
        });
  }

  std::vector<double> alpha(dde.weight.coeffs().begin(), dde.weight.coeffs().end());
  out.rhs = [d, n, degenerate, f = dde.rhs, comps = dde.delayed_components, alpha = std::move(alpha),
             apow = powers(a, n), bpow = powers(b, n)](double t, std::span<const double> y,
                                                       const DelayedStates& delayed, std::span<double> dydt) {
    std::vector<double> z(d, 0.0);
    for (std::size_t j = 0; j < comps.size(); ++j) {
      const auto x = y.subspan(d + j * (n + 1), n + 1);
      double sum = 0.0;
      for (std::size_t i = 0; i <= n; ++i) sum += alpha[i] * x[i];
      z[comps[j]] = sum;
    }
    f(t, y.first(d), z, dydt.first(d));

    for (std::size_t j = 0; j < comps.size(); ++j) {
      const std::size_t c = comps[j];
      const double ya = degenerate ? y[c] : delayed(c, 0);
      const double yb = delayed(c, degenerate ? 0 : 1);
      const std::size_t off = d + j * (n + 1);
      dydt[off] = ya - yb;
      for (std::size_t i = 1; i <= n; ++i) {
        dydt[off + i] = ya * apow[i] - yb * bpow[i] + static_cast<double>(i) * y[off + i - 1];
      }
    }
  };
  return sys;
}

DistributedDelayDde scale_distributed(const DistributedDelayDde& dde) {
  dde.validate();
  const double b = dde.weight.upper();
  DistributedDelayDde out{.dimension = dde.dimension,
                          .rhs = {},
                          .weight = dde.weight.rescaled_to_unit(),
                          .delayed_components = dde.delayed_components,
                          .history = dde.history};
  out.rhs = [b, f = dde.rhs](double s, std::span<const double> y, std::span<const double> z, std::span<double> dydt) {
    f(b * s, y, z, dydt);
    for (double& v : dydt) v *= b;
  };
  if (!dde.history.is_constant()) {
    out.history = History::from_function(dde.dimension,
                                         [b, phi = dde.history](double s, std::span<double> dst) { phi.evaluate(b * s, dst); });
  }
  return out;
}

EquivalentSystem scale_system(const EquivalentSystem& sys) {
  const double b = sys.base.weight.upper();
  EquivalentSystem out = build_equivalent(scale_distributed(sys.base));
  out.time_scale = sys.time_scale * b;
  return out;
}

StructureMatrix structure_matrix(std::size_t n) {
  StructureMatrix a{.n = n, .entries = Eigen::MatrixXd::Zero(n + 1, n + 1)};
  for (std::size_t i = 1; i <= n; ++i) {
    a.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = static_cast<double>(i);
  }
  return a;
}

Eigen::MatrixXd nilpotent_exponential(const StructureMatrix& a, double t) {
  const auto size = static_cast<Eigen::Index>(a.n + 1);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(size, size);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(size, size);
  for (std::size_t j = 1; j <= a.n; ++j) {
    term = (term * a.entries) * (t / static_cast<double>(j));
    result += term;
  }
  return result;
}

double stationary_residual(const DistributedDelayDde& dde, std::span<const double> y_star) {
  if (y_star.size() != dde.dimension) throw std::invalid_argument("stationary_residual: dimension mismatch");
  const auto z = delayed_integrals(dde, y_star);
  std::vector<double> f(dde.dimension);
  dde.rhs(0.0, y_star, z, f);
  double r = 0.0;
  for (double v : f) r = std::max(r, std::fabs(v));
  return r;
}

StationaryPoint make_stationary_point(const DistributedDelayDde& dde, std::vector<double> y_star) {
  if (stationary_residual(dde, y_star) > 1e-10) {
    throw std::invalid_argument("make_stationary_point: f(y*, y*) != 0");
  }
  StationaryPoint sp{.y_star = std::move(y_star), .x_star = {}};
  for (std::size_t c : dde.delayed_components) {
    const auto chain = stationary_aux(sp.y_star[c], dde.weight);
    sp.x_star.insert(sp.x_star.end(), chain.begin(), chain.end());
  }
  return sp;
}

std::vector<StationaryPoint> find_stationary_points(const DistributedDelayDde& dde,
                                                    std::span<const std::vector<double>> guesses) {
  dde.validate();
  const std::size_t d = dde.dimension;
  const auto dim = static_cast<Eigen::Index>(d);
  const auto residual = [&](const Eigen::VectorXd& y) {
    const std::vector<double> yv(y.data(), y.data() + d);
    const auto z = delayed_integrals(dde, yv);
    std::vector<double> f(d);
    dde.rhs(0.0, yv, z, f);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(f.data(), dim));
  };

  std::vector<StationaryPoint> roots;
  for (const auto& guess : guesses) {
    if (guess.size() != d) throw std::invalid_argument("find_stationary_points: guess dimension mismatch");
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(guess.data(), dim);
    Eigen::VectorXd r = residual(y);
    bool converged = r.lpNorm<Eigen::Infinity>() <= 1e-12;
    for (int iter = 0; iter < 100 && !converged; ++iter) {
      Eigen::MatrixXd jac(dim, dim);
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double h = 1e-7 * std::max(1.0, std::fabs(y[k]));
        Eigen::VectorXd yp = y;
        Eigen::VectorXd ym = y;
        yp[k] += h;
        ym[k] -= h;
        jac.col(k) = (residual(yp) - residual(ym)) / (2.0 * h);
      }
      const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r);
      double lambda = 1.0;
      bool improved = false;
      for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
        const Eigen::VectorXd trial = y + lambda * step;
        const Eigen::VectorXd rt = residual(trial);
        if (rt.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) {
          y = trial;
          r = rt;
          improved = true;
          break;
        }
      }
      if (!improved) break;
      converged = r.lpNorm<Eigen::Infinity>() <= 1e-12;
    }
    if (!converged) continue;
    std::vector<double> yv(y.data(), y.data() + d);
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const StationaryPoint& sp) {
      for (std::size_t c = 0; c < d; ++c) {
        if (std::fabs(sp.y_star[c] - yv[c]) > 1e-8) return false;
      }
      return true;
    });
    if (!duplicate) roots.push_back(make_stationary_point(dde, std::move(yv)));
  }
  return roots;
}

}  // namespace polydelay
