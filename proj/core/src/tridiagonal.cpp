#include "polydelay/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "polydelay/error.hpp"

namespace polydelay {

TridiagonalEigen symmetric_tridiagonal_eigen(std::span<const double> diag, std::span<const double> offdiag) {
  const std::size_t n = diag.size();
  if (n == 0) throw std::invalid_argument("symmetric_tridiagonal_eigen: empty matrix");
  if (offdiag.size() + 1 != n) throw std::invalid_argument("symmetric_tridiagonal_eigen: size mismatch");

  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e(n, 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;

  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 50 * n;
  std::size_t sweeps = 0;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > max_sweeps) {
        throw NumericalError("symmetric_tridiagonal_eigen: no convergence after 50*n sweeps");
      }

      // Wilkinson shift from the leading 2x2 block.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool deflated = false;
      for (std::size_t i = m; i-- > l;) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;

        const double zf = z[i + 1];
        z[i + 1] = s * z[i] + c * zf;
        z[i] = c * z[i] - s * zf;
      }
      if (deflated) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

  TridiagonalEigen out;
  out.values.reserve(n);
  out.first_components.reserve(n);
  for (std::size_t k : order) {
    out.values.push_back(d[k]);
    out.first_components.push_back(z[k]);
  }
  return out;
}

}  // namespace polydelay
