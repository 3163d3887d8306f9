#pragma once

#include <span>
#include <vector>

namespace polydelay {

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalised eigenvector, sorted by ascending eigenvalue.
struct TridiagonalEigen {
  std::vector<double> values;
  std::vector<double> first_components;
};

/// Implicit QL iteration with Wilkinson shifts. Only the first row of the
/// eigenvector matrix is accumulated. `offdiag` holds the n-1 sub-diagonal
/// entries. Throws NumericalError when the total number of sweeps exceeds
/// 50 * n.
[[nodiscard]] TridiagonalEigen symmetric_tridiagonal_eigen(std::span<const double> diag,
                                                           std::span<const double> offdiag);

}  // namespace polydelay
