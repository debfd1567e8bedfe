#pragma once

#include <span>
#include <vector>

namespace carnot {

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
///
/// `a` is row-major n x n and is not modified. On return `values[k]` is the
/// k-th eigenvalue and column k of the row-major `vectors` its unit eigenvector.
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};

SymmetricEigen jacobi_eigen(std::span<const double> a, int n);

/// Allocation-free variant: `a` (n x n) is overwritten, its diagonal holds the
/// eigenvalues on return; `v` receives the eigenvectors as columns.
void jacobi_eigen_inplace(double* a, double* v, int n);

/// Row-major product c = a * b of n x n matrices.
std::vector<double> matmul(std::span<const double> a, std::span<const double> b, int n);

}  // namespace carnot
