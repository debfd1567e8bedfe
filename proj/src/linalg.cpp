#include "carnot/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace carnot {

void jacobi_eigen_inplace(double* a, double* v, int n) {
  for (int i = 0; i < n * n; ++i) v[i] = 0.0;
  for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [n](double* m, int i, int j) -> double& { return m[i * n + j]; };

  double scale = 0.0;
  for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) off += at(a, i, j) * at(a, i, j);
    }
    if (off <= 1e-34 * scale * scale || scale == 0.0) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

SymmetricEigen jacobi_eigen(std::span<const double> a_in, int n) {
  if (a_in.size() != static_cast<std::size_t>(n * n)) throw std::invalid_argument("jacobi_eigen: size");
  std::vector<double> a(a_in.begin(), a_in.end());
  SymmetricEigen out;
  out.vectors.resize(a.size());
  jacobi_eigen_inplace(a.data(), out.vectors.data(), n);
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a[i * n + i];
  return out;
}

std::vector<double> matmul(std::span<const double> a, std::span<const double> b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
  return c;
}

}  // namespace carnot
