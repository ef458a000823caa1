#pragma once

#include <cmath>
#include <vector>

#include "lcsgeo/errors.hpp"

namespace lcsgeo {

/// Small dense square matrix of doubles.
struct Matrix {
  int n = 0;
  std::vector<double> d;

  Matrix() = default;
  explicit Matrix(int dim) : n(dim), d(static_cast<std::size_t>(dim) * dim, 0.0) {}

  double& at(int i, int j) { return d[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }

  static Matrix identity(int dim) {
    Matrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

/// Gauss-Jordan inverse with partial pivoting. Throws StructureError when the
/// matrix is numerically singular.
inline Matrix invert(const Matrix& in) {
  int n = in.n;
  Matrix a = in;
  Matrix inv = Matrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::fabs(a.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      double v = std::fabs(a.at(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-14) throw StructureError("singular matrix");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a.at(pivot, c), a.at(col, c));
        std::swap(inv.at(pivot, c), inv.at(col, c));
      }
    }
    double p = a.at(col, col);
    for (int c = 0; c < n; ++c) {
      a.at(col, c) /= p;
      inv.at(col, c) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a.at(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a.at(r, c) -= f * a.at(col, c);
        inv.at(r, c) -= f * inv.at(col, c);
      }
    }
  }
  return inv;
}

inline double identity_residual(const Matrix& a, const Matrix& b) {
  int n = a.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a.at(i, k) * b.at(k, j);
      worst = std::max(worst, std::fabs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

} // namespace lcsgeo
