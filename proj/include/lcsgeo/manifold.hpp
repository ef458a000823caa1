#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcsgeo/expr.hpp"
#include "lcsgeo/linalg.hpp"

namespace lcsgeo {

using Point = std::vector<double>;

/// Optional orthonormal (or at least constant-gram) frame. vecs[a][i] is the
/// i-th coordinate component of the frame vector E_a.
struct FrameField {
  std::vector<std::vector<Expr>> vecs;
};

/// A single chart of a pseudo-Riemannian manifold: coordinates, domain
/// constraints (expressions that must stay away from zero), the metric as
/// symbolic components, an optional frame and named scalar fields.
///
/// finalize() derives, once, the symbolic objects every downstream operation
/// needs: the inverse metric, metric derivatives, connection coefficients and
/// their derivatives, the Ricci tensor and the scalar curvature. After that
/// the manifold is immutable and safe to share across threads.
struct ChartManifold {
  std::string name;
  int n = 0;
  std::vector<std::string> coords;
  std::vector<Expr> domain;
  std::vector<std::vector<Expr>> metric; // g_ij
  std::optional<FrameField> frame;
  std::map<std::string, Expr> scalar_fields;

  // Derived symbolic data, filled by finalize().
  Expr det_g;
  std::vector<std::vector<Expr>> ginv_e;                            // g^ij
  std::vector<std::vector<std::vector<Expr>>> dg_e;                 // [k][i][j] = d_k g_ij
  std::vector<std::vector<std::vector<Expr>>> gamma_e;              // [k][i][j] = Gamma^k_ij
  std::vector<std::vector<std::vector<std::vector<Expr>>>> dgamma_e; // [m][k][i][j] = d_m Gamma^k_ij
  std::vector<std::vector<Expr>> ricci_e;                           // S_ij
  Expr scal_e;

  void finalize();
};

namespace detail {

inline Expr sym_det(const std::vector<std::vector<Expr>>& m) {
  std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Expr acc = lit(0);
  for (std::size_t j = 0; j < n; ++j) {
    if (is_zero(m[0][j])) continue;
    std::vector<std::vector<Expr>> minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    Expr term = m[0][j] * sym_det(minor);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return simplify(acc);
}

inline Expr sym_cofactor(const std::vector<std::vector<Expr>>& m, int i, int j) {
  std::size_t n = m.size();
  std::vector<std::vector<Expr>> minor;
  minor.reserve(n - 1);
  for (std::size_t r = 0; r < n; ++r) {
    if (static_cast<int>(r) == i) continue;
    std::vector<Expr> row;
    for (std::size_t c = 0; c < n; ++c)
      if (static_cast<int>(c) != j) row.push_back(m[r][c]);
    minor.push_back(std::move(row));
  }
  Expr d = minor.empty() ? lit(1) : sym_det(minor);
  return ((i + j) % 2 == 0) ? d : simplify(-d);
}

} // namespace detail

inline void ChartManifold::finalize() {
  if (n < 2) throw StructureError("manifold dimension must be at least 2");
  if (static_cast<int>(coords.size()) != n)
    throw StructureError("coordinate list does not match dimension");
  if (static_cast<int>(metric.size()) != n)
    throw StructureError("metric must be " + std::to_string(n) + "x" +
                         std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(metric[i].size()) != n)
      throw StructureError("metric row has wrong length");
    for (int j = 0; j < i; ++j)
      if (!same(metric[i][j], metric[j][i]))
        throw StructureError("metric components are not symmetric");
  }
  if (frame) {
    if (static_cast<int>(frame->vecs.size()) != n)
      throw StructureError("frame must have " + std::to_string(n) + " vectors");
    for (auto& v : frame->vecs)
      if (static_cast<int>(v.size()) != n)
        throw StructureError("frame vector has wrong component count");
  }

  det_g = detail::sym_det(metric);

  ginv_e.assign(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr inv = simplify(detail::sym_cofactor(metric, j, i) / det_g);
      ginv_e[i][j] = inv;
      ginv_e[j][i] = inv;
    }

  dg_e.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Expr d = diff(metric[i][j], k);
        dg_e[k][i][j] = d;
        dg_e[k][j][i] = d;
      }

  gamma_e.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n)));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Expr acc = lit(0);
        for (int l = 0; l < n; ++l) {
          if (is_zero(ginv_e[k][l])) continue;
          acc = acc + ginv_e[k][l] *
                          (dg_e[i][l][j] + dg_e[j][l][i] - dg_e[l][i][j]);
        }
        Expr g = simplify(acc / lit(2));
        gamma_e[k][i][j] = g;
        gamma_e[k][j][i] = g;
      }

  dgamma_e.assign(
      n, std::vector<std::vector<std::vector<Expr>>>(
             n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n))));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Expr d = diff(gamma_e[k][i][j], m);
          dgamma_e[m][k][i][j] = d;
          dgamma_e[m][k][j][i] = d;
        }

  // S_ij = sum_k [ d_k Gamma^k_ij - d_i Gamma^k_kj
  //               + Gamma^k_km Gamma^m_ij - Gamma^k_im Gamma^m_kj ]
  ricci_e.assign(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr acc = lit(0);
      for (int k = 0; k < n; ++k) {
        acc = acc + dgamma_e[k][k][i][j] - dgamma_e[i][k][k][j];
        for (int m = 0; m < n; ++m) {
          acc = acc + gamma_e[k][k][m] * gamma_e[m][i][j] -
                gamma_e[k][i][m] * gamma_e[m][k][j];
        }
      }
      Expr s = simplify(acc);
      ricci_e[i][j] = s;
      ricci_e[j][i] = s;
    }

  Expr acc = lit(0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc = acc + ginv_e[i][j] * ricci_e[i][j];
  scal_e = simplify(acc);
}

/// True when `p` satisfies every domain constraint with the given margin.
inline bool in_domain(const ChartManifold& m, const Point& p,
                      double margin = 1e-8) {
  for (const Expr& c : m.domain) {
    double v;
    try {
      v = eval(c, p);
    } catch (const DomainError&) {
      return false;
    }
    if (std::fabs(v) <= margin) return false;
  }
  return true;
}

inline void require_in_domain(const ChartManifold& m, const Point& p,
                              double margin = 1e-8) {
  if (static_cast<int>(p.size()) != m.n)
    throw DomainError("point has wrong dimension");
  for (const Expr& c : m.domain) {
    double v = eval(c, p);
    if (std::fabs(v) <= margin)
      throw DomainError("domain constraint '" + to_string(c) +
                        "' violated (|value| <= margin)");
  }
}

} // namespace lcsgeo
