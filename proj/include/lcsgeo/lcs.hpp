#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcsgeo/checks.hpp"
#include "lcsgeo/geometry.hpp"

namespace lcsgeo {

// ---------------------------------------------------------------------------
// Lorentzian concircular structures.
//
// A structure is derived from a declared vector field xi: eta is its metric
// dual, phi = I + eta (x) xi, alpha is extracted from trace(D xi)/(n-1) and
// rho = -xi(alpha). Every defining axiom and every derived identity is then
// checked as a pointwise residual over a sample set.
// ---------------------------------------------------------------------------

struct LcsStructure {
  std::vector<Expr> xi;                    // xi^i
  std::vector<Expr> eta;                   // eta_i
  std::vector<std::vector<Expr>> phi;      // phi[j][i] = phi^j_i
  std::vector<std::vector<Expr>> nabla_xi; // nabla_xi[i][j] = (D_i xi)^j
  Expr alpha;                              // declared if given, else derived
  Expr alpha_derived;                      // trace route, kept for agreement checks
  Expr rho;                                // -xi(alpha)
};

namespace detail {

inline Expr scalar_along(const ChartManifold& m, std::span<const Expr> x,
                         const Expr& h) {
  Expr acc = lit(0);
  for (int i = 0; i < m.n; ++i) acc = acc + x[i] * diff(h, i);
  return simplify(acc);
}

} // namespace detail

inline std::vector<Expr> one_form_exprs(const ChartManifold& m,
                                        std::span<const Expr> x) {
  std::vector<Expr> eta(m.n);
  for (int i = 0; i < m.n; ++i) {
    Expr acc = lit(0);
    for (int j = 0; j < m.n; ++j) acc = acc + m.metric[i][j] * x[j];
    eta[i] = simplify(acc);
  }
  return eta;
}

inline std::vector<std::vector<Expr>> nabla_vector_exprs(
    const ChartManifold& m, std::span<const Expr> x) {
  std::vector<std::vector<Expr>> nab(m.n, std::vector<Expr>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      Expr acc = diff(x[j], i);
      for (int k = 0; k < m.n; ++k) acc = acc + m.gamma_e[j][i][k] * x[k];
      nab[i][j] = simplify(acc);
    }
  return nab;
}

inline Expr vector_norm_sq_expr(const ChartManifold& m,
                                std::span<const Expr> x) {
  Expr acc = lit(0);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) acc = acc + m.metric[i][j] * x[i] * x[j];
  return simplify(acc);
}

/// Derive (eta, phi, alpha, rho) from xi and validate the defining
/// properties at the sampled points. Throws StructureError when xi is not a
/// unit timelike concircular field or the extracted alpha vanishes.
inline LcsStructure derive_structure(
    const ChartManifold& m, std::vector<Expr> xi,
    const std::vector<Point>& points, double tol = 1e-9,
    const std::optional<Expr>& declared_alpha = std::nullopt) {
  if (static_cast<int>(xi.size()) != m.n)
    throw StructureError("xi has wrong component count");

  LcsStructure s;
  s.xi = std::move(xi);
  s.eta = one_form_exprs(m, s.xi);

  Expr norm = vector_norm_sq_expr(m, s.xi);
  for (const Point& p : points) {
    double v = eval(norm, p);
    if (std::fabs(v + 1.0) > tol)
      throw StructureError("xi is not unit timelike: g(xi,xi) = " +
                           std::to_string(v) + " at a sampled point");
  }

  s.phi.assign(m.n, std::vector<Expr>(m.n));
  for (int j = 0; j < m.n; ++j)
    for (int i = 0; i < m.n; ++i)
      s.phi[j][i] = simplify((i == j ? lit(1) : lit(0)) + s.eta[i] * s.xi[j]);

  s.nabla_xi = nabla_vector_exprs(m, s.xi);

  Expr trace = lit(0);
  for (int i = 0; i < m.n; ++i) trace = trace + s.nabla_xi[i][i];
  s.alpha_derived = simplify(trace / lit(m.n - 1));

  if (declared_alpha) {
    for (const Point& p : points) {
      double d = eval(*declared_alpha, p) - eval(s.alpha_derived, p);
      if (std::fabs(d) > tol)
        throw StructureError(
            "declared alpha disagrees with trace(D xi)/(n-1) by " +
            std::to_string(d) + " at a sampled point");
    }
    s.alpha = *declared_alpha;
  } else {
    s.alpha = s.alpha_derived;
  }

  for (const Point& p : points) {
    if (std::fabs(eval(s.alpha, p)) <= tol)
      throw StructureError("alpha vanishes at a sampled point (it must be "
                           "nowhere zero)");
  }

  // Concircularity: D xi = alpha (I + eta (x) xi).
  for (const Point& p : points) {
    double a = eval(s.alpha, p);
    TensorValue resid(m.n, {Variance::Low, Variance::Up});
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j)
        resid(i, j) = eval(s.nabla_xi[i][j], p) -
                      a * ((i == j ? 1.0 : 0.0) +
                           eval(s.eta[i], p) * eval(s.xi[j], p));
    if (residual_max(m, p, resid) > tol)
      throw StructureError("xi is not concircular: |D xi - alpha(I + eta(x)xi)|"
                           " = " + std::to_string(resid.max_abs()) +
                           " at a sampled point");
  }

  s.rho = simplify(-detail::scalar_along(m, s.xi, s.alpha));
  return s;
}

namespace detail {

inline void fold_max(StructureReport& rep, std::size_t row, double v) {
  if (v > rep[row].value) rep[row].value = v;
}

} // namespace detail

/// Residuals of the defining structure axioms plus closedness of eta and the
/// vanishing of the Nijenhuis tensor of phi. Failures are reported, never
/// thrown.
inline StructureReport verify_axioms(const ChartManifold& m,
                                     const LcsStructure& s,
                                     const std::vector<Point>& points) {
  int n = m.n;
  StructureReport rep = {
      {"g(xi,xi) = -1"},
      {"phi(xi) = 0"},
      {"eta o phi = 0"},
      {"eta(xi) = -1"},
      {"phi^2 = I + eta(x)xi"},
      {"g(phi.,phi.) = g + eta(x)eta"},
      {"(D_X phi)Y = alpha[g(X,Y)xi + 2eta(X)eta(Y)xi + eta(Y)X]"},
      {"D xi = alpha(I + eta(x)xi)"},
      {"d alpha = rho eta"},
      {"d eta = 0"},
      {"Nijenhuis(phi) = 0"},
  };

  Expr norm = vector_norm_sq_expr(m, s.xi);

  for (const Point& p : points) {
    std::vector<double> xi(n), eta(n), alpha_row;
    for (int i = 0; i < n; ++i) xi[i] = eval(s.xi[i], p);
    for (int i = 0; i < n; ++i) eta[i] = eval(s.eta[i], p);
    double a = eval(s.alpha, p);
    double rho = eval(s.rho, p);
    Matrix g = detail::eval_matrix(m.metric, p);
    std::vector<std::vector<double>> phi(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) phi[j][i] = eval(s.phi[j][i], p);

    detail::fold_max(rep, 0, std::fabs(eval(norm, p) + 1.0));

    {
      TensorValue t(n, {Variance::Up});
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += phi[j][i] * xi[i];
        t(j) = v;
      }
      detail::fold_max(rep, 1, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low});
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += eta[j] * phi[j][i];
        t(i) = v;
      }
      detail::fold_max(rep, 2, residual_max(m, p, t));
    }
    {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += eta[i] * xi[i];
      detail::fold_max(rep, 3, std::fabs(v + 1.0));
    }
    {
      TensorValue t(n, {Variance::Up, Variance::Low});
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int j = 0; j < n; ++j) v += phi[k][j] * phi[j][i];
          v -= (k == i ? 1.0 : 0.0) + eta[i] * xi[k];
          t(k, i) = v;
        }
      detail::fold_max(rep, 4, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) v += g.at(k, l) * phi[k][i] * phi[l][j];
          v -= g.at(i, j) + eta[i] * eta[j];
          t(i, j) = v;
        }
      detail::fold_max(rep, 5, residual_max(m, p, t));
    }
    {
      // (D_i phi)^k_j - alpha [ g_ij xi^k + 2 eta_i eta_j xi^k + eta_j d^k_i ]
      TensorField f;
      f.n = n;
      f.var = {Variance::Up, Variance::Low};
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) f.comp.push_back(s.phi[k][i]);
      TensorValue nab = covariant_derivative(m, f, p); // (i, k, j)
      TensorValue t(n, {Variance::Low, Variance::Up, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
          for (int j = 0; j < n; ++j)
            t(i, k, j) = nab(i, k, j) -
                         a * (g.at(i, j) * xi[k] +
                              2.0 * eta[i] * eta[j] * xi[k] +
                              eta[j] * (k == i ? 1.0 : 0.0));
      detail::fold_max(rep, 6, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low, Variance::Up});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          t(i, j) = eval(s.nabla_xi[i][j], p) -
                    a * ((i == j ? 1.0 : 0.0) + eta[i] * xi[j]);
      detail::fold_max(rep, 7, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low});
      for (int i = 0; i < n; ++i)
        t(i) = eval(diff(s.alpha, i), p) - rho * eta[i];
      detail::fold_max(rep, 8, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          t(i, j) = eval(diff(s.eta[j], i), p) - eval(diff(s.eta[i], j), p);
      detail::fold_max(rep, 9, residual_max(m, p, t));
    }
    {
      // N^m_ij = phi^k_i d_k phi^m_j - phi^k_j d_k phi^m_i
      //        + phi^m_k d_j phi^k_i - phi^m_k d_i phi^k_j
      TensorValue t(n, {Variance::Up, Variance::Low, Variance::Low});
      std::vector<std::vector<std::vector<double>>> dphi(
          n, std::vector<std::vector<double>>(n, std::vector<double>(n)));
      for (int d = 0; d < n; ++d)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            dphi[d][k][i] = eval(diff(s.phi[k][i], d), p);
      for (int mm = 0; mm < n; ++mm)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) {
              v += phi[k][i] * dphi[k][mm][j] - phi[k][j] * dphi[k][mm][i];
              v += phi[mm][k] * dphi[j][k][i] - phi[mm][k] * dphi[i][k][j];
            }
            t(mm, i, j) = v;
          }
      detail::fold_max(rep, 10, residual_max(m, p, t));
    }
  }
  return rep;
}

/// Residuals of the derived concircular identities: behaviour of xi under the
/// connection, the curvature identities carrying the factor alpha^2 - rho,
/// D eta, and the Lie derivatives along xi.
inline StructureReport verify_concircular_identities(
    const ChartManifold& m, const LcsStructure& s,
    const std::vector<Point>& points) {
  int n = m.n;
  StructureReport rep = {
      {"eta(D_X xi) = 0"},
      {"D_xi xi = 0"},
      {"R(X,Y)xi = (alpha^2-rho)[eta(Y)X - eta(X)Y]"},
      {"eta(R(X,Y)Z) = (alpha^2-rho)[eta(X)g(Y,Z) - eta(Y)g(X,Z)]"},
      {"eta(R(X,Y)xi) = 0"},
      {"D eta = alpha(g + eta(x)eta)"},
      {"D_xi eta = 0"},
      {"L_xi phi = 0"},
      {"L_xi eta = 0"},
      {"L_xi g = 2 D eta"},
  };

  TensorField eta_field;
  eta_field.n = n;
  eta_field.var = {Variance::Low};
  eta_field.comp = s.eta;
  CovariantDerivative cov_eta(m, eta_field);

  for (const Point& p : points) {
    std::vector<double> xi(n), eta(n);
    for (int i = 0; i < n; ++i) xi[i] = eval(s.xi[i], p);
    for (int i = 0; i < n; ++i) eta[i] = eval(s.eta[i], p);
    double c = eval(s.alpha, p) * eval(s.alpha, p) - eval(s.rho, p);
    double a = eval(s.alpha, p);
    Matrix g = detail::eval_matrix(m.metric, p);
    std::vector<std::vector<double>> nab(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) nab[i][j] = eval(s.nabla_xi[i][j], p);

    {
      TensorValue t(n, {Variance::Low});
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += eta[j] * nab[i][j];
        t(i) = v;
      }
      detail::fold_max(rep, 0, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Up});
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += xi[i] * nab[i][j];
        t(j) = v;
      }
      detail::fold_max(rep, 1, residual_max(m, p, t));
    }

    RiemannAt r = riemann(m, p);
    {
      TensorValue t(n, {Variance::Up, Variance::Low, Variance::Low});
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) v += r.up(l, i, j, k) * xi[k];
            v -= c * (eta[j] * (l == i ? 1.0 : 0.0) -
                      eta[i] * (l == j ? 1.0 : 0.0));
            t(l, i, j) = v;
          }
      detail::fold_max(rep, 2, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low, Variance::Low, Variance::Low});
      TensorValue tz(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            double v = 0.0;
            for (int l = 0; l < n; ++l) v += eta[l] * r.up(l, i, j, k);
            t(i, j, k) =
                v - c * (eta[i] * g.at(j, k) - eta[j] * g.at(i, k));
          }
          double vz = 0.0;
          for (int l = 0; l < n; ++l)
            for (int k = 0; k < n; ++k) vz += eta[l] * r.up(l, i, j, k) * xi[k];
          tz(i, j) = vz;
        }
      detail::fold_max(rep, 3, residual_max(m, p, t));
      detail::fold_max(rep, 4, residual_max(m, p, tz));
    }

    TensorValue deta = cov_eta.at(p); // (i, j) = (D_i eta)_j
    {
      TensorValue t(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          t(i, j) = deta(i, j) - a * (g.at(i, j) + eta[i] * eta[j]);
      detail::fold_max(rep, 5, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low});
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += xi[i] * deta(i, j);
        t(j) = v;
      }
      detail::fold_max(rep, 6, residual_max(m, p, t));
    }

    {
      // (L_xi phi)^j_i = xi^k d_k phi^j_i - phi^k_i d_k xi^j + phi^j_k d_i xi^k
      TensorValue t(n, {Variance::Up, Variance::Low});
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double v = 0.0;
          for (int k = 0; k < n; ++k) {
            v += xi[k] * eval(diff(s.phi[j][i], k), p);
            v -= eval(s.phi[k][i], p) * eval(diff(s.xi[j], k), p);
            v += eval(s.phi[j][k], p) * eval(diff(s.xi[k], i), p);
          }
          t(j, i) = v;
        }
      detail::fold_max(rep, 7, residual_max(m, p, t));
    }
    {
      // (L_xi eta)_i = xi^k d_k eta_i + eta_k d_i xi^k
      TensorValue t(n, {Variance::Low});
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) {
          v += xi[k] * eval(diff(s.eta[i], k), p);
          v += eta[k] * eval(diff(s.xi[k], i), p);
        }
        t(i) = v;
      }
      detail::fold_max(rep, 8, residual_max(m, p, t));
    }
    {
      TensorValue lg = lie_derivative_metric(m, s.xi, p);
      TensorValue t(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = lg(i, j) - 2.0 * deta(i, j);
      detail::fold_max(rep, 9, residual_max(m, p, t));
    }
  }
  return rep;
}

/// Identities tying the Ricci tensor to the structure: S(.,xi), the behaviour
/// of S under phi, the relation between xi(alpha) and rho, and the Ricci
/// operator's compatibility with phi and xi.
inline StructureReport verify_ricci_structure(const ChartManifold& m,
                                              const LcsStructure& s,
                                              const std::vector<Point>& points) {
  int n = m.n;
  StructureReport rep = {
      {"S(X,xi) = (n-1)(alpha^2-rho) eta(X)"},
      {"S(phi X, phi Y) = S(X,Y) + (n-1)(alpha^2-rho) eta(X)eta(Y)"},
      {"xi(alpha) + rho = 0"},
      {"Q phi = phi Q"},
      {"Q xi = (n-1)(alpha^2 + xi(alpha)) xi"},
  };

  Expr xi_alpha = detail::scalar_along(m, s.xi, s.alpha);

  for (const Point& p : points) {
    std::vector<double> xi(n), eta(n);
    for (int i = 0; i < n; ++i) xi[i] = eval(s.xi[i], p);
    for (int i = 0; i < n; ++i) eta[i] = eval(s.eta[i], p);
    double c = eval(s.alpha, p) * eval(s.alpha, p) - eval(s.rho, p);
    TensorValue sv = ricci(m, p);
    MetricAt ga = metric_at(m, p);
    std::vector<std::vector<double>> phi(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) phi[j][i] = eval(s.phi[j][i], p);

    {
      TensorValue t(n, {Variance::Low});
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += sv(i, j) * xi[j];
        t(i) = v - (n - 1) * c * eta[i];
      }
      detail::fold_max(rep, 0, residual_max(m, p, t));
    }
    {
      TensorValue t(n, {Variance::Low, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) v += sv(k, l) * phi[k][i] * phi[l][j];
          t(i, j) = v - sv(i, j) - (n - 1) * c * eta[i] * eta[j];
        }
      detail::fold_max(rep, 1, residual_max(m, p, t));
    }
    detail::fold_max(rep, 2, std::fabs(eval(xi_alpha, p) + eval(s.rho, p)));

    // Q^i_j = g^{ik} S_kj
    std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) q[i][j] += ga.g_inv(i, k) * sv(k, j);
    {
      TensorValue t(n, {Variance::Up, Variance::Low});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          for (int k = 0; k < n; ++k)
            v += q[i][k] * phi[k][j] - phi[i][k] * q[k][j];
          t(i, j) = v;
        }
      detail::fold_max(rep, 3, residual_max(m, p, t));
    }
    {
      double ev = (n - 1) * (eval(s.alpha, p) * eval(s.alpha, p) +
                             eval(xi_alpha, p));
      TensorValue t(n, {Variance::Up});
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += q[i][j] * xi[j];
        t(i) = v - ev * xi[i];
      }
      detail::fold_max(rep, 4, residual_max(m, p, t));
    }
  }
  return rep;
}

} // namespace lcsgeo
