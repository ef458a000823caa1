#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lcsgeo/manifold.hpp"
#include "lcsgeo/tensor.hpp"

namespace lcsgeo {

// ---------------------------------------------------------------------------
// Curvature pipeline.
//
// Conventions (calibrated against the bundled lcs3-example fixture):
//   R(X,Y)Z = Dx Dy Z - Dy Dx Z - D[X,Y] Z
//   S(X,Y)  = trace(Z -> R(Z,X)Y)
//   scal    = g^{ij} S_ij
//   Hess(f)(X,Y) = g(Dx grad f, Y),  Laplacian = metric trace of Hess
//
// All derivatives inside the engine are symbolic; numerics enter only through
// point evaluation and linear algebra.
// ---------------------------------------------------------------------------

/// A tensor field given by symbolic components in the coordinate basis.
/// comp is row-major over the slots in `var` order.
struct TensorField {
  int n = 0;
  std::vector<Variance> var;
  std::vector<Expr> comp;

  Expr& at(std::initializer_list<int> idx) { return comp[flat(idx)]; }
  const Expr& at(std::initializer_list<int> idx) const { return comp[flat(idx)]; }

  std::size_t flat(std::initializer_list<int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    return f;
  }
};

inline TensorField metric_field(const ChartManifold& m) {
  TensorField f;
  f.n = m.n;
  f.var = {Variance::Low, Variance::Low};
  f.comp.reserve(static_cast<std::size_t>(m.n) * m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) f.comp.push_back(m.metric[i][j]);
  return f;
}

inline TensorField ricci_field(const ChartManifold& m) {
  TensorField f;
  f.n = m.n;
  f.var = {Variance::Low, Variance::Low};
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) f.comp.push_back(m.ricci_e[i][j]);
  return f;
}

namespace detail {

inline Matrix eval_matrix(const std::vector<std::vector<Expr>>& e, const Point& p) {
  int n = static_cast<int>(e.size());
  Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = eval(e[i][j], p);
  return m;
}

} // namespace detail

struct MetricAt {
  TensorValue g;     // (0,2)
  TensorValue g_inv; // (2,0)
};

inline MetricAt metric_at(const ChartManifold& m, const Point& p) {
  require_in_domain(m, p);
  Matrix g = detail::eval_matrix(m.metric, p);
  Matrix gi;
  try {
    gi = invert(g);
  } catch (const StructureError&) {
    throw StructureError("metric is singular at the sampled point");
  }
  MetricAt out{TensorValue(m.n, {Variance::Low, Variance::Low}),
               TensorValue(m.n, {Variance::Up, Variance::Up})};
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      out.g(i, j) = g.at(i, j);
      out.g_inv(i, j) = gi.at(i, j);
    }
  return out;
}

/// Christoffel symbols Gamma^k_{ij}, slots (k; i, j).
inline TensorValue christoffel(const ChartManifold& m, const Point& p) {
  require_in_domain(m, p);
  TensorValue out(m.n, {Variance::Up, Variance::Low, Variance::Low});
  for (int k = 0; k < m.n; ++k)
    for (int i = 0; i < m.n; ++i)
      for (int j = i; j < m.n; ++j) {
        double v = eval(m.gamma_e[k][i][j], p);
        out(k, i, j) = v;
        out(k, j, i) = v;
      }
  return out;
}

struct RiemannAt {
  TensorValue up;   // (1,3): [l][i][j][k] = component l of R(d_i, d_j) d_k
  TensorValue down; // (0,4): [i][j][k][l] = g(R(d_i,d_j)d_k, d_l)
};

inline RiemannAt riemann(const ChartManifold& m, const Point& p) {
  require_in_domain(m, p);
  int n = m.n;
  TensorValue gamma = christoffel(m, p);
  TensorValue up(n, {Variance::Up, Variance::Low, Variance::Low, Variance::Low});
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = eval(m.dgamma_e[i][l][j][k], p) -
                     eval(m.dgamma_e[j][l][i][k], p);
          for (int a = 0; a < n; ++a)
            v += gamma(l, i, a) * gamma(a, j, k) -
                 gamma(l, j, a) * gamma(a, i, k);
          up(l, i, j, k) = v;
        }
  Matrix g = detail::eval_matrix(m.metric, p);
  TensorValue down(n, {Variance::Low, Variance::Low, Variance::Low, Variance::Low});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int a = 0; a < n; ++a) v += g.at(a, l) * up(a, i, j, k);
          down(i, j, k, l) = v;
        }
  return {std::move(up), std::move(down)};
}

/// Ricci tensor S(X,Y) = trace(Z -> R(Z,X)Y), computed from the curvature.
inline TensorValue ricci(const ChartManifold& m, const Point& p) {
  RiemannAt r = riemann(m, p);
  TensorValue s(m.n, {Variance::Low, Variance::Low});
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      double v = 0.0;
      for (int k = 0; k < m.n; ++k) v += r.up(k, k, i, j);
      s(i, j) = v;
    }
  return s;
}

inline double scalar_curvature(const ChartManifold& m, const Point& p) {
  TensorValue s = ricci(m, p);
  MetricAt ga = metric_at(m, p);
  double acc = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) acc += ga.g_inv(i, j) * s(i, j);
  return acc;
}

// --- covariant differentiation ----------------------------------------------

/// Covariant derivative of a symbolic tensor field with the derivative slot
/// prepended: out(m, I...) = (D_m T)_{I...}. Partial derivatives are prepared
/// symbolically once, so repeated evaluation over many points stays cheap.
class CovariantDerivative {
public:
  CovariantDerivative(const ChartManifold& m, TensorField field)
      : m_(&m), field_(std::move(field)) {
    int n = m.n;
    dcomp_.resize(static_cast<std::size_t>(n) * field_.comp.size());
    for (int d = 0; d < n; ++d)
      for (std::size_t c = 0; c < field_.comp.size(); ++c)
        dcomp_[static_cast<std::size_t>(d) * field_.comp.size() + c] =
            diff(field_.comp[c], d);
  }

  TensorValue at(const Point& p) const {
    const ChartManifold& m = *m_;
    int n = m.n;
    int order = static_cast<int>(field_.var.size());
    TensorValue gamma = christoffel(m, p);

    std::vector<double> vals(field_.comp.size());
    for (std::size_t c = 0; c < field_.comp.size(); ++c)
      vals[c] = eval(field_.comp[c], p);

    std::vector<Variance> ovar;
    ovar.push_back(Variance::Low);
    for (Variance v : field_.var) ovar.push_back(v);
    TensorValue out(n, ovar);

    std::vector<int> ix(order, 0);
    std::size_t count = field_.comp.size();
    for (std::size_t flat = 0; flat < count; ++flat) {
      // decode multi-index
      std::size_t rem = flat;
      for (int s = order - 1; s >= 0; --s) {
        ix[s] = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
      }
      for (int d = 0; d < n; ++d) {
        double v = eval(dcomp_[static_cast<std::size_t>(d) * count + flat], p);
        for (int s = 0; s < order; ++s) {
          for (int a = 0; a < n; ++a) {
            std::size_t nf = replace_index(flat, s, a, order, n);
            if (field_.var[s] == Variance::Up)
              v += gamma(ix[s], d, a) * vals[nf];
            else
              v -= gamma(a, d, ix[s]) * vals[nf];
          }
        }
        out.data()[static_cast<std::size_t>(d) * count + flat] = v;
      }
    }
    return out;
  }

private:
  static std::size_t replace_index(std::size_t flat, int slot, int value,
                                   int order, int n) {
    // stride of `slot`
    std::size_t stride = 1;
    for (int s = order - 1; s > slot; --s) stride *= static_cast<std::size_t>(n);
    std::size_t old = (flat / stride) % static_cast<std::size_t>(n);
    return flat + (static_cast<std::size_t>(value) - old) * stride;
  }

  const ChartManifold* m_;
  TensorField field_;
  std::vector<Expr> dcomp_;
};

inline TensorValue covariant_derivative(const ChartManifold& m,
                                        const TensorField& field,
                                        const Point& p) {
  return CovariantDerivative(m, field).at(p);
}

// --- Lie derivative of the metric ---------------------------------------------

/// (L_X g)(Y,Z) = g(Dy X, Z) + g(Y, Dz X).
inline TensorValue lie_derivative_metric(const ChartManifold& m,
                                         std::span<const Expr> x,
                                         const Point& p) {
  require_in_domain(m, p);
  int n = m.n;
  TensorValue gamma = christoffel(m, p);
  Matrix g = detail::eval_matrix(m.metric, p);

  // nab(i, j) = (D_i X)^j
  std::vector<double> nab(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = eval(diff(x[j], i), p);
      for (int k = 0; k < n; ++k) v += gamma(j, i, k) * eval(x[k], p);
      nab[static_cast<std::size_t>(i) * n + j] = v;
    }

  TensorValue out(n, {Variance::Low, Variance::Low});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k)
        v += g.at(k, j) * nab[static_cast<std::size_t>(i) * n + k] +
             g.at(i, k) * nab[static_cast<std::size_t>(j) * n + k];
      out(i, j) = v;
    }
  return out;
}

// --- scalar calculus ----------------------------------------------------------

inline std::vector<Expr> grad_exprs(const ChartManifold& m, const Expr& f) {
  std::vector<Expr> df(m.n);
  for (int i = 0; i < m.n; ++i) df[i] = diff(f, i);
  std::vector<Expr> grad(m.n);
  for (int i = 0; i < m.n; ++i) {
    Expr acc = lit(0);
    for (int j = 0; j < m.n; ++j) acc = acc + m.ginv_e[i][j] * df[j];
    grad[i] = simplify(acc);
  }
  return grad;
}

inline std::vector<std::vector<Expr>> hessian_exprs(const ChartManifold& m,
                                                    const Expr& f) {
  std::vector<Expr> df(m.n);
  for (int i = 0; i < m.n; ++i) df[i] = diff(f, i);
  std::vector<std::vector<Expr>> h(m.n, std::vector<Expr>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = i; j < m.n; ++j) {
      Expr acc = diff(df[j], i);
      for (int k = 0; k < m.n; ++k) acc = acc - m.gamma_e[k][i][j] * df[k];
      Expr s = simplify(acc);
      h[i][j] = s;
      h[j][i] = s;
    }
  return h;
}

inline Expr laplacian_expr(const ChartManifold& m, const Expr& f) {
  auto h = hessian_exprs(m, f);
  Expr acc = lit(0);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) acc = acc + m.ginv_e[i][j] * h[i][j];
  return simplify(acc);
}

struct HessianPackage {
  TensorValue grad; // (1,0)
  TensorValue hess; // (0,2)
  double laplacian = 0.0;
};

inline HessianPackage hessian_package(const ChartManifold& m, const Expr& f,
                                      const Point& p) {
  require_in_domain(m, p);
  auto gexpr = grad_exprs(m, f);
  auto hexpr = hessian_exprs(m, f);
  HessianPackage out{TensorValue(m.n, {Variance::Up}),
                     TensorValue(m.n, {Variance::Low, Variance::Low}), 0.0};
  for (int i = 0; i < m.n; ++i) out.grad(i) = eval(gexpr[i], p);
  MetricAt ga = metric_at(m, p);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      out.hess(i, j) = eval(hexpr[i][j], p);
      out.laplacian += ga.g_inv(i, j) * out.hess(i, j);
    }
  return out;
}

/// (div T)_j = g^{ik} (D_i T)_{kj} for a symmetric (0,2) field.
inline TensorValue divergence_sym2(const ChartManifold& m,
                                   const TensorField& t, const Point& p) {
  TensorValue nab = covariant_derivative(m, t, p); // (m, k, j)
  MetricAt ga = metric_at(m, p);
  TensorValue out(m.n, {Variance::Low});
  for (int j = 0; j < m.n; ++j) {
    double v = 0.0;
    for (int i = 0; i < m.n; ++i)
      for (int k = 0; k < m.n; ++k) v += ga.g_inv(i, k) * nab(i, k, j);
    out(j) = v;
  }
  return out;
}

/// Full metric contraction of T with itself. Indefinite in Lorentzian
/// signature, so the result may be negative.
inline double tensor_norm_sq(const ChartManifold& m, const TensorValue& t,
                             const Point& p) {
  if (t.basis() != Basis::Coordinate)
    throw StructureError("tensor_norm_sq expects coordinate-basis input");
  MetricAt ga = metric_at(m, p);
  int n = m.n;
  int order = t.order();
  std::size_t total = t.data().size();
  double acc = 0.0;
  std::vector<int> ia(order), ib(order);
  for (std::size_t fa = 0; fa < total; ++fa) {
    std::size_t rem = fa;
    for (int s = order - 1; s >= 0; --s) {
      ia[s] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    for (std::size_t fb = 0; fb < total; ++fb) {
      rem = fb;
      for (int s = order - 1; s >= 0; --s) {
        ib[s] = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
      }
      double w = t.data()[fa] * t.data()[fb];
      if (w == 0.0) continue;
      for (int s = 0; s < order; ++s) {
        w *= (t.variance()[s] == Variance::Low) ? ga.g_inv(ia[s], ib[s])
                                                : ga.g(ia[s], ib[s]);
      }
      acc += w;
    }
  }
  return acc;
}

// --- frames -------------------------------------------------------------------

/// Rows of the returned matrix are the frame vectors evaluated at p.
inline Matrix frame_matrix_at(const ChartManifold& m, const Point& p) {
  if (!m.frame) throw StructureError("manifold has no frame");
  Matrix e(m.n);
  for (int a = 0; a < m.n; ++a)
    for (int i = 0; i < m.n; ++i) e.at(a, i) = eval(m.frame->vecs[a][i], p);
  return e;
}

/// Gram matrix G_ab = g(E_a, E_b) at p.
inline Matrix gram_at(const ChartManifold& m, const Point& p) {
  Matrix e = frame_matrix_at(m, p);
  Matrix g = detail::eval_matrix(m.metric, p);
  Matrix out(m.n);
  for (int a = 0; a < m.n; ++a)
    for (int b = 0; b < m.n; ++b) {
      double v = 0.0;
      for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) v += e.at(a, i) * g.at(i, j) * e.at(b, j);
      out.at(a, b) = v;
    }
  return out;
}

/// Re-express a coordinate-basis tensor in the frame basis: covariant slots
/// contract with the frame vectors, contravariant slots with the dual coframe.
inline TensorValue to_frame(const ChartManifold& m, const Point& p,
                            const TensorValue& t) {
  if (!m.frame) throw StructureError("manifold has no frame");
  Matrix e = frame_matrix_at(m, p);
  // theta.at(a, i): dual coframe, theta^a(E_b) = delta_ab.
  Matrix et(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int a = 0; a < m.n; ++a) et.at(i, a) = e.at(a, i);
  Matrix theta = invert(et);
  Matrix theta_rows(m.n);
  for (int a = 0; a < m.n; ++a)
    for (int i = 0; i < m.n; ++i) theta_rows.at(a, i) = theta.at(a, i);

  TensorValue out = t;
  for (int s = 0; s < t.order(); ++s) {
    const Matrix& mat = (t.variance()[s] == Variance::Low) ? e : theta_rows;
    out = contract_slot(out, s, mat);
  }
  out.set_basis(Basis::Frame);
  return out;
}

/// Residual view: frame components when a frame is declared, coordinate
/// components otherwise.
inline double residual_max(const ChartManifold& m, const Point& p,
                           const TensorValue& t) {
  if (m.frame && t.basis() == Basis::Coordinate)
    return to_frame(m, p, t).max_abs();
  return t.max_abs();
}

/// Connection coefficients in the frame basis via the Koszul formula:
/// D_{E_a} E_b = w(a,b,c) E_c. Independent of the Christoffel route, which
/// makes the two usable as mutual cross-checks.
inline TensorValue frame_connection(const ChartManifold& m, const Point& p) {
  if (!m.frame) throw StructureError("manifold has no frame");
  require_in_domain(m, p);
  int n = m.n;
  const auto& vecs = m.frame->vecs;

  // Symbolic gram entries and their coordinate derivatives.
  std::vector<std::vector<Expr>> gram(n, std::vector<Expr>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Expr acc = lit(0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          acc = acc + m.metric[i][j] * vecs[a][i] * vecs[b][j];
      Expr s = simplify(acc);
      gram[a][b] = s;
      gram[b][a] = s;
    }

  Matrix e = frame_matrix_at(m, p);
  Matrix g = detail::eval_matrix(m.metric, p);

  // Directional derivatives E_a(G_bc).
  auto dir = [&](int a, const Expr& h) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += e.at(a, i) * eval(diff(h, i), p);
    return v;
  };

  // Brackets [E_a, E_b]^j at p.
  std::vector<std::vector<std::vector<double>>> br(
      n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          v += e.at(a, i) * eval(diff(vecs[b][j], i), p) -
               e.at(b, i) * eval(diff(vecs[a][j], i), p);
        br[a][b][j] = v;
      }

  auto g_of = [&](const std::vector<double>& u, int c) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += g.at(i, j) * u[i] * e.at(c, j);
    return v;
  };

  // K_abc = g(D_{E_a} E_b, E_c) from the Koszul formula.
  std::vector<std::vector<std::vector<double>>> K(
      n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = dir(a, gram[b][c]) + dir(b, gram[a][c]) - dir(c, gram[a][b]);
        v += g_of(br[a][b], c) - g_of(br[a][c], b) - g_of(br[b][c], a);
        K[a][b][c] = 0.5 * v;
      }

  Matrix gram_num = gram_at(m, p);
  Matrix gram_inv = invert(gram_num);

  TensorValue w(n, {Variance::Low, Variance::Low, Variance::Up}, Basis::Frame);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = 0.0;
        for (int d = 0; d < n; ++d) v += K[a][b][d] * gram_inv.at(d, c);
        w(a, b, c) = v;
      }
  return w;
}

/// Frame connection obtained from the coordinate Christoffel symbols by basis
/// change; test oracle for frame_connection().
inline TensorValue christoffel_in_frame(const ChartManifold& m, const Point& p) {
  if (!m.frame) throw StructureError("manifold has no frame");
  int n = m.n;
  const auto& vecs = m.frame->vecs;
  TensorValue gamma = christoffel(m, p);
  Matrix e = frame_matrix_at(m, p);
  Matrix et(n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) et.at(i, a) = e.at(a, i);
  Matrix theta = invert(et);

  TensorValue w(n, {Variance::Low, Variance::Low, Variance::Up}, Basis::Frame);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      // V^j = E_a^i (d_i E_b^j + Gamma^j_{ik} E_b^k)
      std::vector<double> v(n, 0.0);
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += e.at(a, i) * eval(diff(vecs[b][j], i), p);
          for (int k = 0; k < n; ++k)
            acc += e.at(a, i) * gamma(j, i, k) * e.at(b, k);
        }
        v[j] = acc;
      }
      for (int c = 0; c < n; ++c) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += theta.at(c, j) * v[j];
        w(a, b, c) = acc;
      }
    }
  return w;
}

} // namespace lcsgeo
