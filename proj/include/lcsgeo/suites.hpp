#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "lcsgeo/fixture.hpp"
#include "lcsgeo/report.hpp"

namespace lcsgeo {

// ---------------------------------------------------------------------------
// Named verification suites over a loaded fixture. The CLI command set:
//   check-structure curvature soliton-fit soliton-verify theorems gradient
//   bounds bochner all
// Each suite aggregates pointwise residuals over the fixture's sample set and
// reports one row per identity. Suites a fixture cannot support (no structure
// section, no potential, ...) are reported as not applicable and count as
// passing; hard errors inside an applicable suite become failing rows.
// ---------------------------------------------------------------------------

struct RunOptions {
  double tol = 1e-9;
  std::optional<std::uint64_t> seed;
  std::optional<int> points; // override for the random point count
  std::vector<std::pair<std::string, std::pair<double, double>>> windows;
};

namespace detail {

/// Signature of the quadratic form g at p via the signs of the LDL^T pivots.
inline std::string signature_string(const ChartManifold& m, const Point& p) {
  Matrix a = m.frame ? gram_at(m, p) : eval_matrix(m.metric, p);
  int n = a.n;
  std::string out = "(";
  // LDL^T without pivoting; fall back to a tiny diagonal shift if a pivot
  // degenerates (does not change inertia for our nondegenerate metrics).
  std::vector<std::vector<double>> w(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[i][j] = a.at(i, j);
  for (int k = 0; k < n; ++k) {
    double piv = w[k][k];
    if (std::fabs(piv) < 1e-12) piv = 1e-12;
    for (int i = k + 1; i < n; ++i) {
      double f = w[i][k] / piv;
      for (int j = k; j < n; ++j) w[i][j] -= f * w[k][j];
    }
    if (k) out += ",";
    out += w[k][k] >= 0 ? "+" : "-";
  }
  out += ")";
  return out;
}

inline void add_error_suite(Report& rep, const std::string& name,
                            const std::string& what) {
  SuiteResult s;
  s.name = name;
  s.applicable = true;
  Row r;
  r.name = "error: " + what;
  r.value = std::numeric_limits<double>::infinity();
  r.pass = false;
  s.pass = false;
  s.residual_max = r.value;
  s.rows.push_back(std::move(r));
  rep.suites.push_back(std::move(s));
}

inline void add_na_suite(Report& rep, const std::string& name,
                         const std::string& why) {
  SuiteResult s;
  s.name = name;
  s.applicable = false;
  Row r;
  r.name = why;
  r.informational = true;
  s.rows.push_back(std::move(r));
  rep.suites.push_back(std::move(s));
}

} // namespace detail

/// Structure context computed once per run.
struct RunContext {
  const Fixture* fx = nullptr;
  std::vector<Point> points;
  std::optional<LcsStructure> structure;
  std::string structure_error;
};

inline RunContext make_context(const Fixture& fx, const RunOptions& opt) {
  RunContext ctx;
  ctx.fx = &fx;
  SampleSpec spec = fx.sampling;
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.points) spec.random_count = *opt.points;
  for (auto& [coord, range] : opt.windows) spec.ranges[coord] = range;
  ctx.points = sample_points(fx.manifold, spec);
  if (fx.xi) {
    try {
      ctx.structure = derive_structure(fx.manifold, *fx.xi, ctx.points, opt.tol,
                                       fx.alpha_declared);
    } catch (const StructureError& e) {
      ctx.structure_error = e.what();
    }
  }
  return ctx;
}

// --- individual suites -------------------------------------------------------

inline void suite_structure(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  if (!fx.xi) {
    detail::add_na_suite(rep, "check-structure", "fixture declares no xi");
    return;
  }
  if (!ctx.structure) {
    detail::add_error_suite(rep, "check-structure", ctx.structure_error);
    return;
  }
  const LcsStructure& s = *ctx.structure;
  StructureReport rows;
  {
    StructureReport ax = verify_axioms(fx.manifold, s, ctx.points);
    rows.insert(rows.end(), ax.begin(), ax.end());
  }
  {
    StructureReport ci =
        verify_concircular_identities(fx.manifold, s, ctx.points);
    rows.insert(rows.end(), ci.begin(), ci.end());
  }
  {
    StructureReport ri = verify_ricci_structure(fx.manifold, s, ctx.points);
    rows.insert(rows.end(), ri.begin(), ri.end());
  }
  // alpha / rho extraction values at the first grid point, for the record
  if (!ctx.points.empty()) {
    const Point& p = ctx.points.front();
    rows.push_back({"alpha at first sample", eval(s.alpha, p), true});
    rows.push_back({"rho at first sample", eval(s.rho, p), true});
    double worst = 0.0;
    for (const Point& q : ctx.points)
      worst = std::max(worst, std::fabs(eval(s.alpha, q) -
                                        eval(s.alpha_derived, q)));
    rows.push_back({"declared alpha vs trace(D xi)/(n-1)", worst});
  }
  rep.suites.push_back(finish_suite("check-structure", rows, tol));
}

inline void suite_curvature(Report& rep, const RunContext& ctx, double tol) {
  const ChartManifold& m = ctx.fx->manifold;
  int n = m.n;
  StructureReport rows = {
      {"g g_inv = I"},
      {"Riemann antisymmetry (first pair)"},
      {"Riemann antisymmetry (last pair)"},
      {"Riemann pair symmetry"},
      {"first Bianchi identity"},
      {"D g = 0 (metricity)"},
      {"div S = (1/2) d scal"},
  };
  double max_r = 0.0, max_scal = 0.0;

  CovariantDerivative cov_g(m, metric_field(m));
  CovariantDerivative cov_s(m, ricci_field(m));

  for (const Point& p : ctx.points) {
    MetricAt ga = metric_at(m, p);
    {
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = -(i == j ? 1.0 : 0.0);
          for (int k = 0; k < n; ++k) v += ga.g(i, k) * ga.g_inv(k, j);
          worst = std::max(worst, std::fabs(v));
        }
      detail::fold_max(rows, 0, worst);
    }
    RiemannAt r = riemann(m, p);
    max_r = std::max(max_r, r.down.max_abs());
    max_scal = std::max(max_scal, std::fabs(scalar_curvature(m, p)));
    {
      double a1 = 0.0, a2 = 0.0, ps = 0.0, bi = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              double v = r.down(i, j, k, l);
              a1 = std::max(a1, std::fabs(v + r.down(j, i, k, l)));
              a2 = std::max(a2, std::fabs(v + r.down(i, j, l, k)));
              ps = std::max(ps, std::fabs(v - r.down(k, l, i, j)));
              bi = std::max(bi, std::fabs(v + r.down(j, k, i, l) +
                                          r.down(k, i, j, l)));
            }
      detail::fold_max(rows, 1, a1);
      detail::fold_max(rows, 2, a2);
      detail::fold_max(rows, 3, ps);
      detail::fold_max(rows, 4, bi);
    }
    detail::fold_max(rows, 5, residual_max(m, p, cov_g.at(p)));
    {
      TensorValue nabs = cov_s.at(p);
      TensorValue t(n, {Variance::Low});
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) v += ga.g_inv(i, k) * nabs(i, k, j);
        t(j) = v - 0.5 * eval(diff(m.scal_e, j), p);
      }
      detail::fold_max(rows, 6, residual_max(m, p, t));
    }
  }

  if (m.frame) {
    double worst_gram = 0.0, worst_compat = 0.0, worst_agree = 0.0;
    Matrix gram0 = gram_at(m, ctx.points.front());
    for (const Point& p : ctx.points) {
      Matrix gram = gram_at(m, p);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          worst_gram = std::max(
              worst_gram, std::fabs(gram.at(a, b) - gram0.at(a, b)));
          double rounded = std::round(gram0.at(a, b));
          worst_gram =
              std::max(worst_gram, std::fabs(gram0.at(a, b) - rounded));
        }
      TensorValue w = frame_connection(m, p);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int d = 0; d < n; ++d) {
            double v = 0.0, vt = 0.0;
            for (int c = 0; c < n; ++c) {
              v += w(a, b, c) * gram.at(c, d);
              vt += w(a, d, c) * gram.at(c, b);
            }
            worst_compat = std::max(worst_compat, std::fabs(v + vt));
          }
      TensorValue wg = christoffel_in_frame(m, p);
      for (std::size_t k = 0; k < w.data().size(); ++k)
        worst_agree = std::max(worst_agree,
                               std::fabs(w.data()[k] - wg.data()[k]));
    }
    rows.push_back({"frame gram matrix constant (integer signature)",
                    worst_gram});
    rows.push_back({"frame connection metric-compatible", worst_compat});
    rows.push_back({"frame connection agrees with Christoffel basis change",
                    worst_agree});
  }

  if (!m.scalar_fields.empty()) {
    double worst = 0.0;
    for (auto& [name, f] : m.scalar_fields) {
      for (const Point& p : ctx.points) {
        HessianPackage hp = hessian_package(m, f, p);
        TensorValue t(n, {Variance::Low, Variance::Low});
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            t(i, j) = hp.hess(i, j) - hp.hess(j, i);
        worst = std::max(worst, residual_max(m, p, t));
      }
    }
    rows.push_back({"Hessian symmetry (scalar fields)", worst});
  }

  rows.push_back({"max |R| component", max_r, true});
  rows.push_back({"max |scal|", max_scal, true});
  rep.suites.push_back(finish_suite("curvature", rows, tol));
}

inline void suite_soliton_fit(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!fx.soliton && !ctx.structure) {
    detail::add_na_suite(rep, "soliton-fit", "no soliton data and no structure");
    return;
  }
  std::vector<Expr> xi;
  try {
    xi = resolve_xi(m, ctx.structure ? &*ctx.structure : nullptr,
                    fx.soliton ? *fx.soliton : SolitonParams{});
  } catch (const StructureError& e) {
    detail::add_na_suite(rep, "soliton-fit", e.what());
    return;
  }

  StructureReport rows = {
      {"fit residual (lsq)"},
      {"fitted params reproduce declared lambda, mu"},
      {"fit matches quasi-Einstein trace shortcut"},
      {"mu - lambda = (n-1)(alpha^2 - rho) for fitted params"},
  };
  bool have_declared = fx.soliton && fx.soliton->lambda && fx.soliton->mu;
  if (!have_declared) {
    rows[1].informational = true;
    rows[1].note = "no declared parameters";
  }
  if (!ctx.structure) {
    rows[2].informational = true;
    rows[2].note = "no structure: shortcut unavailable";
    rows[3].informational = true;
    rows[3].note = "no structure";
  }

  std::vector<double> lambdas;
  int unidentifiable = 0;
  for (const Point& p : ctx.points) {
    FitResult fit =
        fit_params(m, xi, p, ctx.structure ? &*ctx.structure : nullptr);
    lambdas.push_back(fit.lambda);
    if (!fit.mu_identifiable) ++unidentifiable;
    detail::fold_max(rows, 0, fit.lsq_residual);
    if (have_declared && fit.mu_identifiable) {
      double dl = std::fabs(fit.lambda - eval(*fx.soliton->lambda, p));
      double dm = std::fabs(fit.mu - eval(*fx.soliton->mu, p));
      detail::fold_max(rows, 1, std::max(dl, dm));
    }
    if (fit.lambda_shortcut) {
      detail::fold_max(rows, 2,
                       std::max(std::fabs(fit.lambda - *fit.lambda_shortcut),
                                std::fabs(fit.mu - *fit.mu_shortcut)));
    }
    if (ctx.structure) {
      double a = eval(ctx.structure->alpha, p);
      double rho = eval(ctx.structure->rho, p);
      detail::fold_max(rows, 3,
                       std::fabs(fit.mu - fit.lambda -
                                 (m.n - 1) * (a * a - rho)));
    }
  }
  if (unidentifiable > 0)
    rows.push_back({"points where eta = 0 (mu fit skipped)",
                    static_cast<double>(unidentifiable), true,
                    "normal equations singular there; lambda-only fit used"});
  rows.push_back({"classification: " + classify_soliton(lambdas, tol), 0.0,
                  true, "sign of fitted lambda over this window"});
  rep.suites.push_back(finish_suite("soliton-fit", rows, tol));
}

inline void suite_soliton_verify(Report& rep, const RunContext& ctx,
                                 double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!fx.soliton || !fx.soliton->lambda || !fx.soliton->mu) {
    detail::add_na_suite(rep, "soliton-verify",
                         "fixture declares no (lambda, mu)");
    return;
  }
  const SolitonParams& params = *fx.soliton;
  std::vector<Expr> xi;
  try {
    xi = resolve_xi(m, ctx.structure ? &*ctx.structure : nullptr, params);
  } catch (const StructureError& e) {
    detail::add_error_suite(rep, "soliton-verify", e.what());
    return;
  }

  StructureReport rows = {{"soliton equation residual"}};
  for (const Point& p : ctx.points) {
    TensorValue r = soliton_residual(m, xi, params, p);
    detail::fold_max(rows, 0, residual_max(m, p, r));
  }

  if (ctx.structure) {
    StructureReport ids =
        check_identities(m, *ctx.structure, params, ctx.points);
    rows.insert(rows.end(), ids.begin(), ids.end());
  } else {
    rows.push_back({"structure identities", 0.0, true,
                    "not applicable (no concircular structure)"});
  }
  StructureReport nsc = nabla_S_conditions(
      m, ctx.structure ? &*ctx.structure : nullptr, &params, ctx.points, tol);
  rows.insert(rows.end(), nsc.begin(), nsc.end());

  rep.suites.push_back(finish_suite("soliton-verify", rows, tol));
}

inline void suite_theorems(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!ctx.structure) {
    detail::add_na_suite(rep, "theorems", "no concircular structure");
    return;
  }
  if (!m.frame) {
    detail::add_na_suite(rep, "theorems", "condition operators need a frame");
    return;
  }

  StructureReport rows;
  double rs_proof = 0.0, sr_proof = 0.0;
  double rs_concl = 0.0, sr_concl = 0.0;
  bool rs_holds = true, sr_holds = true;
  std::string rs_verdict, sr_verdict;
  for (const Point& p : ctx.points) {
    double lam, mu;
    if (fx.soliton && fx.soliton->lambda && fx.soliton->mu) {
      lam = eval(*fx.soliton->lambda, p);
      mu = eval(*fx.soliton->mu, p);
    } else {
      FitResult fit = fit_params(m, ctx.structure->xi, p, &*ctx.structure);
      lam = fit.lambda;
      mu = fit.mu;
    }
    ConditionResult rs =
        condition_R_dot_S(m, *ctx.structure, lam, mu, p, tol);
    ConditionResult sr =
        condition_S_dot_R(m, *ctx.structure, lam, mu, p, tol);
    rs_proof = std::max(rs_proof, rs.proof_residual);
    sr_proof = std::max(sr_proof, sr.proof_residual);
    rs_holds = rs_holds && rs.condition_holds;
    sr_holds = sr_holds && sr.condition_holds;
    rs_verdict = rs.verdict;
    sr_verdict = sr.verdict;
    if (rs.condition_holds)
      for (auto& c : rs.rows)
        if (!c.informational) rs_concl = std::max(rs_concl, c.value);
    if (sr.condition_holds)
      for (auto& c : sr.rows)
        if (!c.informational) sr_concl = std::max(sr_concl, c.value);
  }

  rows.push_back({"(xi,.)_R.S: contracted tensor matches factored proof form",
                  rs_proof});
  rows.push_back({"(xi,.)_R.S verdict: " + rs_verdict,
                  rs_holds ? rs_concl : 0.0, !rs_holds,
                  rs_holds ? "conclusion residual" : "theorem vacuous here"});
  rows.push_back({"(xi,.)_S.R: contracted tensor matches factored proof form",
                  sr_proof});
  rows.push_back({"(xi,.)_S.R verdict: " + sr_verdict,
                  sr_holds ? sr_concl : 0.0, !sr_holds,
                  sr_holds ? "conclusion residual" : "theorem vacuous here"});
  rep.suites.push_back(finish_suite("theorems", rows, tol));
}

inline void suite_gradient(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!fx.soliton || !fx.soliton->f) {
    detail::add_na_suite(rep, "gradient", "fixture declares no potential f");
    return;
  }
  const SolitonParams& params = *fx.soliton;
  StructureReport rows;
  try {
    rows = gradient_residuals(m, ctx.structure ? &*ctx.structure : nullptr,
                              params, ctx.points);
  } catch (const StructureError& e) {
    detail::add_error_suite(rep, "gradient", e.what());
    return;
  }
  {
    Check trace{"trace identity: Delta f + scal + n lambda + mu |xi|^2 = 0"};
    for (const Point& p : ctx.points)
      trace.value =
          std::max(trace.value, std::fabs(trace_identity(m, params, p)));
    rows.push_back(std::move(trace));
  }
  {
    StructureReport aux = auxiliary_identities(m, &params, ctx.points);
    rows.insert(rows.end(), aux.begin(), aux.end());
  }
  if (ctx.structure) {
    StructureReport c = lcs_gradient_constraints(m, *ctx.structure, params,
                                                 ctx.points, tol);
    rows.insert(rows.end(), c.begin(), c.end());
  }
  rep.suites.push_back(finish_suite("gradient", rows, tol));
}

inline void suite_bounds(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!fx.soliton || !fx.soliton->f) {
    detail::add_na_suite(rep, "bounds", "fixture declares no potential f");
    return;
  }
  StructureReport rows = {
      {"lower <= |S|^2 <= upper over all samples"},
      {"lower bound at first sample", 0.0, true},
      {"|S|^2 at first sample", 0.0, true},
      {"upper bound at first sample", 0.0, true},
      {"eta-Einstein upper variant at first sample", 0.0, true},
  };
  bool first = true;
  bool const_len = true;
  for (const Point& p : ctx.points) {
    BoundsResult b = ricci_norm_bounds(m, *fx.soliton, p);
    const_len = const_len && b.xi_constant_length;
    if (!b.holds) {
      double gap = std::max(b.lower - b.mid, b.mid - b.upper);
      detail::fold_max(rows, 0, gap);
    }
    if (first) {
      rows[1].value = b.lower;
      rows[2].value = b.mid;
      rows[3].value = b.upper;
      rows[4].value = b.upper_eta_einstein;
      first = false;
    }
  }
  rows.push_back({"xi has constant length on this window", 0.0, true,
                  const_len ? "yes: constant-length simplification coincides"
                            : "no"});
  rep.suites.push_back(finish_suite("bounds", rows, tol));
}

inline void suite_bochner(Report& rep, const RunContext& ctx, double tol) {
  const Fixture& fx = *ctx.fx;
  const ChartManifold& m = fx.manifold;
  if (!fx.soliton || !fx.soliton->f || !fx.soliton->lambda ||
      !fx.soliton->mu) {
    detail::add_na_suite(rep, "bochner", "needs f, lambda and mu");
    return;
  }
  StructureReport rows = {
      {"Bochner residual"},
      {"mu = 0 reduction (diffusion operator form)", 0.0, true,
       "checked only where mu vanishes"},
  };
  bool any_mu0 = false;
  for (const Point& p : ctx.points) {
    BochnerResult b = bochner_residual(m, *fx.soliton, p);
    detail::fold_max(rows, 0, std::fabs(b.residual));
    if (b.mu0_reduction) {
      any_mu0 = true;
      detail::fold_max(rows, 1, std::fabs(*b.mu0_reduction));
    }
  }
  if (any_mu0) rows[1].informational = false;
  rep.suites.push_back(finish_suite("bochner", rows, tol));
}

// --- command dispatch ----------------------------------------------------------

inline const std::vector<std::string>& all_commands() {
  static const std::vector<std::string> cmds = {
      "check-structure", "curvature",  "soliton-fit", "soliton-verify",
      "theorems",        "gradient",   "bounds",      "bochner",
      "all"};
  return cmds;
}

inline Report run_command(const Fixture& fx, const std::string& command,
                          const RunOptions& opt = {}) {
  bool known = false;
  for (const auto& c : all_commands()) known |= (c == command);
  if (!known)
    throw StructureError("unknown command '" + command + "'");

  auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.fixture = fx.manifold.name;
  rep.tol = opt.tol;
  rep.seed = opt.seed ? *opt.seed : fx.sampling.seed;

  RunContext ctx = make_context(fx, opt);
  rep.conventions.signature =
      detail::signature_string(fx.manifold, ctx.points.front());

  bool all = command == "all";
  if (all || command == "check-structure") suite_structure(rep, ctx, opt.tol);
  if (all || command == "curvature") suite_curvature(rep, ctx, opt.tol);
  if (all || command == "soliton-fit") suite_soliton_fit(rep, ctx, opt.tol);
  if (all || command == "soliton-verify")
    suite_soliton_verify(rep, ctx, opt.tol);
  if (all || command == "theorems") suite_theorems(rep, ctx, opt.tol);
  if (all || command == "gradient") suite_gradient(rep, ctx, opt.tol);
  if (all || command == "bounds") suite_bounds(rep, ctx, opt.tol);
  if (all || command == "bochner") suite_bochner(rep, ctx, opt.tol);

  for (const SuiteResult& s : rep.suites) rep.pass = rep.pass && s.pass;
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

} // namespace lcsgeo
