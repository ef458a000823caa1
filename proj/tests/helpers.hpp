#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lcsgeo/expr.hpp"
#include "lcsgeo/fixture.hpp"
#include "lcsgeo/sampling.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(LCSGEO_FIXTURE_DIR) + "/" + name;
}

inline lcsgeo::Fixture load(const std::string& name) {
  return lcsgeo::load_manifold(fixture_path(name));
}

// Central finite difference, h = 1e-5; the independent oracle for every
// symbolic-derivative check. Lives only in test code.
inline double fd_derivative(const lcsgeo::Expr& e, std::vector<double> env,
                            int var, double h = 1e-5) {
  env[var] += h;
  double hi = lcsgeo::eval(e, env);
  env[var] -= 2 * h;
  double lo = lcsgeo::eval(e, env);
  return (hi - lo) / (2 * h);
}

inline bool close_rel(double a, double b, double tol) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

// Random expression generator over the given symbols, bounded depth. Leans on
// structures that stay finite for coordinates in [0.7, 1.6].
class ExprGen {
public:
  ExprGen(std::uint64_t seed, int n_symbols,
          const std::vector<std::string>& names)
      : rng_(seed), n_(n_symbols), names_(names) {}

  lcsgeo::Expr gen(int depth = 4) {
    using namespace lcsgeo;
    if (depth <= 0 || rng_.uniform01() < 0.25) {
      if (rng_.uniform01() < 0.4) {
        long long num = static_cast<long long>(rng_.next() % 7) - 3;
        long long den = 1 + static_cast<long long>(rng_.next() % 4);
        return rational_const(Rational(num == 0 ? 1 : num, den));
      }
      int id = static_cast<int>(rng_.next() % n_);
      return symbol(id, names_[id]);
    }
    switch (rng_.next() % 8) {
      case 0: return gen(depth - 1) + gen(depth - 1);
      case 1: return gen(depth - 1) - gen(depth - 1);
      case 2: return gen(depth - 1) * gen(depth - 1);
      case 3: return gen(depth - 1) / (lit(2) + pow_int(gen(depth - 2), 2));
      case 4: return -gen(depth - 1);
      case 5:
        return pow_int(gen(depth - 1),
                       static_cast<long long>(rng_.next() % 3) + 1);
      case 6: {
        switch (rng_.next() % 3) {
          case 0: return apply_func(FuncId::Sin, gen(depth - 1));
          case 1: return apply_func(FuncId::Cos, gen(depth - 1));
          default: return apply_func(FuncId::Exp, gen(depth - 2));
        }
      }
      default: {
        // log/sqrt over a positive-by-construction argument
        lcsgeo::Expr pos = lit(1) + pow_int(gen(depth - 2), 2);
        return (rng_.next() % 2) ? apply_func(FuncId::Log, pos)
                                 : apply_func(FuncId::Sqrt, pos);
      }
    }
  }

  std::vector<double> point() {
    std::vector<double> p(n_);
    for (int i = 0; i < n_; ++i) p[i] = rng_.uniform(0.7, 1.6);
    return p;
  }

private:
  lcsgeo::SplitMix64 rng_;
  int n_;
  std::vector<std::string> names_;
};

} // namespace testutil
