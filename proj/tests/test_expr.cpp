#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lcsgeo/expr.hpp"

using namespace lcsgeo;
using Catch::Approx;

namespace {
const std::vector<std::string> xyz = {"x", "y", "z"};

Expr P(const std::string& src) { return parse_expression(src, xyz); }

double at(const Expr& e, double x, double y, double z) {
  std::vector<double> env = {x, y, z};
  return eval(e, env);
}
} // namespace

TEST_CASE("parse produces the expected tree shapes") {
  Expr e = P("z^2");
  REQUIRE(e->kind == ExprKind::Pow);
  REQUIRE(e->exponent == 2);
  REQUIRE(e->a->kind == ExprKind::Coord);
  REQUIRE(e->a->name == "z");

  CHECK(at(P("-2/z"), 0, 0, 2) == Approx(-1.0));
  CHECK(at(P("2*(x+1)/x^2"), 1, 0, 0) == Approx(4.0));
  CHECK(at(P("z^-4"), 0, 0, 2) == Approx(1.0 / 16.0));
  CHECK(at(P("-x^2"), 3, 0, 0) == Approx(-9.0));
  CHECK(at(P("sin(x)^2 + cos(x)^2"), 0.7, 0, 0) == Approx(1.0));
}

TEST_CASE("integer ratios parse as exact rationals") {
  Expr e = P("2/3");
  REQUIRE(e->kind == ExprKind::Constant);
  CHECK(e->value == Rational(2, 3));

  Expr dec = P("0.5");
  REQUIRE(dec->kind == ExprKind::Constant);
  CHECK(dec->value == Rational(1, 2));

  // non-literal operands stay quotient nodes
  Expr q = P("x/3");
  CHECK(q->kind == ExprKind::Div);
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    P("2*(x+1");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 6);
  }
  try {
    P("2*w + 1");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unknown identifier 'w'") !=
          std::string::npos);
    CHECK(e.offset() == 2);
  }
  CHECK_THROWS_AS(P("sin + 1"), ParseError);
  CHECK_THROWS_AS(P("x^y"), ParseError);
  CHECK_THROWS_AS(P("x +"), ParseError);
}

TEST_CASE("evaluate reports domain violations naming the subexpression") {
  try {
    at(P("1/(z-2)"), 0, 0, 2);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("division by zero") != std::string::npos);
    CHECK(std::string(e.what()).find("z - 2") != std::string::npos);
  }
  CHECK_THROWS_AS(at(P("log(x)"), -1, 0, 0), DomainError);
  CHECK_THROWS_AS(at(P("log(x)"), 0, 0, 0), DomainError);
  CHECK_THROWS_AS(at(P("sqrt(x)"), -4, 0, 0), DomainError);
  CHECK_THROWS_AS(at(P("x^-2"), 0, 0, 0), DomainError);

  CHECK(at(P("-2/z"), 0, 0, 1) == Approx(-2.0));
  CHECK(at(P("-2/z^2"), 0, 0, 1) == Approx(-2.0));
}

TEST_CASE("differentiate matches calculus identities") {
  int z = 2;
  Expr d1 = diff(P("-2/z"), z);
  CHECK(at(d1, 0, 0, 2) == Approx(0.5)); // 2/z^2 at z=2

  Expr d2 = diff(P("x^2 + y^2"), 0);
  CHECK(at(d2, 3, 5, 0) == Approx(6.0)); // 2x

  // quotient rule case, frozen against the finite-difference oracle
  Expr lam = P("2*(z-5)/z^2");
  Expr dlam = diff(lam, z);
  CHECK(at(dlam, 0, 0, 1) == Approx(18.0));
  CHECK(testutil::close_rel(at(dlam, 0, 0, 1),
                            testutil::fd_derivative(lam, {0, 0, 1}, z), 1e-6));

  CHECK(at(diff(P("sin(x*y)"), 0), 0.5, 0.25, 0) ==
        Approx(0.25 * std::cos(0.125)));
  CHECK(at(diff(P("sqrt(x)"), 0), 4, 0, 0) == Approx(0.25));
  CHECK(at(diff(P("log(x^2)"), 0), 3, 0, 0) == Approx(2.0 / 3.0));
}

TEST_CASE("simplify applies local rules") {
  CHECK(same(simplify(P("0*sin(x) + y")), P("y")));
  CHECK(same(simplify(P("x^2 * x^-1")), P("x")));
  Expr folded = simplify(P("(2/z^2)*z^2"));
  REQUIRE(folded->kind == ExprKind::Constant);
  CHECK(folded->value == Rational(2));

  CHECK(same(simplify(P("x + 0")), P("x")));
  CHECK(same(simplify(P("1*x")), P("x")));
  CHECK(same(simplify(P("x/x")), P("1")));
  CHECK(simplify(P("x - x"))->value == Rational(0));
  CHECK(simplify(P("2/4"))->value == Rational(1, 2));
}

TEST_CASE("simplify preserves evaluation at 32 pseudorandom points") {
  testutil::ExprGen gen(17, 3, xyz);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Expr e = gen.gen(4);
    Expr s = simplify(e);
    for (int k = 0; k < 32; ++k) {
      auto p = gen.point();
      double ve, vs;
      try {
        ve = eval(e, p);
        vs = eval(s, p);
      } catch (const DomainError&) {
        continue; // outside the common domain; not a comparison point
      }
      if (!std::isfinite(ve)) continue;
      ++checked;
      REQUIRE(testutil::close_rel(ve, vs, 1e-12));
    }
  }
  REQUIRE(checked > 1000);
}

TEST_CASE("print/parse round trip is evaluation-equivalent") {
  testutil::ExprGen gen(99, 3, xyz);
  for (int trial = 0; trial < 60; ++trial) {
    Expr e = gen.gen(4);
    Expr r = parse_expression(to_string(e), xyz);
    for (int k = 0; k < 8; ++k) {
      auto p = gen.point();
      double ve, vr;
      try {
        ve = eval(e, p);
        vr = eval(r, p);
      } catch (const DomainError&) {
        continue;
      }
      if (!std::isfinite(ve)) continue;
      REQUIRE(testutil::close_rel(ve, vr, 1e-12));
    }
  }
  // hand-picked printer edge cases
  for (const char* src : {"-2/z", "x^-4", "-(x+y)*z", "2/3", "x - (y - z)",
                          "x/(y*z)", "-x^2", "(x+y)^3"}) {
    Expr e = P(src);
    Expr r = parse_expression(to_string(e), xyz);
    for (double v = 1.0; v < 3.0; v += 0.7)
      CHECK(at(r, v, v + 0.3, v + 1.1) == Approx(at(e, v, v + 0.3, v + 1.1)));
  }
}

TEST_CASE("symbolic derivatives agree with finite differences on 100 random "
          "expressions") {
  testutil::ExprGen gen(2024, 3, xyz);
  int checked = 0;
  for (int expr_count = 0; expr_count < 100; ++expr_count) {
    Expr e = gen.gen(4);
    for (int var = 0; var < 3; ++var) {
      Expr d = diff(e, var);
      for (int k = 0; k < 10; ++k) {
        auto p = gen.point();
        double sym, fd;
        try {
          sym = eval(d, p);
          fd = testutil::fd_derivative(e, p, var);
        } catch (const DomainError&) {
          continue;
        }
        if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
        if (std::fabs(sym) > 1e6) continue; // fd step too coarse out here
        ++checked;
        REQUIRE(testutil::close_rel(sym, fd, 1e-6));
      }
    }
  }
  REQUIRE(checked > 1500);
}

TEST_CASE("substitute replaces symbols by constants") {
  std::vector<std::string> syms = {"x", "r"};
  Expr e = parse_expression("r^2*x", syms);
  Expr s = simplify(substitute(e, 1, lit(3)));
  std::vector<double> env = {2.0, 0.0};
  CHECK(eval(s, env) == Approx(18.0));
}
