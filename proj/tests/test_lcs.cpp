#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lcsgeo/lcs.hpp"

using namespace lcsgeo;
using Catch::Approx;

namespace {

struct Derived {
  Fixture fx;
  std::vector<Point> pts;
  LcsStructure s;
};

Derived derive(const char* name) {
  Fixture fx = testutil::load(name);
  auto pts = sample_points(fx.manifold, fx.sampling);
  LcsStructure s =
      derive_structure(fx.manifold, *fx.xi, pts, 1e-9, fx.alpha_declared);
  return {std::move(fx), std::move(pts), std::move(s)};
}

double worst(const StructureReport& rep) {
  double w = 0.0;
  for (const Check& c : rep)
    if (!c.informational) w = std::max(w, c.value);
  return w;
}

const Check& row(const StructureReport& rep, const std::string& prefix) {
  for (const Check& c : rep)
    if (c.name.rfind(prefix, 0) == 0) return c;
  throw std::runtime_error("no row starting with '" + prefix + "'");
}

} // namespace

TEST_CASE("derive_structure extracts alpha and rho on lcs3") {
  Derived d = derive("lcs3-example");
  Point p = {0.0, 0.0, 1.0};
  CHECK(eval(d.s.alpha, p) == Approx(-2.0));
  CHECK(eval(d.s.rho, p) == Approx(-2.0));
  CHECK(eval(d.s.alpha_derived, p) == Approx(-2.0).margin(1e-12));

  // xi(alpha) = -rho identically
  for (const Point& q : d.pts) {
    double xa = 0.0;
    for (int i = 0; i < 3; ++i)
      xa += eval(d.s.xi[i], q) * eval(diff(d.s.alpha, i), q);
    REQUIRE(xa == Approx(-eval(d.s.rho, q)).margin(1e-12));
  }
  CHECK(eval(d.s.rho, p) == Approx(-2.0)); // so xi(alpha)(z=1) = +2
}

TEST_CASE("derive_structure rejects non-concircular and non-timelike fields") {
  SECTION("parallel timelike field on flat space: alpha vanishes") {
    Fixture mk = testutil::load("minkowski3");
    auto pts = sample_points(mk.manifold, mk.sampling);
    std::vector<Expr> dt = {parse_expression("0", mk.manifold.coords),
                            parse_expression("0", mk.manifold.coords),
                            parse_expression("1", mk.manifold.coords)};
    try {
      derive_structure(mk.manifold, dt, pts);
      FAIL("expected StructureError");
    } catch (const StructureError& e) {
      CHECK(std::string(e.what()).find("alpha vanishes") != std::string::npos);
    }
  }
  SECTION("spacelike field fails the unit-timelike precondition") {
    Fixture eu = testutil::load("euclidean3-gaussian");
    auto pts = sample_points(eu.manifold, eu.sampling);
    std::vector<Expr> dz = {parse_expression("0", eu.manifold.coords),
                            parse_expression("0", eu.manifold.coords),
                            parse_expression("1", eu.manifold.coords)};
    try {
      derive_structure(eu.manifold, dz, pts);
      FAIL("expected StructureError");
    } catch (const StructureError& e) {
      CHECK(std::string(e.what()).find("unit timelike") != std::string::npos);
    }
  }
  SECTION("declared alpha must agree with the trace extraction") {
    Fixture fx = testutil::load("lcs3-example");
    auto pts = sample_points(fx.manifold, fx.sampling);
    Expr wrong = parse_expression("-3/z", fx.manifold.coords);
    CHECK_THROWS_AS(derive_structure(fx.manifold, *fx.xi, pts, 1e-9, wrong),
                    StructureError);
  }
}

TEST_CASE("verify_axioms: all residuals tight on genuine structures") {
  for (const char* name : {"lcs3-example", "milne3", "desitter3"}) {
    Derived d = derive(name);
    StructureReport rep = verify_axioms(d.fx.manifold, d.s, d.pts);
    INFO(name);
    REQUIRE(worst(rep) < 1e-9);
  }
}

TEST_CASE("verify_axioms flags an injected phi defect with unit residual") {
  Derived d = derive("lcs3-example");
  LcsStructure corrupted = d.s;
  // force phi(E3) = E3 instead of 0
  corrupted.phi[2][2] = parse_expression("1", d.fx.manifold.coords);
  StructureReport rep = verify_axioms(d.fx.manifold, corrupted, d.pts);
  CHECK(row(rep, "phi(xi) = 0").value == Approx(1.0));
  CHECK(worst(rep) >= 1.0);
}

TEST_CASE("concircular curvature identities hold to 1e-9") {
  for (const char* name : {"lcs3-example", "milne3", "desitter3"}) {
    Derived d = derive(name);
    StructureReport rep =
        verify_concircular_identities(d.fx.manifold, d.s, d.pts);
    INFO(name);
    REQUIRE(worst(rep) < 1e-9);

    // R(E1,E3)E3 = -(alpha^2 - rho) E1 spot check on lcs3
    if (name == std::string("lcs3-example")) {
      Point p = {0.0, 0.0, 1.0};
      double c = eval(d.s.alpha, p) * eval(d.s.alpha, p) - eval(d.s.rho, p);
      CHECK(c == Approx(6.0));
      RiemannAt r = riemann(d.fx.manifold, p);
      TensorValue up_f = to_frame(d.fx.manifold, p, r.up);
      CHECK(up_f(0, 0, 2, 2) == Approx(-c).margin(1e-9));
    }
  }
}

TEST_CASE("L_xi g equals 2 D eta pointwise (both equal 2 alpha on the "
          "spacelike block)") {
  Derived d = derive("lcs3-example");
  Point p = {0.0, 0.0, 2.0};
  TensorValue lg = lie_derivative_metric(d.fx.manifold, d.s.xi, p);
  TensorField eta_field{3, {Variance::Low}, d.s.eta};
  TensorValue deta = covariant_derivative(d.fx.manifold, eta_field, p);
  TensorValue lgf = to_frame(d.fx.manifold, p, lg);
  TensorValue detaf = to_frame(d.fx.manifold, p, deta);
  CHECK(lgf(0, 0) == Approx(2.0 * detaf(0, 0)).margin(1e-12));
  CHECK(lgf(0, 0) == Approx(-2.0).margin(1e-12)); // 2 alpha at z=2
}

TEST_CASE("ricci-structure identities") {
  for (const char* name : {"lcs3-example", "milne3", "desitter3"}) {
    Derived d = derive(name);
    StructureReport rep = verify_ricci_structure(d.fx.manifold, d.s, d.pts);
    INFO(name);
    REQUIRE(worst(rep) < 1e-9);
  }
  SECTION("S(X,xi) reproduces the eigenvalue 12 eta(X) at z = 1 on lcs3") {
    Derived d = derive("lcs3-example");
    Point p = {0.0, 0.0, 1.0};
    TensorValue s = ricci(d.fx.manifold, p);
    double sx = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        sx += s(i, j) * eval(d.s.xi[i], p) * eval(d.s.xi[j], p);
    // S(xi,xi) = (n-1)(alpha^2-rho) eta(xi) = 2*6*(-1)
    CHECK(sx == Approx(-12.0).margin(1e-9));
  }
}
