#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lcsgeo/fixture.hpp"

using namespace lcsgeo;
using Catch::Approx;

TEST_CASE("bundled fixtures load") {
  Fixture fx = testutil::load("lcs3-example");
  CHECK(fx.manifold.n == 3);
  CHECK(fx.manifold.name == "lcs3-example");
  CHECK(fx.manifold.coords == std::vector<std::string>{"x", "y", "z"});
  REQUIRE(fx.xi);
  REQUIRE(fx.alpha_declared);
  REQUIRE(fx.soliton);
  CHECK(fx.soliton->kind == SolitonKind::EtaRicci);
  REQUIRE(fx.manifold.frame);
  // frame E1 = z^2 d/dx
  std::vector<double> env = {0.0, 0.0, 2.0};
  CHECK(eval(fx.manifold.frame->vecs[0][0], env) == Approx(4.0));

  Fixture mk = testutil::load("minkowski3");
  CHECK(mk.manifold.n == 3);
  CHECK_FALSE(mk.xi);
  CHECK(eval(mk.manifold.metric[2][2], env) == -1.0);

  // extensionless paths resolve by appending .mf
  Fixture again = load_manifold(testutil::fixture_path("lcs3-example"));
  CHECK(again.manifold.name == "lcs3-example");
}

TEST_CASE("constants substitute into every expression") {
  Fixture sp = load_manifold_string(R"(
[manifold]
name = "sphere-r2"
dim = 2
coords = "theta, phi"
domain = "sin(theta)"
[constants]
r = "2"
[metric]
g11 = "r^2"
g22 = "r^2*sin(theta)^2"
)");
  std::vector<double> eq = {M_PI / 2, 0.0};
  CHECK(eval(sp.manifold.metric[0][0], eq) == Approx(4.0));
  CHECK(eval(sp.manifold.metric[1][1], eq) == Approx(4.0));
}

TEST_CASE("loader errors carry line numbers") {
  SECTION("metric index out of range") {
    try {
      load_manifold_string(R"(
[manifold]
name = "bad"
dim = 2
coords = "x, y"
[metric]
g11 = "1"
g22 = "1"
g33 = "1"
)");
      FAIL("expected FixtureError");
    } catch (const FixtureError& e) {
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
      CHECK(e.line() == 9);
    }
  }
  SECTION("missing diagonal entry") {
    CHECK_THROWS_AS(load_manifold_string(R"(
[manifold]
name = "bad"
dim = 2
coords = "x, y"
[metric]
g11 = "1"
)"),
                    FixtureError);
  }
  SECTION("dim / coords mismatch") {
    CHECK_THROWS_AS(load_manifold_string(R"(
[manifold]
name = "bad"
dim = 3
coords = "x, y"
[metric]
g11 = "1"
g22 = "1"
g33 = "1"
)"),
                    FixtureError);
  }
  SECTION("duplicate metric entry") {
    CHECK_THROWS_AS(load_manifold_string(R"(
[manifold]
name = "bad"
dim = 2
coords = "x, y"
[metric]
g11 = "1"
g12 = "0"
g21 = "0"
g22 = "1"
)"),
                    FixtureError);
  }
  SECTION("parse error inside an expression names the line") {
    try {
      load_manifold_string(R"(
[manifold]
name = "bad"
dim = 2
coords = "x, y"
[metric]
g11 = "1"
g22 = "x +"
)");
      FAIL("expected FixtureError");
    } catch (const FixtureError& e) {
      CHECK(e.line() == 8);
    }
  }
  SECTION("unknown identifier in an expression") {
    CHECK_THROWS_AS(load_manifold_string(R"(
[manifold]
name = "bad"
dim = 2
coords = "x, y"
[metric]
g11 = "w^2"
g22 = "1"
)"),
                    FixtureError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(load_manifold("/nonexistent/path/to/fixture"),
                    FixtureError);
  }
}

TEST_CASE("sampling") {
  Fixture fx = testutil::load("lcs3-example");
  SECTION("default grid 3^3 plus 8 random points, all in the window") {
    auto pts = sample_points(fx.manifold, fx.sampling);
    REQUIRE(pts.size() == 35);
    for (const Point& p : pts) {
      REQUIRE(p[2] >= 1.0);
      REQUIRE(p[2] <= 4.0);
    }
  }
  SECTION("identical seeds give identical point lists") {
    SampleSpec spec = fx.sampling;
    spec.seed = 42;
    auto a = sample_points(fx.manifold, spec);
    auto b = sample_points(fx.manifold, spec);
    REQUIRE(a == b);
    spec.seed = 43;
    auto c = sample_points(fx.manifold, spec);
    CHECK(a != c);
  }
  SECTION("a window straddling the singular locus is rejected") {
    SampleSpec spec = fx.sampling;
    spec.ranges["z"] = {-1.0, 1.0}; // grid hits z = 0
    CHECK_THROWS_AS(sample_points(fx.manifold, spec), SamplingError);
  }
  SECTION("an inverted range is rejected") {
    SampleSpec spec = fx.sampling;
    spec.ranges["z"] = {4.0, 1.0};
    CHECK_THROWS_AS(sample_points(fx.manifold, spec), SamplingError);
  }
  SECTION("missing range for a coordinate is rejected") {
    SampleSpec spec = fx.sampling;
    spec.ranges.erase("y");
    CHECK_THROWS_AS(sample_points(fx.manifold, spec), SamplingError);
  }
}

TEST_CASE("domain checks") {
  Fixture fx = testutil::load("lcs3-example");
  CHECK(in_domain(fx.manifold, {0.0, 0.0, 1.0}));
  CHECK_FALSE(in_domain(fx.manifold, {0.0, 0.0, 0.0}));
  CHECK_FALSE(in_domain(fx.manifold, {0.0, 0.0, 1e-9}));
  CHECK_THROWS_AS(require_in_domain(fx.manifold, {0.0, 0.0, 0.0}),
                  DomainError);
  CHECK_THROWS_AS(metric_at(fx.manifold, {0.0, 0.0, 0.0}), DomainError);
}
