#include <doctest.h>

#include <cmath>
#include <vector>

#include "feff/errors.hpp"
#include "feff/geocalc.hpp"
#include "feff/parse.hpp"
#include "feff/tape.hpp"
#include "test_geometries.hpp"

using namespace feff;

TEST_CASE("Christoffel symbols: round sphere and conformally flat plane") {
  {
    expr::Pool pool({"th", "ph"});
    SymField g = zeros(Shape(2, {kDown, kDown}), pool);
    g(0, 0) = pool.one();
    g(1, 1) = expr::parse("sin(th)^2", pool);
    const SymField G = christoffel(g);
    const std::vector<double> p{1.0, 0.3};
    CHECK(expr::eval(G(0, 1, 1), p) == doctest::Approx(-std::sin(1.0) * std::cos(1.0)).epsilon(1e-14));
    CHECK(expr::eval(G(0, 1, 1), p) == doctest::Approx(-0.454648713412841).epsilon(1e-12));
    CHECK(expr::eval(G(1, 0, 1), p) == doctest::Approx(std::cos(1.0) / std::sin(1.0)).epsilon(1e-14));
    // Finite-difference oracle on the metric.
    const double h = 1e-5;
    const double dgpp = (std::pow(std::sin(1.0 + h), 2) - std::pow(std::sin(1.0 - h), 2)) / (2 * h);
    CHECK(std::abs(expr::eval(G(0, 1, 1), p) + 0.5 * dgpp) < 1e-9);
  }
  {
    expr::Pool pool({"x", "y"});
    SymField g = zeros(Shape(2, {kDown, kDown}), pool);
    g(0, 0) = expr::parse("exp(2*x)", pool);
    g(1, 1) = g(0, 0);
    const SymField G = christoffel(g);
    for (double x : {-0.5, 0.0, 0.8}) {
      const std::vector<double> p{x, 0.1};
      CHECK(expr::eval(G(0, 0, 0), p) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(expr::eval(G(0, 1, 1), p) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(expr::eval(G(1, 0, 1), p) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("flat metric has vanishing curvature") {
  const GeometrySpec spec = testgeo::flat_4d("1", "0", "0", "1");
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  validate_metric(curv, pts);
  for (const SymField* f : {&curv.christoffel(), &curv.riemann(), &curv.ricci(), &curv.schouten(), &curv.weyl(),
                            &curv.cotton()})
    for (const expr::Expr& e : f->components()) CHECK(e.is_zero());
  CHECK(curv.scalar().is_zero());
}

TEST_CASE("round sphere product S2 x S2 curvature") {
  const GeometrySpec spec = testgeo::sphere_product();
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  const auto ids = curvature_identities(curv);
  const auto m = measure(ids, pts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    INFO(ids[i].name);
    CHECK(m[i].residual <= (ids[i].tol == TolClass::Alg ? 1e-10 : 1e-8 * (1 + m[i].scale)));
  }
  // Two unit spheres: Einstein, Scal = 4, not conformally flat.
  const CurvatureBundle b = curvature_bundle(curv, std::span<const double>(pts.data(), 4));
  CHECK(b.Scal == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(max_abs(b.C) > 0.1);
  CHECK(max_abs(b.A) < 1e-12);
}

TEST_CASE("three-dimensional metrics have zero Weyl tensor") {
  const GeometrySpec spec = testgeo::curved_3d();
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  CHECK(max_abs_over(curv.weyl(), pts) < 1e-12);
  CHECK(max_abs_over(curv.cotton(), pts) > 1e-4);
  const auto ids = curvature_identities(curv);
  const auto m = measure(ids, pts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    INFO(ids[i].name);
    CHECK(ids[i].name != std::string("weyl_divergence"));
    CHECK(m[i].residual <= 1e-10);
  }
}

TEST_CASE("conformally flat metric: Weyl and Cotton vanish") {
  const GeometrySpec spec = testgeo::conformally_flat_4d("1", "0", "0", "1");
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  const double cmax = max_abs_over(curv.weyl(), pts);
  const double amax = max_abs_over(curv.cotton(), pts);
  CHECK(cmax <= 1e-8);
  CHECK(amax <= 1e-8);
  CHECK(max_abs_over(curv.riemann(), pts) > 1e-3);
}

TEST_CASE("tube Fefferman metric matches the frozen oracle") {
  const GeometrySpec spec = testgeo::tube_fefferman();
  Curvature curv(spec);
  const std::vector<double> p{0.3, -0.2, 0.1, 0.4};
  const CurvatureBundle b = curvature_bundle(curv, p);
  const double P_ref[16] = {-0.054657631464481125, 0, 0, 0, 0, -0.06982898396015136, -0.007344526340451701,
                            -0.03722918738058405, 0, -0.007344526340451701, 0.022958966059446324,
                            0.017434651184842463, 0, -0.03722918738058405, 0.017434651184842463, 1.0};
  for (int i = 0; i < 16; ++i) CHECK(b.P[static_cast<std::size_t>(i)] == doctest::Approx(P_ref[i]).epsilon(1e-12));
  CHECK(b.Scal == doctest::Approx(-0.6276474426543287).epsilon(1e-12));
  CHECK(b.C(0, 1, 0, 1) == doctest::Approx(0.006629193425295819).epsilon(1e-11));
  CHECK(b.C(0, 2, 0, 2) == doctest::Approx(0.017874179117549346).epsilon(1e-11));
  CHECK(b.Gamma(0, 1, 1) == doctest::Approx(0.0018968587098539482).epsilon(1e-12));

  const auto pts = sample_points(spec);
  validate_metric(curv, pts);
  const auto ids = curvature_identities(curv);
  const auto m = measure(ids, pts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    INFO(ids[i].name << " residual " << m[i].residual);
    CHECK(m[i].residual <= (ids[i].tol == TolClass::Alg ? 1e-10 : 1e-8 * (1 + m[i].scale)));
  }
  const InsertionResiduals ins = insertion_residuals(curv, pts);
  CHECK(ins.weyl <= 1e-8);
  CHECK(ins.cotton <= 1e-8);
  CHECK(ins.bianchi_chain <= 1e-8);
  CHECK(conformal_killing_residual(curv, pts) <= 1e-10);
}

TEST_CASE("conformal Killing residual examples") {
  SUBCASE("translation") {
    const GeometrySpec spec = testgeo::flat_4d("1", "0", "0", "0");
    CHECK(conformal_killing_residual(Curvature(spec), sample_points(spec)) == 0.0);
  }
  SUBCASE("dilation") {
    const GeometrySpec spec = testgeo::flat_4d("x", "y", "z", "t");
    Curvature curv(spec);
    const auto pts = sample_points(spec);
    CHECK(conformal_killing_residual(curv, pts) <= 1e-12);
    const KappaJets k = kappa_jets(curv);
    CHECK(expr::eval(k.div, std::span<const double>(pts.data(), 4)) == 4.0);
  }
  SUBCASE("x^2 d_y on the unit box is not conformal Killing") {
    const GeometrySpec spec = testgeo::flat_4d("0", "x^2", "0", "0");
    CHECK(conformal_killing_residual(Curvature(spec), sample_points(spec)) > 0.1);
  }
}

TEST_CASE("negative control breaks the Weyl insertion") {
  const GeometrySpec spec = testgeo::negative_control();
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  const InsertionResiduals ins = insertion_residuals(curv, pts);
  CHECK(ins.weyl > 10 * 1e-8 * (1 + max_abs_over(curv.weyl(), pts)));
}

TEST_CASE("covariant derivative basics") {
  const GeometrySpec spec = testgeo::tube_fefferman();
  Curvature curv(spec);
  const auto pts = sample_points(spec);
  expr::Pool& P = curv.pool();
  // Scalar gradient equals componentwise diff.
  SymField f = zeros(Shape(4, {}), P);
  f[0] = expr::parse("sin(x*y) + u^2*v", P);
  const SymField df = curv.nabla(f);
  for (int a = 0; a < 4; ++a) CHECK(df(a) == expr::diff(f[0], a));
  // Raising then lowering is the identity.
  const SymField v = curv.raise(curv.ricci(), 1);
  const SymField back = curv.lower(v, 1);
  const auto m = measure({Identity{"raise_lower", "", TolClass::Alg, back, curv.ricci(), {}}}, pts);
  CHECK(m[0].residual <= 1e-12 * (1 + m[0].scale));
  // Christoffel symmetric in the lower pair.
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(curv.christoffel()(c, a, b) == curv.christoffel()(c, b, a));
}

TEST_CASE("degenerate metric and signature mismatch are reported") {
  SUBCASE("degenerate") {
    const GeometrySpec spec = GeometrySpec::from_strings(
        "degenerate", {1, 1, -1}, {"x", "y", "t"}, {"x", "0", "1", "0", "0", "-1"}, {"1", "0", "0"},
        {{-1, 1}, {-1, 1}, {-1, 1}});
    Curvature curv(spec);
    const std::vector<double> pts{0.0, 0.1, 0.2};
    CHECK_THROWS_WITH_AS(validate_metric(curv, pts), doctest::Contains("degenerate metric"), NumericalError);
  }
  SUBCASE("signature") {
    const GeometrySpec spec = GeometrySpec::from_strings("sig", {1, 1, 1}, {"x", "y", "t"},
                                                         {"1", "0", "1", "0", "0", "-1"}, {"1", "0", "0"},
                                                         {{-1, 1}, {-1, 1}, {-1, 1}});
    CHECK_THROWS_AS(validate_metric(Curvature(spec), sample_points(spec)), InputError);
  }
}
