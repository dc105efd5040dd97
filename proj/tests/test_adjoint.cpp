#include <doctest.h>

#include <cmath>
#include <vector>

#include "feff/adjoint.hpp"
#include "feff/tape.hpp"
#include "test_geometries.hpp"

using namespace feff;

namespace {

struct Run {
  std::vector<Identity> ids;
  std::vector<Measured> m;
  AdjointNumerics num;
  double parallel = 0.0;

  double operator[](const std::string& name) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i].name == name) return m[i].residual;
    throw std::out_of_range(name);
  }
};

Run run(const GeometrySpec& spec) {
  Curvature curv(spec);
  Tractor tr(curv);
  const KappaJets k = kappa_jets(curv);
  const AdjointSection sec = splitting(tr, k);
  const auto pts = sample_points(spec);
  Run r;
  r.ids = adjoint_identities(tr, k, sec);
  r.m = measure(r.ids, pts);
  r.num = adjoint_numerics(tr, sec, pts, 1e-7);
  r.parallel = parallel_residual(tr, sec, pts);
  return r;
}

}  // namespace

TEST_CASE("flat null translation: everything vanishes") {
  const Run r = run(testgeo::flat_4d("1", "0", "0", "1"));
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    INFO(r.ids[i].name);
    CHECK(r.m[i].residual <= 1e-10);
  }
  CHECK(r.parallel == 0.0);
  for (double l : r.num.lambda.values) CHECK(l == 0.0);
  CHECK(r.num.square.max_abs <= 1e-12);
  for (int k : r.num.square.kernel_dims) CHECK(k >= 1);
}

TEST_CASE("flat translation: box of K vanishes") {
  const auto spec = testgeo::flat_4d("1", "0", "0", "0");
  Curvature curv(spec);
  Tractor tr(curv);
  const AdjointSection sec = splitting(tr, kappa_jets(curv));
  const SymField nnK = tr.nabla(sec.nabla_K);
  for (int B = 0; B < 6; ++B) {
    expr::Expr box = curv.pool().zero();
    for (int a = 0; a < 4; ++a) box += curv.inverse_metric()(a, a) * nnK(a, a, B);
    CHECK(expr::eval(box, std::vector<double>{0.1, 0.2, 0.3, 0.4}) == 0.0);
  }
}

TEST_CASE("dilation on flat space is a normal conformal Killing field") {
  const auto spec = testgeo::flat_4d("x", "y", "z", "t");
  Curvature curv(spec);
  Tractor tr(curv);
  const AdjointSection sec = splitting(tr, kappa_jets(curv));
  const std::vector<double> p{0.3, -0.1, 0.2, 0.5};
  CHECK(expr::eval(sec.div, p) == 4.0);
  CHECK(expr::eval(sec.K(tr.y_slot()), p) == -1.0);
  const Run r = run(spec);
  CHECK(r.parallel <= 1e-10);
  CHECK(r["lemma_second_derivative"] <= 1e-10);
}

TEST_CASE("x^2 d_y is not parallel") {
  const Run r = run(testgeo::flat_4d("0", "x^2", "0", "0"));
  CHECK(r.parallel > 10 * 1e-8);
  CHECK(r["projection"] <= 1e-12);
  CHECK(r["omega_s_reconstruction"] <= 1e-8);
}

TEST_CASE("Fefferman entries") {
  for (const auto& spec : {testgeo::heisenberg_fefferman(), testgeo::tube_fefferman()}) {
    const Run r = run(spec);
    for (std::size_t i = 0; i < r.ids.size(); ++i) {
      INFO(spec.name << ": " << r.ids[i].name << " = " << r.m[i].residual);
      CHECK(r.m[i].residual <= 1e-8 * (1 + r.m[i].scale));
    }
    CHECK(r.parallel <= 1e-8);
    CHECK(r.num.lambda.mean == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.num.lambda.spread <= 1e-8);
    CHECK(r.num.square.residual <= 1e-8);
    REQUIRE(r.num.complex.applicable);
    CHECK(r.num.complex.trace <= 1e-8);
    CHECK(r.num.complex.j_trace <= 1e-8);
    CHECK(r.num.complex.j_square_residual <= 1e-8);
  }
}

TEST_CASE("odd dimension: null translation gives nilpotent s") {
  const Run r = run(testgeo::flat_3d("1", "0", "1"));
  CHECK(r.parallel == 0.0);
  CHECK(r.num.square.max_abs <= 1e-10);
  for (int k : r.num.square.kernel_dims) CHECK(k >= 1);
  CHECK(!r.num.complex.applicable);
}

TEST_CASE("negative control: identity holds while the value does not") {
  const Run r = run(testgeo::negative_control());
  CHECK(r["omega_s_reconstruction"] <= 1e-8);
  CHECK(r.parallel > 1e-3);
  CHECK(r["adjoint_skew"] > 1e-3);
}
