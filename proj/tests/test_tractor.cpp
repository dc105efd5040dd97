#include <doctest.h>

#include <vector>

#include "feff/parse.hpp"
#include "feff/tape.hpp"
#include "feff/tractor.hpp"
#include "test_geometries.hpp"

using namespace feff;

namespace {

void require_identities(const GeometrySpec& spec) {
  Curvature curv(spec);
  Tractor tr(curv);
  const auto pts = sample_points(spec);
  const auto ids = tractor_identities(tr);
  const auto m = measure(ids, pts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    INFO(spec.name << ": " << ids[i].name << " residual " << m[i].residual);
    CHECK(m[i].residual <= (ids[i].tol == TolClass::Alg ? 1e-10 : 1e-8 * (1 + m[i].scale)));
  }
  CHECK(check_tractor_signature(tr, pts) == -1);
}

}  // namespace

TEST_CASE("tractor identities on every test geometry") {
  require_identities(testgeo::flat_4d("1", "0", "0", "1"));
  require_identities(testgeo::flat_3d("1", "0", "1"));
  require_identities(testgeo::conformally_flat_4d("1", "0", "0", "1"));
  require_identities(testgeo::negative_control());
  require_identities(testgeo::curved_3d());
  require_identities(testgeo::sphere_product());
  require_identities(testgeo::heisenberg_fefferman());
  require_identities(testgeo::tube_fefferman());
}

TEST_CASE("flat connection acting on a constant Z tractor") {
  const GeometrySpec spec = testgeo::flat_4d("1", "0", "0", "1");
  Curvature curv(spec);
  Tractor tr(curv);
  expr::Pool& P = curv.pool();
  SymField v = zeros(Shape(4, {kTUp}), P);
  const int mu[4] = {2, -1, 3, 5};
  for (int a = 0; a < 4; ++a) v(tr.z_slot(a)) = P.constant(mu[a]);
  const SymField dv = tr.nabla(v);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  for (int a = 0; a < 4; ++a) {
    const double mu_low = (a == 3 ? -1 : 1) * mu[a];
    CHECK(expr::eval(dv(a, tr.y_slot()), p) == -mu_low);
    for (int b = 0; b < 4; ++b) CHECK(dv(a, tr.z_slot(b)).is_zero());
    CHECK(dv(a, tr.x_slot()).is_zero());
  }
}

TEST_CASE("tractor curvature: zero on conformally flat, non-zero on curved metrics") {
  const auto cf = testgeo::conformally_flat_4d("1", "0", "0", "1");
  Curvature c1(cf);
  Tractor t1(c1);
  const auto p1 = sample_points(cf);
  CHECK(max_abs_over(t1.curvature_formula(), p1) <= 1e-8);
  CHECK(max_abs_over(t1.curvature_commutator(), p1) <= 1e-8);

  const auto sp = testgeo::sphere_product();
  Curvature c2(sp);
  Tractor t2(c2);
  const auto p2 = sample_points(sp);
  CHECK(max_abs_over(t2.curvature_formula(), p2) > 0.1);

  const auto tube = testgeo::tube_fefferman();
  Curvature c3(tube);
  Tractor t3(c3);
  CHECK(max_abs_over(t3.curvature_formula(), sample_points(tube)) > 1e-3);
}

TEST_CASE("raising then lowering a tractor slot is the identity") {
  const auto spec = testgeo::tube_fefferman();
  Curvature curv(spec);
  Tractor tr(curv);
  const SymField om = tr.curvature_formula();
  const SymField back = tr.lower(tr.raise(om, 2), 2);
  const auto m = measure({Identity{"rl", "", TolClass::Alg, back, om, {}}}, sample_points(spec));
  CHECK(m[0].residual <= 1e-12);
}
