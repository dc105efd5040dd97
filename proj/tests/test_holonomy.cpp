#include <doctest.h>

#include <cmath>

#include "feff/adjoint.hpp"
#include "feff/errors.hpp"
#include "feff/holonomy.hpp"
#include "test_geometries.hpp"

using namespace feff;

namespace {

struct Run {
  HolonomyReport rep;
  bool has_j = false;
};

Run run(const GeometrySpec& spec, HolonomyOptions opt = {}) {
  Curvature curv(spec);
  Tractor tr(curv);
  const AdjointSection sec = splitting(tr, kappa_jets(curv));
  const auto base = domain_centre(spec);
  const auto J = complex_structure(tr, sec, base, 1e-5);
  Run r;
  r.has_j = J.has_value();
  r.rep = holonomy_report(tr, opt, base, J, 1e-6, 2);
  return r;
}

}  // namespace

TEST_CASE("flat space: trivial holonomy") {
  const Run r = run(testgeo::flat_4d("1", "0", "0", "1"));
  for (const auto& e : r.rep.elements) {
    INFO(e.loop_id);
    CHECK(e.distance_from_identity <= 1e-12);
  }
  CHECK(r.rep.algebra_dimension == 0);
  for (const auto& s : r.rep.scaling) CHECK_FALSE(s.above_noise);
}

TEST_CASE("conformally flat: trivial holonomy") {
  const Run r = run(testgeo::conformally_flat_4d("1", "0", "0", "1"));
  for (const auto& e : r.rep.elements) CHECK(e.distance_from_identity <= 1e-9);
  CHECK(r.rep.algebra_dimension == 0);
}

TEST_CASE("tube Fefferman: holonomy in SU(p+1, q+1)") {
  const Run r = run(testgeo::tube_fefferman());
  REQUIRE(r.has_j);
  CHECK(r.rep.max_orthogonality <= 1e-6);
  CHECK(r.rep.max_commutator <= 1e-6);
  CHECK(r.rep.max_det_c_error <= 1e-6);
  CHECK(r.rep.max_reversal <= 1e-6);
  CHECK(r.rep.algebra_dimension >= 1);
  CHECK(r.rep.algebra_dimension <= 8);
  bool any = false;
  for (const auto& s : r.rep.scaling) {
    INFO(s.plane, " ", s.norm_eps, " ", s.norm_half);
    if (!s.second_order) continue;
    any = true;
    CHECK(s.ratio >= 3.5);
    CHECK(s.ratio <= 4.5);
  }
  CHECK(any);
}

TEST_CASE("planes with vanishing Omega at the base scale at third order") {
  const Run r = run(testgeo::curved_3d());
  for (const auto& s : r.rep.scaling) {
    INFO(s.plane);
    CHECK(s.above_noise);
    CHECK_FALSE(s.second_order);
    CHECK(s.ratio == doctest::Approx(8.0).epsilon(0.05));
  }
}

TEST_CASE("second-order planes halve by four") {
  for (const auto& spec : {testgeo::sphere_product(), testgeo::negative_control()}) {
    const Run r = run(spec);
    for (const auto& s : r.rep.scaling) {
      INFO(spec.name, " ", s.plane);
      REQUIRE(s.second_order);
      CHECK(s.ratio == doctest::Approx(4.0).epsilon(0.03));
    }
  }
}

TEST_CASE("negative control: holonomy leaves the complex structure") {
  const Run r = run(testgeo::negative_control());
  CHECK(r.rep.max_orthogonality <= 1e-6);
  bool curved = false;
  for (const auto& e : r.rep.elements) curved |= e.distance_from_identity > 1e-6;
  CHECK(curved);
}

TEST_CASE("worker count does not change holonomy") {
  const auto spec = testgeo::tube_fefferman();
  Curvature curv(spec);
  Tractor tr(curv);
  const auto ls = rectangle_loops(spec, domain_centre(spec), {});
  const auto a = transport(tr, ls, 1);
  const auto b = transport(tr, ls, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i].H.array() == b[i].H.array()).all());
}

TEST_CASE("loops outside the domain are rejected") {
  const auto spec = testgeo::flat_4d("1", "0", "0", "1");
  Curvature curv(spec);
  Tractor tr(curv);
  HolonomyOptions opt;
  opt.epsilon = 5.0;
  CHECK_THROWS_AS(holonomy_report(tr, opt, domain_centre(spec), std::nullopt, 1e-6), InputError);
}

TEST_CASE("reversed loop substitutes t -> 1 - t") {
  expr::Pool P({"t"});
  Loop L;
  L.id = "l";
  L.segments.push_back({{P.var(0) * 2, P.one()}});
  const Loop r = reversed(L, P);
  CHECK(r.id == "l_rev");
  CHECK(expr::to_string(r.segments[0].curve[0]) == expr::to_string((P.one() - P.var(0)) * 2));
}
