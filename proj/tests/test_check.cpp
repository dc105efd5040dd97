#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "feff/check.hpp"
#include "feff/errors.hpp"
#include "feff/report.hpp"
#include "test_geometries.hpp"

using namespace feff;
namespace fs = std::filesystem;

namespace {

GeometryFile corpus(const std::string& name) { return load_geometry_file(fs::path(FEFF_CORPUS_DIR) / (name + ".geom")); }

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("feff_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("corpus verdicts") {
  const std::pair<const char*, Verdict> cases[] = {
      {"flat_null_translation_4d", Verdict::InconclusiveSign},
      {"flat_null_translation_3d", Verdict::OddDimNilpotent},
      {"conformally_flat_null_4d", Verdict::InconclusiveSign},
      {"negative_control", Verdict::HypothesesFail},
      {"heisenberg_fefferman", Verdict::FeffermanLocal},
      {"tube_fefferman", Verdict::FeffermanLocal},
  };
  for (const auto& [name, want] : cases) {
    CAPTURE(name);
    const CheckReport r = run_check(corpus(name));
    CHECK(r.verdict == want);
    CHECK(r.consistent);
    for (const CheckRecord& c : r.checks) CHECK_FALSE(c.anchor.empty());
  }
}

TEST_CASE("verdict is monotone in tolerance") {
  for (const char* name : {"heisenberg_fefferman", "tube_fefferman", "negative_control"}) {
    const GeometryFile f = corpus(name);
    bool seen_local = false;
    for (double tol : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-3}) {
      CheckOptions o;
      o.tolerance = tol;
      const Verdict v = run_check(to_spec(f), o, std::nullopt).verdict;
      if (seen_local) CHECK(v != Verdict::HypothesesFail);
      seen_local |= v == Verdict::FeffermanLocal;
    }
  }
}

TEST_CASE("reports do not depend on the worker count") {
  const GeometryFile f = corpus("tube_fefferman");
  CheckOptions a, b;
  a.workers = 1;
  b.workers = 4;
  CHECK(dump_json(to_json(run_check(f, a))) == dump_json(to_json(run_check(f, b))));
}

TEST_CASE("omega = 0 leaves every residual unchanged") {
  const GeometrySpec spec = testgeo::flat_4d("1", "0", "0", "1");
  const CheckReport a = run_check(spec, {}, std::nullopt);
  const CheckReport b = run_check(spec.rescaled(spec.pool->zero()), {}, std::nullopt);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    CHECK(a.checks[i].name == b.checks[i].name);
    CHECK(a.checks[i].residual == b.checks[i].residual);
  }
  CHECK(a.lambda.values == b.lambda.values);
  CHECK(a.verdict == b.verdict);
}

TEST_CASE("odd dimension: nilpotent adjoint tractor") {
  const CheckReport r = run_check(corpus("flat_null_translation_3d"));
  CHECK(r.find("odd_lambda_zero")->pass);
  CHECK(r.find("odd_square_zero")->pass);
  CHECK(r.find("odd_kernel")->pass);
}

TEST_CASE("samples and seed options override the file") {
  CheckOptions o;
  o.samples = 5;
  o.seed = 99;
  const CheckReport r = run_check(corpus("flat_null_translation_4d"), o);
  CHECK(r.samples == 5);
  CHECK(r.seed == 99);
  CHECK(r.lambda.values.size() == 5);
}

TEST_CASE("errors carry the file name") {
  const fs::path d = temp_dir("errors");
  std::ofstream(d / "bad.geom") << serialize(corpus("flat_null_translation_3d")) << "\n[test]\nsamples = 3\n";
  CHECK_THROWS_WITH_AS(load_geometry_file(d / "bad.geom"), doctest::Contains("bad.geom:"), InputError);

  GeometryFile deg = corpus("flat_null_translation_3d");
  deg.metric[0] = "0";
  deg.origin = "deg.geom";
  CHECK_THROWS_WITH_AS(run_check(deg), doctest::Contains("deg.geom: degenerate metric"), NumericalError);

  GeometryFile dom = corpus("flat_null_translation_3d");
  dom.metric[0] = "1 + log(x)";
  dom.origin = "dom.geom";
  CHECK_THROWS_WITH_AS(run_check(dom), doctest::Contains("dom.geom:"), NumericalError);
}

TEST_CASE("selftest: pass, flipped annotation, empty corpus") {
  CHECK(corpus_selftest(FEFF_CORPUS_DIR, {}).exit_code == 0);

  const fs::path d = temp_dir("flip");
  GeometryFile f = corpus("flat_null_translation_4d");
  f.expected_verdict = "FEFFERMAN_LOCAL";
  std::ofstream(d / "flipped.geom") << serialize(f);
  const SelftestResult r = corpus_selftest(d, {});
  CHECK(r.exit_code == 1);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].file == "flipped.geom");
  CHECK_FALSE(r.entries[0].match);
  CHECK(render_text(r).find("FAIL  flipped.geom") != std::string::npos);

  const SelftestResult e = corpus_selftest(temp_dir("empty"), {});
  CHECK(e.exit_code == 2);
  CHECK(e.message == "no corpus");
}

TEST_CASE("json numbers use 17 significant digits") {
  nlohmann::ordered_json j;
  j["a"] = 0.1;
  j["b"] = 1.0 / 3.0;
  j["n"] = std::nan("");
  j["i"] = 3;
  CHECK(dump_json(j) == "{\n  \"a\": 0.10000000000000001,\n  \"b\": 0.33333333333333331,\n  \"n\": null,\n  \"i\": 3\n}\n");
}

TEST_CASE("fnv1a64") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}
