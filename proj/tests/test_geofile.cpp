#include <doctest.h>

#include <filesystem>
#include <random>

#include "feff/errors.hpp"
#include "feff/geofile.hpp"

using namespace feff;

namespace {

const char* kMinimal = R"(# comment line
[geometry]
name = "g"   # trailing comment
dimension = 3
signature = [1, 1, -1]
coords = ["x", "y", "t"]
metric = [
  "1",
  "0", "1",
  "0", "0", "-1",
]
kappa = ["1", "0", "1"]

[domain]
x = "-1 1"
y = "-2 2"
t = "0 0.5"
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

void expect_error(const std::string& text, const std::string& fragment) {
  CAPTURE(fragment);
  CHECK_THROWS_WITH_AS(parse_geometry_file(text, "f.geom"), doctest::Contains(fragment.c_str()), InputError);
}

}  // namespace

TEST_CASE("minimal file parses with defaults") {
  const GeometryFile f = parse_geometry_file(kMinimal);
  CHECK(f.name == "g");
  CHECK(f.dimension == 3);
  CHECK(f.signature == std::vector<int>{1, 1, -1});
  CHECK(f.metric.size() == 6);
  CHECK(f.metric_lines == std::vector<int>{8, 9, 9, 10, 10, 10});
  CHECK(f.domain[1].lo == -2.0);
  CHECK(f.domain[2].hi == 0.5);
  CHECK(f.samples == 20);
  CHECK(f.seed == 1);
  CHECK(f.scale == ScaleNote::Unknown);
  CHECK_FALSE(f.has_holonomy);
  CHECK_FALSE(f.omega);
}

TEST_CASE("round trip through serialize") {
  GeometryFile f = parse_geometry_file(kMinimal);
  CHECK(parse_geometry_file(serialize(f)) == f);
  f.omega = "x/10";
  f.expected_verdict = "ODD_DIM_NILPOTENT";
  f.has_holonomy = true;
  f.holonomy.epsilon = 0.125;
  f.holonomy.steps = 400;
  f.scale = ScaleNote::Preferred;
  f.metric[0] = "1 + \"quoted\\\"";  // escapes survive even if not a valid expression
  f.domain[0] = {-0.1, 1.0 / 3.0};
  const std::string once = serialize(f);
  const GeometryFile g = parse_geometry_file(once);
  CHECK(g == f);
  CHECK(serialize(g) == once);
}

TEST_CASE("corpus files round trip") {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(FEFF_CORPUS_DIR)) {
    if (e.path().extension() != ".geom") continue;
    ++count;
    const GeometryFile f = load_geometry_file(e.path());
    CAPTURE(f.origin);
    CHECK(parse_geometry_file(serialize(f)) == f);
    CHECK(f.expected_verdict.has_value());
    CHECK_NOTHROW(to_spec(f));
  }
  CHECK(count >= 6);
}

TEST_CASE("structural errors carry line numbers") {
  expect_error(replace(kMinimal, "dimension = 3", "dimension = 3\ncolour = \"red\""), "f.geom:5: unknown key 'colour'");
  expect_error(replace(kMinimal, "[domain]", "[domain]\nx = \"0 1\""), "f.geom:16: duplicate key 'x'");
  expect_error(std::string(kMinimal) + "[extras]\n", "unknown section [extras]");
  expect_error(replace(kMinimal, "t = \"0 0.5\"", ""), "missing key 't' in [domain]");
  expect_error(replace(kMinimal, "\"0 0.5\"", "\"1 0.5\""), "f.geom:17: domain 't' must satisfy lo < hi");
  expect_error(replace(kMinimal, "\"0 0.5\"", "\"0 0.5 2\""), "must be \"lo hi\"");
  expect_error(replace(kMinimal, "[1, 1, -1]", "[1, 2, -1]"), "f.geom:5: signature entries");
  expect_error(replace(kMinimal, "[1, 1, -1]", "[1, -1]"), "signature needs 3 entries");
  expect_error(replace(kMinimal, "\"0\", \"0\", \"-1\",", "\"0\", \"-1\","), "metric needs 6");
  expect_error(replace(kMinimal, "dimension = 3", "dimension = 2"), "dimension must be at least 3");
  expect_error(replace(kMinimal, "dimension = 3", "dimension = 3.5"), "must be an integer");
  expect_error(replace(kMinimal, "name = \"g\"", "name = \"g"), "f.geom:3: unterminated string");
  expect_error(replace(kMinimal, "[\"x\", \"y\", \"t\"]", "[\"x\", \"x\", \"t\"]"), "duplicate coordinate 'x'");
  expect_error(replace(kMinimal, "[geometry]", "name = \"early\"\n[geometry]"), "outside of a section");
  expect_error(replace(kMinimal, "kappa = [\"1\", \"0\", \"1\"]", "kappa = [\"1\", \"0\" \"1\"]"),
               "expected ',' or ']'");
  expect_error(std::string(kMinimal) + "[test]\nexpected_verdict = \"MAYBE\"\n", "unknown verdict 'MAYBE'");
  expect_error(std::string(kMinimal) + "[holonomy]\nsteps = 2\n", "steps must be in");
}

TEST_CASE("expression errors point at the file line") {
  const GeometryFile f = parse_geometry_file(replace(kMinimal, "\"0\", \"0\", \"-1\"", "\"0\", \"z\", \"-1\""),
                                             "f.geom");
  CHECK_THROWS_WITH_AS(to_spec(f), doctest::Contains("f.geom:10: metric g_ty: undeclared identifier 'z'"),
                       InputError);
  const GeometryFile g = parse_geometry_file(replace(kMinimal, "[\"1\", \"0\", \"1\"]", "[\"1\", \"0\", \"x +\"]"),
                                             "f.geom");
  CHECK_THROWS_WITH_AS(to_spec(g), doctest::Contains("f.geom:12: kappa^t"), InputError);
}

TEST_CASE("random byte mutations never crash the parser") {
  std::mt19937_64 rng(5);
  const std::string base = kMinimal;
  const std::string alphabet = "[]=\",#\n abc019.-";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s = base;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) s[rng() % s.size()] = alphabet[rng() % alphabet.size()];
    try {
      const GeometryFile f = parse_geometry_file(s);
      (void)to_spec(f);
    } catch (const InputError&) {
    }
  }
}
