#pragma once

// Geometry files: a small sectioned key = value format (see docs/format.md).
//
//   [geometry]  name, dimension, signature, coords, metric, kappa, scale
//   [domain]    one "lo hi" string per coordinate, keyed by coordinate name
//   [test]      samples, seed, omega, expected_verdict
//   [holonomy]  epsilon, steps, loops_per_plane
//
// Values are double-quoted strings, numbers, or bracketed lists of either,
// and lists may span lines. '#' starts a comment outside strings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feff/geometry.hpp"
#include "feff/holonomy.hpp"

namespace feff {

struct GeometryFile {
  std::string origin;  // path or "<input>", used in error messages
  std::string text;    // raw bytes as read, hashed into reports

  std::string name;
  int dimension = 0;
  std::vector<int> signature;
  std::vector<std::string> coords;
  std::vector<std::string> metric;  // row-major lower triangle
  std::vector<std::string> kappa;
  ScaleNote scale = ScaleNote::Unknown;
  std::vector<Interval> domain;

  int samples = 20;
  std::uint64_t seed = 1;
  std::optional<std::string> omega;
  std::optional<std::string> expected_verdict;

  bool has_holonomy = false;
  HolonomyOptions holonomy;

  // 1-based source lines of expression values, for diagnostics.
  std::vector<int> metric_lines;
  std::vector<int> kappa_lines;
  int omega_line = 0;

  bool operator==(const GeometryFile& o) const;
};

/// Throws InputError "<origin>:<line>: <message>".
GeometryFile parse_geometry_file(std::string_view text, std::string origin = "<input>");
GeometryFile load_geometry_file(const std::filesystem::path& path);

/// Canonical text form; parse(serialize(f)) == f.
std::string serialize(const GeometryFile& f);

/// Builds the symbolic geometry. Expression errors carry the file line.
GeometrySpec to_spec(const GeometryFile& f);

/// Omega parsed in the geometry pool; nullopt when the file has none.
std::optional<expr::Expr> parse_omega(const GeometryFile& f, expr::Pool& pool);

}  // namespace feff
