#pragma once

// Geometries shared by the unit tests. The bundled corpus carries the same
// metrics as geometry files; these builders keep unit tests independent of
// the file parser.

#include <string>
#include <vector>

#include "feff/geometry.hpp"

namespace testgeo {

inline std::vector<feff::Interval> box(int n, double lo = -1.0, double hi = 1.0) {
  return std::vector<feff::Interval>(static_cast<std::size_t>(n), feff::Interval{lo, hi});
}

inline feff::GeometrySpec flat_4d(std::string kx, std::string ky, std::string kz, std::string kt) {
  return feff::GeometrySpec::from_strings("flat_4d", {1, 1, 1, -1}, {"x", "y", "z", "t"},
                                          {"1", "0", "1", "0", "0", "1", "0", "0", "0", "-1"}, {kx, ky, kz, kt},
                                          box(4));
}

inline feff::GeometrySpec flat_3d(std::string kx, std::string ky, std::string kt) {
  return feff::GeometrySpec::from_strings("flat_3d", {1, 1, -1}, {"x", "y", "t"}, {"1", "0", "1", "0", "0", "-1"},
                                          {kx, ky, kt}, box(3));
}

inline feff::GeometrySpec conformally_flat_4d(std::string kx, std::string ky, std::string kz, std::string kt) {
  const std::string f = "exp(2*(0.1*x*y))";
  return feff::GeometrySpec::from_strings("conformally_flat_4d", {1, 1, 1, -1}, {"x", "y", "z", "t"},
                                          {f, "0", f, "0", "0", f, "0", "0", "0", "-" + f}, {kx, ky, kz, kt},
                                          box(4));
}

inline feff::GeometrySpec negative_control() {
  return feff::GeometrySpec::from_strings("negative_control", {1, 1, 1, -1}, {"x", "y", "z", "t"},
                                          {"1", "0", "1 + x^2/10", "0", "0", "1", "0", "0", "0", "-1"},
                                          {"1", "0", "0", "1"}, box(4));
}

inline feff::GeometrySpec curved_3d() {
  return feff::GeometrySpec::from_strings("curved_3d", {1, 1, -1}, {"x", "y", "t"},
                                          {"1 + y^2/5", "0", "1 + x^2/5", "0", "x*y/10", "-1"}, {"1", "0", "1"},
                                          box(3));
}

inline feff::GeometrySpec sphere_product() {
  return feff::GeometrySpec::from_strings("sphere_product", {1, 1, 1, 1}, {"a", "b", "c", "d"},
                                          {"1", "0", "sin(a)^2", "0", "0", "1", "0", "0", "0", "sin(c)^2"},
                                          {"0", "1", "0", "0"}, {{0.5, 2.5}, {0, 1}, {0.5, 2.5}, {0, 1}});
}

inline feff::GeometrySpec heisenberg_fefferman() {
  auto s = feff::GeometrySpec::from_strings("heisenberg_fefferman", {1, 1, 1, -1}, {"x", "y", "u", "v"},
                                            {"2", "0", "2", "0", "0", "0", "-2*y", "2*x", "1", "0"},
                                            {"0", "0", "0", "1"}, box(4));
  s.scale = feff::ScaleNote::Preferred;
  return s;
}

inline feff::GeometrySpec tube_fefferman() {
  const std::string h = "(1 + x^2/2)";
  const std::string fp = "(x^3/3 + 2*x)";
  const std::string a = "(-x/(3*(2 + x^2)))";
  const std::string b = "((2 - x^2)/(12*(2 + x^2)^3))";
  auto s = feff::GeometrySpec::from_strings(
      "tube_fefferman", {1, 1, 1, -1}, {"x", "y", "u", "v"},
      {h, "0", h + " + 2*" + fp + "*(" + a + " + " + b + "*" + fp + ")", "0", a + " + 2*" + b + "*" + fp, "2*" + b,
       "0", fp, "1", "0"},
      {"0", "0", "0", "1"}, box(4));
  s.scale = feff::ScaleNote::Preferred;
  return s;
}

}  // namespace testgeo
