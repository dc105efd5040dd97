// feffcheck: verifies the local Fefferman-space characterisation on a
// geometry file.
//
//   feffcheck check <file> [--tolerance F] [--samples N] [--seed N] [--json]
//                          [--holonomy] [--rescale] [--workers N]
//   feffcheck selftest [--corpus DIR] [--json] [--workers N]
//   feffcheck curvature <file> --point v1,v2,...
//
// Exit codes: 0 verdict rendered, 1 selftest mismatch, 2 input error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "feff/check.hpp"
#include "feff/errors.hpp"
#include "feff/geofile.hpp"
#include "feff/report.hpp"

#ifndef FEFF_CORPUS_DIR
#define FEFF_CORPUS_DIR "corpus"
#endif

namespace {

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < tok.size() && tok[used] == ' ') ++used;
    if (used == 0 || used != tok.size()) throw feff::InputError("--point: '" + tok + "' is not a number");
    v.push_back(x);
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fefferman-space characterisation checker"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(feff::kToolVersion));

  feff::CheckOptions opt;
  std::string file;
  bool json = false;
  double tolerance = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  int workers = 1;

  CLI::App* check = app.add_subcommand("check", "run every check and render a verdict");
  check->add_option("file", file, "geometry file")->required();
  auto* tol_opt = check->add_option("--tolerance", tolerance, "base of tau_id (default 1e-8)");
  auto* samples_opt = check->add_option("--samples", samples, "number of sample points")->check(CLI::PositiveNumber);
  auto* seed_opt = check->add_option("--seed", seed, "sampling seed");
  check->add_flag("--json", json, "emit the report as JSON");
  check->add_flag("--holonomy", opt.holonomy, "transport tractor frames around coordinate loops");
  check->add_flag("--rescale", opt.rescale, "rerun with exp(2 omega) g and compare");
  check->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  std::string corpus = FEFF_CORPUS_DIR;
  CLI::App* selftest = app.add_subcommand("selftest", "run the corpus and compare with its annotations");
  selftest->add_option("--corpus", corpus, "corpus directory");
  selftest->add_flag("--json", json, "emit results as JSON");
  selftest->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  std::string point;
  CLI::App* curvature = app.add_subcommand("curvature", "dump curvature tensors at a point (JSON)");
  curvature->add_option("file", file, "geometry file")->required();
  curvature->add_option("--point", point, "comma-separated coordinates")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*tol_opt) opt.tolerance = tolerance;
  if (*samples_opt) opt.samples = samples;
  if (*seed_opt) opt.seed = seed;
  opt.workers = workers;

  try {
    if (*check) {
      const feff::GeometryFile f = feff::load_geometry_file(file);
      const feff::CheckReport rep = feff::run_check(f, opt);
      std::cout << (json ? feff::dump_json(feff::to_json(rep)) : feff::render_text(rep));
      if (!rep.consistent) {
        std::cerr << "feffcheck: internal consistency failure\n";
        return 3;
      }
      return 0;
    }
    if (*selftest) {
      const feff::SelftestResult res = feff::corpus_selftest(corpus, opt);
      std::cout << (json ? feff::dump_json(feff::to_json(res)) : feff::render_text(res));
      if (res.exit_code == 2 && !res.message.empty()) std::cerr << "feffcheck: " << res.message << "\n";
      return res.exit_code;
    }
    if (*curvature) {
      const feff::GeometryFile f = feff::load_geometry_file(file);
      const feff::GeometrySpec spec = feff::to_spec(f);
      const std::vector<double> x = parse_point(point);
      if (static_cast<int>(x.size()) != spec.n)
        throw feff::InputError("--point needs " + std::to_string(spec.n) + " coordinates");
      const feff::Curvature curv(spec);
      std::cout << feff::dump_json(feff::to_json(feff::curvature_bundle(curv, x), spec.coords));
      return 0;
    }
  } catch (const feff::InputError& e) {
    std::cerr << "feffcheck: " << e.what() << "\n";
    return 2;
  } catch (const feff::NumericalError& e) {
    std::cerr << "feffcheck: numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
