#pragma once

// Full pipeline on one geometry and the verdict rules.
//
// Checks fall into groups:
//   hypothesis   isotropy, conformal Killing, both insertions, parallelism;
//                these decide the verdict
//   structure    identities that hold for every metric and every kappa; a
//                failure is a numerical failure
//   consequence  identities implied by the hypotheses; bind only when the
//                hypotheses pass
//   killing      the Killing specialisation, applicable when kappa is
//                Killing in the chosen scale
//
// Verdicts:
//   FEFFERMAN_LOCAL    n even, hypotheses pass, lambda mean < -10 tau_id and
//                      spread <= tau_id (a local sufficient condition, not a
//                      global statement)
//   INCONCLUSIVE_SIGN  n even, hypotheses pass, lambda not negative
//   ODD_DIM_NILPOTENT  n odd, hypotheses pass; lambda = 0 and s o s = 0 must
//                      then hold or the run is inconsistent
//   HYPOTHESES_FAIL    otherwise

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "feff/adjoint.hpp"
#include "feff/geofile.hpp"
#include "feff/holonomy.hpp"
#include "feff/identity.hpp"

namespace feff {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class Verdict { FeffermanLocal, OddDimNilpotent, HypothesesFail, InconclusiveSign };
std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view s);

enum class CheckGroup { Hypothesis, Structure, Consequence, Killing };
std::string_view group_name(CheckGroup g);

struct CheckRecord {
  std::string name;
  std::string anchor;  // the identity tested, in index notation
  CheckGroup group = CheckGroup::Structure;
  double residual = 0.0;
  double scale = 0.0;
  double threshold = 0.0;
  bool pass = false;
  bool applicable = true;
  bool diagnostic = false;  // informational; never binds
};

struct LambdaRecord {
  std::vector<double> values;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;
  std::string sign;  // "negative", "zero", "positive" or "mixed"
};

struct InvarianceRecord {
  std::string omega;
  Verdict original = Verdict::HypothesesFail;
  Verdict rescaled = Verdict::HypothesesFail;
  bool both_hypotheses_pass = false;
  double lambda_change = 0.0;  // max over samples |lambda_hat - lambda|
  double threshold = 0.0;
  bool pass = false;
};

struct CheckOptions {
  std::optional<double> tolerance;  // overrides the base of tau_id
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  bool holonomy = false;  // also runs when the file has a [holonomy] section
  bool rescale = false;   // also runs when the file has omega
  int workers = 1;
};

struct CheckReport {
  std::string geometry;
  std::string tool_version{kToolVersion};
  std::string input_hash;
  std::uint64_t seed = 0;
  int samples = 0;
  int dimension = 0;
  std::vector<int> signature;
  ScaleNote scale = ScaleNote::Unknown;
  Tolerances tol;

  std::vector<CheckRecord> checks;
  LambdaRecord lambda;
  std::vector<int> kernel_dims;
  bool hypotheses_pass = false;
  bool consistent = true;
  Verdict verdict = Verdict::HypothesesFail;
  std::optional<std::string> expected_verdict;

  std::optional<HolonomyReport> holonomy;
  std::optional<InvarianceRecord> invariance;
  std::vector<std::string> notices;

  const CheckRecord* find(std::string_view name) const;
};

/// FNV-1a 64-bit, hex encoded.
std::string fnv1a64_hex(std::string_view bytes);

CheckReport run_check(const GeometryFile& file, const CheckOptions& opt = {});
/// Pipeline on an already built geometry. `hol` enables holonomy.
CheckReport run_check(const GeometrySpec& spec, const CheckOptions& opt, const std::optional<HolonomyOptions>& hol);

/// Reruns the pipeline with g replaced by exp(2 omega) g and compares
/// verdict and lambda with `base`.
InvarianceRecord run_conformal_invariance(const GeometrySpec& spec, const CheckReport& base, const CheckOptions& opt);

/// Expected-sign rule for the selftest: empty when the verdict constrains
/// nothing.
std::vector<std::string> allowed_signs(Verdict v);

struct SelftestEntry {
  std::string file;
  std::optional<CheckReport> report;
  std::string error;
  bool match = false;
  std::string detail;
};

struct SelftestResult {
  int exit_code = 0;  // 0 all match, 1 any mismatch, 2 no corpus or input error, 3 numerical failure
  std::vector<SelftestEntry> entries;
  std::string message;
};

/// Runs every *.geom file in `dir` (sorted by name).
SelftestResult corpus_selftest(const std::filesystem::path& dir, const CheckOptions& opt);

}  // namespace feff
