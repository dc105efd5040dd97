#include "feff/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "feff/errors.hpp"
#include "feff/geocalc.hpp"
#include "feff/tractor.hpp"

namespace feff {

namespace {

const std::set<std::string> kHypotheses{"isotropy", "conformal_killing", "weyl_insertion", "cotton_insertion",
                                        "parallel"};
const std::set<std::string> kConsequences{"adjoint_skew",  "kappa_omega",         "omega_s",
                                          "lambda_trace",  "lemma_omega_nabla_kappa", "lemma_second_derivative",
                                          "bianchi_chain"};
const std::set<std::string> kKilling{"killing_lambda", "killing_ricci"};

std::string lambda_sign(const LambdaRecord& l, double tau) {
  double mx = 0.0;
  for (double v : l.values) mx = std::max(mx, std::abs(v));
  if (mx <= 10.0 * tau) return "zero";
  if (l.mean < -10.0 * tau && l.max < 0.0) return "negative";
  if (l.mean > 10.0 * tau && l.min > 0.0) return "positive";
  return "mixed";
}

template <class F>
auto with_origin(const std::string& origin, F&& f) {
  auto prefixed = [&](const char* what) {
    const std::string w = what;
    return w.rfind(origin + ":", 0) == 0 ? w : origin + ": " + w;
  };
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(prefixed(e.what()));
  } catch (const NumericalError& e) {
    throw NumericalError(prefixed(e.what()));
  }
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::FeffermanLocal: return "FEFFERMAN_LOCAL";
    case Verdict::OddDimNilpotent: return "ODD_DIM_NILPOTENT";
    case Verdict::HypothesesFail: return "HYPOTHESES_FAIL";
    case Verdict::InconclusiveSign: return "INCONCLUSIVE_SIGN";
  }
  return "";
}

std::optional<Verdict> verdict_from_name(std::string_view s) {
  for (Verdict v : {Verdict::FeffermanLocal, Verdict::OddDimNilpotent, Verdict::HypothesesFail,
                    Verdict::InconclusiveSign})
    if (verdict_name(v) == s) return v;
  return std::nullopt;
}

std::string_view group_name(CheckGroup g) {
  switch (g) {
    case CheckGroup::Hypothesis: return "hypothesis";
    case CheckGroup::Structure: return "structure";
    case CheckGroup::Consequence: return "consequence";
    case CheckGroup::Killing: return "killing";
  }
  return "";
}

const CheckRecord* CheckReport::find(std::string_view name) const {
  for (const CheckRecord& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CheckReport run_check(const GeometrySpec& spec_in, const CheckOptions& opt, const std::optional<HolonomyOptions>& hol) {
  GeometrySpec spec = spec_in;
  if (opt.samples) spec.samples = *opt.samples;
  if (opt.seed) spec.seed = *opt.seed;
  if (spec.samples < 1) throw InputError("samples must be positive");

  CheckReport rep;
  rep.geometry = spec.name;
  rep.seed = spec.seed;
  rep.samples = spec.samples;
  rep.dimension = spec.n;
  rep.signature = spec.signature;
  rep.scale = spec.scale;
  if (opt.tolerance) {
    if (!(*opt.tolerance > 0.0)) throw InputError("tolerance must be positive");
    rep.tol.id = *opt.tolerance;
  }
  const Tolerances& tol = rep.tol;
  const int n = spec.n;
  const int workers = std::max(1, opt.workers);

  const std::vector<double> pts = sample_points(spec);
  const Curvature curv(spec);
  validate_metric(curv, pts);
  const Tractor tr(curv);
  if (const int bad = check_tractor_signature(tr, pts); bad >= 0)
    throw NumericalError("tractor metric has the wrong signature at sample " + std::to_string(bad));
  const KappaJets k = kappa_jets(curv);
  const AdjointSection sec = splitting(tr, k);

  std::vector<Identity> ids = curvature_identities(curv);
  for (auto& v : {tractor_identities(tr), kappa_identities(curv, k), adjoint_identities(tr, k, sec)})
    ids.insert(ids.end(), v.begin(), v.end());
  {
    SymField sym = zeros(Shape(n, {kDown, kDown}), curv.pool());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) sym(a, b) = curv.pool().rational(1, 2) * (k.nabla(a, b) + k.nabla(b, a));
    Identity kil{"killing", "nabla_(a kappa_b) = 0", TolClass::Id, sym, {}, {k.nabla}};
    kil.diagnostic = true;
    ids.push_back(std::move(kil));
  }
  const std::vector<Measured> m = measure(ids, pts, workers);

  double omega_scale = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Identity& id = ids[i];
    CheckRecord r;
    r.name = id.name;
    r.anchor = id.anchor;
    r.residual = m[i].residual;
    r.scale = m[i].scale;
    r.threshold = tol.threshold(id.tol, m[i].scale);
    r.pass = r.residual <= r.threshold;
    r.diagnostic = id.diagnostic;
    if (kHypotheses.count(id.name)) {
      r.group = CheckGroup::Hypothesis;
    } else if (kConsequences.count(id.name)) {
      r.group = CheckGroup::Consequence;
      // Identities that need the preferred scale arrive flagged diagnostic;
      // the others are binding consequences of the hypotheses.
      if (id.name != "lemma_omega_nabla_kappa" && id.name != "lemma_second_derivative") r.diagnostic = false;
    } else if (kKilling.count(id.name) || id.name == "killing") {
      r.group = CheckGroup::Killing;
    } else {
      r.group = CheckGroup::Structure;
    }
    if (id.name == "kappa_omega") omega_scale = m[i].scale;
    rep.checks.push_back(std::move(r));
  }

  rep.hypotheses_pass = true;
  for (const CheckRecord& r : rep.checks)
    if (r.group == CheckGroup::Hypothesis) rep.hypotheses_pass = rep.hypotheses_pass && r.pass;

  // Killing specialisation binds only when kappa is Killing here.
  {
    const bool killing = rep.find("killing")->pass;
    for (CheckRecord& r : rep.checks)
      if (kKilling.count(r.name)) {
        r.applicable = killing;
        r.diagnostic = !killing;
      }
  }

  const AdjointNumerics num = adjoint_numerics(tr, sec, pts, 10.0 * tol.id, workers);
  rep.lambda.values = num.lambda.values;
  rep.lambda.mean = num.lambda.mean;
  rep.lambda.min = num.lambda.min;
  rep.lambda.max = num.lambda.max;
  rep.lambda.spread = num.lambda.spread;
  rep.lambda.sign = lambda_sign(rep.lambda, tol.id);
  rep.kernel_dims = num.square.kernel_dims;

  double lam_abs = 0.0;
  for (double v : rep.lambda.values) lam_abs = std::max(lam_abs, std::abs(v));
  auto add = [&](std::string name, std::string anchor, CheckGroup g, double res, double scale, double thr) {
    CheckRecord r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    r.group = g;
    r.residual = res;
    r.scale = scale;
    r.threshold = thr;
    r.pass = res <= thr;
    rep.checks.push_back(std::move(r));
    return &rep.checks.back();
  };
  add("lambda_constant", "max lambda - min lambda = 0", CheckGroup::Consequence, rep.lambda.spread, lam_abs, tol.id);
  add("square_identity", "s o s = lambda id", CheckGroup::Consequence, num.square.residual, num.square.max_abs,
      tol.id_scaled(num.square.max_abs));
  {
    const bool ap = n % 2 == 0 && num.complex.applicable;
    add("complex_trace", "Omega_ab^A_A = 0", CheckGroup::Consequence, num.complex.trace, omega_scale,
        tol.id_scaled(omega_scale))
        ->applicable = ap;
    add("complex_j_trace", "Omega_ab^A_B J^B_A = 0", CheckGroup::Consequence, num.complex.j_trace, omega_scale,
        tol.id_scaled(omega_scale))
        ->applicable = ap;
    add("j_square", "J o J = -id", CheckGroup::Consequence, num.complex.j_square_residual, 1.0, tol.id_scaled(1.0))
        ->applicable = ap;
  }
  if (n % 2 == 1) {
    int empty_kernel = 0;
    for (int d : rep.kernel_dims) empty_kernel += (d == 0);
    add("odd_lambda_zero", "lambda = 0", CheckGroup::Consequence, lam_abs, 0.0, tol.id);
    add("odd_square_zero", "s o s = 0", CheckGroup::Consequence, num.square.max_abs, 0.0, tol.id);
    add("odd_kernel", "ker s != 0 at every sample", CheckGroup::Consequence, empty_kernel, 0.0, 0.0);
  }

  const bool neg = rep.lambda.mean < -10.0 * tol.id && rep.lambda.spread <= tol.id;
  if (!rep.hypotheses_pass)
    rep.verdict = Verdict::HypothesesFail;
  else if (n % 2 == 1)
    rep.verdict = Verdict::OddDimNilpotent;
  else
    rep.verdict = neg ? Verdict::FeffermanLocal : Verdict::InconclusiveSign;

  if (hol) {
    const std::vector<double> base = domain_centre(spec);
    const auto J = complex_structure(tr, sec, base, 10.0 * tol.id);
    HolonomyReport hr = holonomy_report(tr, *hol, base, J, tol.ode, workers);
    add("holonomy_orthogonality", "H^T h H = h", CheckGroup::Structure, hr.max_orthogonality, 1.0, tol.ode);
    add("holonomy_reversal", "H(reversed loop) H = id", CheckGroup::Structure, hr.max_reversal, 1.0, tol.ode);
    {
      double worst = 0.0;
      bool any = false;
      for (const ScalingRecord& s : hr.scaling)
        if (s.second_order) {
          any = true;
          worst = std::max(worst, std::abs(s.ratio - 4.0));
        }
      add("holonomy_eps_scaling", "|H(eps) - id| / |H(eps/2) - id| = 4", CheckGroup::Structure, worst, 4.0, 0.5)
          ->applicable = any;
    }
    const bool unitary = rep.verdict == Verdict::FeffermanLocal && hr.unitary_applicable;
    add("holonomy_commutator", "H J = J H", CheckGroup::Consequence, hr.max_commutator, 1.0, tol.ode)->applicable =
        unitary;
    add("holonomy_det_c", "det_C H = 1", CheckGroup::Consequence, hr.max_det_c_error, 1.0, tol.ode)->applicable =
        unitary;
    const int m2 = (n + 2) / 2;
    add("holonomy_algebra_dimension", "dim hol <= dim su(p'+1, q'+1)", CheckGroup::Consequence,
        hr.algebra_dimension, 0.0, m2 * m2 - 1)
        ->applicable = unitary;
    for (const std::string& s : hr.notices) rep.notices.push_back("holonomy: " + s);
    rep.holonomy = std::move(hr);
  }

  // Applicability: consequences bind only under the hypotheses; odd-dimension
  // checks only in odd dimension with the hypotheses.
  for (CheckRecord& r : rep.checks) {
    if (r.group == CheckGroup::Consequence && !rep.hypotheses_pass) r.applicable = false;
    if (r.name == "lemma_second_derivative" || r.name == "lemma_omega_nabla_kappa")
      r.applicable = r.applicable && spec.scale == ScaleNote::Preferred;
  }
  for (const CheckRecord& r : rep.checks) {
    if (!r.applicable || r.diagnostic || r.pass) continue;
    if (r.group == CheckGroup::Structure || r.group == CheckGroup::Consequence || r.group == CheckGroup::Killing) {
      rep.consistent = false;
      rep.notices.push_back("inconsistent: " + r.name + " fails (" + r.anchor + ")");
    }
  }
  if (rep.hypotheses_pass && n % 2 == 0 && !neg && rep.lambda.mean < -10.0 * tol.id)
    rep.notices.push_back("lambda is negative but not constant to tolerance");
  return rep;
}

InvarianceRecord run_conformal_invariance(const GeometrySpec& spec, const CheckReport& base, const CheckOptions& opt) {
  if (!spec.omega) throw InputError("conformal invariance needs omega");
  InvarianceRecord ir;
  ir.omega = expr::to_string(*spec.omega);
  CheckOptions o = opt;
  o.samples = base.samples;
  o.seed = base.seed;
  const CheckReport hat = run_check(spec.rescaled(*spec.omega), o, std::nullopt);
  ir.original = base.verdict;
  ir.rescaled = hat.verdict;
  ir.both_hypotheses_pass = base.hypotheses_pass && hat.hypotheses_pass;
  double lam_abs = 0.0;
  for (std::size_t p = 0; p < base.lambda.values.size(); ++p) {
    ir.lambda_change = std::max(ir.lambda_change, std::abs(hat.lambda.values[p] - base.lambda.values[p]));
    lam_abs = std::max(lam_abs, std::abs(base.lambda.values[p]));
  }
  ir.threshold = base.tol.id_scaled(lam_abs);
  ir.pass = ir.original == ir.rescaled && (!ir.both_hypotheses_pass || ir.lambda_change <= ir.threshold);
  return ir;
}

CheckReport run_check(const GeometryFile& file, const CheckOptions& opt) {
  return with_origin(file.origin, [&] {
    const GeometrySpec spec = to_spec(file);
    std::optional<HolonomyOptions> hol;
    if (opt.holonomy || file.has_holonomy) hol = file.holonomy;
    CheckReport rep = run_check(spec, opt, hol);
    rep.input_hash = fnv1a64_hex(file.text);
    rep.expected_verdict = file.expected_verdict;
    if (spec.omega && (opt.rescale || file.omega)) {
      rep.invariance = run_conformal_invariance(spec, rep, opt);
      const InvarianceRecord& ir = *rep.invariance;
      CheckRecord v;
      v.name = "conformal_invariance_verdict";
      v.anchor = "verdict(exp(2 omega) g) = verdict(g)";
      v.group = CheckGroup::Structure;
      v.residual = ir.original == ir.rescaled ? 0.0 : 1.0;
      v.pass = v.residual == 0.0;
      CheckRecord l;
      l.name = "conformal_invariance_lambda";
      l.anchor = "lambda(exp(2 omega) g) = lambda(g)";
      l.group = CheckGroup::Consequence;
      l.residual = ir.lambda_change;
      l.threshold = ir.threshold;
      l.pass = l.residual <= l.threshold;
      l.applicable = ir.both_hypotheses_pass;
      for (const CheckRecord* r : {&v, &l}) {
        if (r->applicable && !r->pass) {
          rep.consistent = false;
          rep.notices.push_back("inconsistent: " + r->name + " fails (" + r->anchor + ")");
        }
      }
      rep.checks.push_back(v);
      rep.checks.push_back(l);
    } else if (opt.rescale) {
      rep.notices.push_back("--rescale ignored: the file has no omega");
    }
    return rep;
  });
}

std::vector<std::string> allowed_signs(Verdict v) {
  switch (v) {
    case Verdict::FeffermanLocal: return {"negative"};
    case Verdict::OddDimNilpotent: return {"zero"};
    case Verdict::InconclusiveSign: return {"zero", "positive"};
    case Verdict::HypothesesFail: return {};
  }
  return {};
}

SelftestResult corpus_selftest(const std::filesystem::path& dir, const CheckOptions& opt) {
  namespace fs = std::filesystem;
  SelftestResult res;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(dir, ec))
    for (const auto& e : fs::directory_iterator(dir, ec))
      if (e.is_regular_file() && e.path().extension() == ".geom") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    res.exit_code = 2;
    res.message = "no corpus";
    return res;
  }
  bool mismatch = false, input_error = false, numerical = false;
  for (const fs::path& p : files) {
    SelftestEntry e;
    e.file = p.filename().string();
    try {
      const GeometryFile f = load_geometry_file(p);
      CheckReport rep = run_check(f, opt);
      if (!f.expected_verdict) {
        e.detail = "no expected_verdict annotation";
      } else {
        const Verdict want = *verdict_from_name(*f.expected_verdict);
        const auto signs = allowed_signs(want);
        const bool sign_ok =
            signs.empty() || std::find(signs.begin(), signs.end(), rep.lambda.sign) != signs.end();
        e.match = rep.verdict == want && sign_ok;
        if (rep.verdict != want)
          e.detail = "expected " + *f.expected_verdict + ", got " + std::string(verdict_name(rep.verdict));
        else if (!sign_ok)
          e.detail = "lambda sign " + rep.lambda.sign + " does not fit " + *f.expected_verdict;
      }
      if (!rep.consistent) {
        numerical = true;
        if (!e.detail.empty()) e.detail += "; ";
        e.detail += "internal consistency failure";
      }
      if (!e.match) mismatch = true;
      e.report = std::move(rep);
    } catch (const InputError& err) {
      input_error = true;
      e.error = err.what();
    } catch (const NumericalError& err) {
      numerical = true;
      e.error = err.what();
    }
    res.entries.push_back(std::move(e));
  }
  res.exit_code = input_error ? 2 : numerical ? 3 : mismatch ? 1 : 0;
  return res;
}

}  // namespace feff
