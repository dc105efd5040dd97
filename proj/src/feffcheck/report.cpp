#include "feff/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace feff {

using nlohmann::ordered_json;

namespace {

std::string num17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void dump(const ordered_json& j, std::ostringstream& o, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string end_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        o << "{}";
        return;
      }
      o << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) o << ",\n";
        first = false;
        o << pad << ordered_json(it.key()).dump() << ": ";
        dump(it.value(), o, depth + 1);
      }
      o << "\n" << end_pad << "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        o << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        o << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) o << ", ";
          dump(j[i], o, depth + 1);
        }
        o << "]";
        return;
      }
      o << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) o << ",\n";
        o << pad;
        dump(j[i], o, depth + 1);
      }
      o << "\n" << end_pad << "]";
      return;
    }
    case ordered_json::value_t::number_float:
      o << num17(j.get<double>());
      return;
    default:
      o << j.dump();
  }
}

ordered_json field_json(const NumField& f) {
  ordered_json a = ordered_json::array();
  for (double v : f.components()) a.push_back(v);
  return a;
}

}  // namespace

std::string dump_json(const ordered_json& j) {
  std::ostringstream o;
  dump(j, o, 0);
  o << "\n";
  return o.str();
}

ordered_json to_json(const HolonomyReport& h) {
  ordered_json j;
  j["epsilon"] = h.epsilon;
  j["steps"] = h.steps;
  j["unitary_applicable"] = h.unitary_applicable;
  j["max_orthogonality"] = h.max_orthogonality;
  j["max_reversal"] = h.max_reversal;
  j["max_commutator"] = h.max_commutator;
  j["max_det_c_error"] = h.max_det_c_error;
  j["algebra_dimension"] = h.algebra_dimension;
  j["skipped_logs"] = h.skipped_logs;
  ordered_json sc = ordered_json::array();
  for (const ScalingRecord& s : h.scaling) {
    ordered_json r;
    r["plane"] = s.plane;
    r["norm_eps"] = s.norm_eps;
    r["norm_half"] = s.norm_half;
    r["ratio"] = s.ratio;
    r["curvature_term"] = s.curvature_term;
    r["above_noise"] = s.above_noise;
    r["second_order"] = s.second_order;
    sc.push_back(r);
  }
  j["scaling"] = sc;
  ordered_json el = ordered_json::array();
  for (const ElementReport& e : h.elements) {
    ordered_json r;
    r["loop"] = e.loop_id;
    r["distance_from_identity"] = e.distance_from_identity;
    r["orthogonality"] = e.orthogonality;
    r["reversal"] = e.reversal;
    r["commutator"] = e.commutator;
    r["det_c_error"] = e.det_c_error;
    el.push_back(r);
  }
  j["elements"] = el;
  j["notices"] = h.notices;
  return j;
}

ordered_json to_json(const CheckReport& r) {
  ordered_json j;
  j["tool"] = "feffcheck";
  j["tool_version"] = r.tool_version;
  j["geometry"] = r.geometry;
  j["input_hash"] = r.input_hash;
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["dimension"] = r.dimension;
  j["signature"] = r.signature;
  j["scale"] = r.scale == ScaleNote::Preferred ? "preferred" : "unknown";
  j["tolerances"] = {{"alg", r.tol.alg}, {"id", r.tol.id}, {"ode", r.tol.ode}};
  ordered_json cs = ordered_json::array();
  for (const CheckRecord& c : r.checks) {
    ordered_json x;
    x["name"] = c.name;
    x["group"] = std::string(group_name(c.group));
    x["anchor"] = c.anchor;
    x["residual"] = c.residual;
    x["scale"] = c.scale;
    x["threshold"] = c.threshold;
    x["pass"] = c.pass;
    x["applicable"] = c.applicable;
    x["diagnostic"] = c.diagnostic;
    cs.push_back(x);
  }
  j["checks"] = cs;
  j["lambda"] = {{"values", r.lambda.values}, {"mean", r.lambda.mean},     {"min", r.lambda.min},
                 {"max", r.lambda.max},       {"spread", r.lambda.spread}, {"sign", r.lambda.sign}};
  j["kernel_dims"] = r.kernel_dims;
  j["hypotheses_pass"] = r.hypotheses_pass;
  j["consistent"] = r.consistent;
  j["verdict"] = std::string(verdict_name(r.verdict));
  if (r.expected_verdict) j["expected_verdict"] = *r.expected_verdict;
  if (r.holonomy) j["holonomy"] = to_json(*r.holonomy);
  if (r.invariance) {
    const InvarianceRecord& i = *r.invariance;
    j["conformal_invariance"] = {{"omega", i.omega},
                                 {"original_verdict", std::string(verdict_name(i.original))},
                                 {"rescaled_verdict", std::string(verdict_name(i.rescaled))},
                                 {"both_hypotheses_pass", i.both_hypotheses_pass},
                                 {"lambda_change", i.lambda_change},
                                 {"threshold", i.threshold},
                                 {"pass", i.pass}};
  }
  j["notices"] = r.notices;
  return j;
}

ordered_json to_json(const SelftestResult& s) {
  ordered_json j;
  j["tool"] = "feffcheck";
  j["tool_version"] = std::string(kToolVersion);
  j["exit_code"] = s.exit_code;
  if (!s.message.empty()) j["message"] = s.message;
  ordered_json es = ordered_json::array();
  for (const SelftestEntry& e : s.entries) {
    ordered_json x;
    x["file"] = e.file;
    x["match"] = e.match;
    x["detail"] = e.detail;
    if (!e.error.empty()) x["error"] = e.error;
    if (e.report) x["report"] = to_json(*e.report);
    es.push_back(x);
  }
  j["entries"] = es;
  return j;
}

ordered_json to_json(const CurvatureBundle& b, const std::vector<std::string>& coords) {
  ordered_json j;
  j["coords"] = coords;
  j["point"] = b.point;
  j["layout"] = "row-major; Gamma(c,a,b) = Gamma^c_ab; Riem(a,b,c,d) = R_ab^c_d; C and A all lower";
  j["metric"] = field_json(b.metric);
  j["Gamma"] = field_json(b.Gamma);
  j["Riem"] = field_json(b.Riem);
  j["Ric"] = field_json(b.Ric);
  j["Scal"] = b.Scal;
  j["P"] = field_json(b.P);
  j["J"] = b.J;
  j["C"] = field_json(b.C);
  j["A"] = field_json(b.A);
  return j;
}

std::string render_text(const CheckReport& r) {
  std::ostringstream o;
  char buf[512];
  o << "geometry " << r.geometry << "  n=" << r.dimension << "  samples=" << r.samples << "  seed=" << r.seed
    << "  input " << r.input_hash << "\n";
  for (const CheckRecord& c : r.checks) {
    const char* status = !c.applicable ? "N/A " : c.diagnostic ? (c.pass ? "info" : "INFO") : c.pass ? "PASS" : "FAIL";
    std::snprintf(buf, sizeof buf, "  %s  %-12s %-30s %10.3e <= %9.3e  %s\n", status,
                  std::string(group_name(c.group)).c_str(), c.name.c_str(), c.residual, c.threshold,
                  c.anchor.c_str());
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "  lambda mean %.17g  spread %.3e  sign %s\n", r.lambda.mean, r.lambda.spread,
                r.lambda.sign.c_str());
  o << buf;
  if (r.holonomy) {
    const HolonomyReport& h = *r.holonomy;
    std::snprintf(buf, sizeof buf, "  holonomy: %zu loops, eps %.3g, algebra dimension >= %d\n", h.elements.size(),
                  h.epsilon, h.algebra_dimension);
    o << buf;
    for (const ScalingRecord& s : h.scaling) {
      std::snprintf(buf, sizeof buf, "    plane %-6s |H-id| %.3e -> %.3e  ratio %.3f%s\n", s.plane.c_str(), s.norm_eps,
                    s.norm_half, s.ratio, s.second_order ? "" : s.above_noise ? "  (third order)" : "  (noise)");
      o << buf;
    }
  }
  if (r.invariance) {
    std::snprintf(buf, sizeof buf, "  rescaled by exp(2 (%s)): verdict %s, max |lambda change| %.3e\n",
                  r.invariance->omega.c_str(), std::string(verdict_name(r.invariance->rescaled)).c_str(),
                  r.invariance->lambda_change);
    o << buf;
  }
  for (const std::string& s : r.notices) o << "  note: " << s << "\n";
  o << "verdict " << verdict_name(r.verdict);
  if (r.verdict == Verdict::FeffermanLocal) o << " (locally conformal to a Fefferman space near the sampled box)";
  if (!r.consistent) o << "  [INCONSISTENT]";
  o << "\n";
  return o.str();
}

std::string render_text(const SelftestResult& s) {
  std::ostringstream o;
  if (!s.message.empty()) o << s.message << "\n";
  for (const SelftestEntry& e : s.entries) {
    o << (e.match ? "ok    " : "FAIL  ") << e.file;
    if (e.report) o << "  " << verdict_name(e.report->verdict) << "  lambda " << e.report->lambda.sign;
    if (!e.detail.empty()) o << "  (" << e.detail << ")";
    if (!e.error.empty()) o << "  error: " << e.error;
    o << "\n";
  }
  return o.str();
}

}  // namespace feff
