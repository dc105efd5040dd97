#include "feff/geofile.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "feff/errors.hpp"
#include "feff/parse.hpp"

namespace feff {

namespace {

struct Scalar {
  enum Kind { String, Number } kind = String;
  std::string text;  // string payload or number lexeme
  int line = 0;
};

struct Value {
  bool is_list = false;
  std::vector<Scalar> items;  // one item when scalar
  int line = 0;
};

using Section = std::map<std::string, Value>;

class Reader {
 public:
  Reader(std::string_view text, std::string origin) : src_(text), origin_(std::move(origin)) {}

  std::map<std::string, Section> read() {
    std::map<std::string, Section> doc;
    Section* cur = nullptr;
    std::string cur_name;
    while (true) {
      skip_blank();
      if (eof()) break;
      if (peek() == '[') {
        const int l = line_;
        ++pos_;
        std::string name = ident();
        if (name.empty() || eof() || peek() != ']') fail(l, "malformed section header");
        ++pos_;
        end_of_line();
        static const std::set<std::string> known{"geometry", "domain", "test", "holonomy"};
        if (!known.count(name)) fail(l, "unknown section [" + name + "]");
        if (doc.count(name)) fail(l, "duplicate section [" + name + "]");
        cur = &doc[name];
        cur_name = name;
        continue;
      }
      const int l = line_;
      std::string key = ident();
      if (key.empty()) fail(l, std::string("unexpected character '") + peek() + "'");
      if (!cur) fail(l, "key '" + key + "' outside of a section");
      skip_inline();
      if (eof() || peek() != '=') fail(l, "expected '=' after '" + key + "'");
      ++pos_;
      skip_inline();
      Value v = value();
      v.line = l;
      end_of_line();
      if (cur->count(key)) fail(l, "duplicate key '" + key + "' in [" + cur_name + "]");
      (*cur)[key] = std::move(v);
    }
    return doc;
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw InputError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  void skip_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank() {
    while (true) {
      skip_inline();
      if (eof() || peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }
  void end_of_line() {
    skip_inline();
    if (eof()) return;
    if (peek() != '\n') fail(line_, "unexpected trailing text");
    ++pos_;
    ++line_;
  }
  std::string ident() {
    std::string s;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) s += src_[pos_++];
    return s;
  }
  Scalar scalar() {
    Scalar s;
    s.line = line_;
    if (eof()) fail(line_, "missing value");
    if (peek() == '"') {
      ++pos_;
      s.kind = Scalar::String;
      while (true) {
        if (eof() || peek() == '\n') fail(s.line, "unterminated string");
        char c = src_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (eof()) fail(s.line, "unterminated string");
          c = src_[pos_++];
          if (c != '"' && c != '\\') fail(s.line, std::string("unknown escape '\\") + c + "'");
        }
        s.text += c;
      }
      return s;
    }
    s.kind = Scalar::Number;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '-' ||
                      peek() == '+'))
      s.text += src_[pos_++];
    if (s.text.empty()) fail(line_, std::string("unexpected character '") + peek() + "' in value");
    return s;
  }
  Value value() {
    Value v;
    if (!eof() && peek() == '[') {
      const int open = line_;
      ++pos_;
      v.is_list = true;
      while (true) {
        skip_blank();
        if (eof()) fail(open, "unterminated list");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.items.push_back(scalar());
        skip_blank();
        if (eof()) fail(open, "unterminated list");
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail(line_, "expected ',' or ']' in list");
        }
      }
      return v;
    }
    v.items.push_back(scalar());
    return v;
  }

  std::string_view src_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

class Fields {
 public:
  Fields(const Reader& r, Section s, std::string name) : r_(r), s_(std::move(s)), name_(std::move(name)) {}

  bool has(const std::string& k) const { return s_.count(k) > 0; }
  const Value& get(const std::string& k, int header_line = 0) {
    auto it = s_.find(k);
    if (it == s_.end()) r_.fail(header_line, "missing key '" + k + "' in [" + name_ + "]");
    used_.insert(k);
    return it->second;
  }
  void finish() const {
    for (const auto& [k, v] : s_)
      if (!used_.count(k)) r_.fail(v.line, "unknown key '" + k + "' in [" + name_ + "]");
  }

  std::string str(const Value& v, const std::string& k) const {
    if (v.is_list || v.items[0].kind != Scalar::String) r_.fail(v.line, "'" + k + "' must be a string");
    return v.items[0].text;
  }
  std::vector<Scalar> list(const Value& v, const std::string& k) const {
    if (!v.is_list) r_.fail(v.line, "'" + k + "' must be a list");
    return v.items;
  }
  std::vector<std::string> str_list(const Value& v, const std::string& k) const {
    std::vector<std::string> out;
    for (const Scalar& s : list(v, k)) {
      if (s.kind != Scalar::String) r_.fail(s.line, "'" + k + "' entries must be strings");
      out.push_back(s.text);
    }
    return out;
  }
  long long integer(const Scalar& s, const std::string& k) const {
    long long x = 0;
    const char* b = s.text.data();
    const char* e = b + s.text.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (s.kind != Scalar::Number || ec != std::errc() || p != e) r_.fail(s.line, "'" + k + "' must be an integer");
    return x;
  }
  long long integer(const Value& v, const std::string& k) const {
    if (v.is_list) r_.fail(v.line, "'" + k + "' must be an integer");
    return integer(v.items[0], k);
  }
  double real(const Value& v, const std::string& k) const {
    if (v.is_list || v.items[0].kind != Scalar::Number) r_.fail(v.line, "'" + k + "' must be a number");
    const std::string& t = v.items[0].text;
    double x = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x))
      r_.fail(v.line, "'" + k + "' must be a finite number");
    return x;
  }

 private:
  const Reader& r_;
  Section s_;
  std::string name_;
  std::set<std::string> used_;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string scale_name(ScaleNote s) { return s == ScaleNote::Preferred ? "preferred" : "unknown"; }

}  // namespace

bool GeometryFile::operator==(const GeometryFile& o) const {
  auto same_domain = [](const std::vector<Interval>& a, const std::vector<Interval>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].lo != b[i].lo || a[i].hi != b[i].hi) return false;
    return true;
  };
  return name == o.name && dimension == o.dimension && signature == o.signature && coords == o.coords &&
         metric == o.metric && kappa == o.kappa && scale == o.scale && same_domain(domain, o.domain) &&
         samples == o.samples && seed == o.seed && omega == o.omega && expected_verdict == o.expected_verdict &&
         has_holonomy == o.has_holonomy && holonomy.epsilon == o.holonomy.epsilon &&
         holonomy.steps == o.holonomy.steps && holonomy.loops_per_plane == o.holonomy.loops_per_plane;
}

GeometryFile parse_geometry_file(std::string_view text, std::string origin) {
  Reader reader(text, origin);
  auto doc = reader.read();
  GeometryFile f;
  f.origin = origin;
  f.text = std::string(text);

  if (!doc.count("geometry")) reader.fail(1, "missing section [geometry]");
  if (!doc.count("domain")) reader.fail(1, "missing section [domain]");

  {
    Fields g(reader, doc["geometry"], "geometry");
    f.name = g.str(g.get("name"), "name");
    const Value& dim = g.get("dimension");
    f.dimension = static_cast<int>(g.integer(dim, "dimension"));
    if (f.dimension < 3) reader.fail(dim.line, "dimension must be at least 3");
    const Value& sig = g.get("signature");
    for (const Scalar& s : g.list(sig, "signature")) {
      const long long v = g.integer(s, "signature");
      if (v != 1 && v != -1) reader.fail(s.line, "signature entries must be +1 or -1");
      f.signature.push_back(static_cast<int>(v));
    }
    const Value& co = g.get("coords");
    f.coords = g.str_list(co, "coords");
    const Value& me = g.get("metric");
    f.metric = g.str_list(me, "metric");
    for (const Scalar& s : me.items) f.metric_lines.push_back(s.line);
    const Value& ka = g.get("kappa");
    f.kappa = g.str_list(ka, "kappa");
    for (const Scalar& s : ka.items) f.kappa_lines.push_back(s.line);
    if (g.has("scale")) {
      const Value& sc = g.get("scale");
      const std::string s = g.str(sc, "scale");
      if (s == "preferred")
        f.scale = ScaleNote::Preferred;
      else if (s == "unknown")
        f.scale = ScaleNote::Unknown;
      else
        reader.fail(sc.line, "scale must be \"preferred\" or \"unknown\"");
    }
    g.finish();

    const std::size_t n = static_cast<std::size_t>(f.dimension);
    if (f.signature.size() != n) reader.fail(sig.line, "signature needs " + std::to_string(n) + " entries");
    if (f.coords.size() != n) reader.fail(co.line, "coords needs " + std::to_string(n) + " entries");
    std::set<std::string> seen;
    for (const std::string& c : f.coords) {
      bool ok = !c.empty() && (std::isalpha(static_cast<unsigned char>(c[0])) || c[0] == '_');
      for (char ch : c) ok = ok && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
      if (!ok) reader.fail(co.line, "coordinate '" + c + "' is not an identifier");
      if (!seen.insert(c).second) reader.fail(co.line, "duplicate coordinate '" + c + "'");
    }
    if (f.metric.size() != n * (n + 1) / 2)
      reader.fail(me.line, "metric needs " + std::to_string(n * (n + 1) / 2) + " lower-triangle entries, got " +
                               std::to_string(f.metric.size()));
    if (f.kappa.size() != n) reader.fail(ka.line, "kappa needs " + std::to_string(n) + " entries");
  }
  {
    Fields d(reader, doc["domain"], "domain");
    for (const std::string& c : f.coords) {
      const Value& v = d.get(c);
      std::istringstream in(d.str(v, c));
      Interval iv;
      std::string extra;
      if (!(in >> iv.lo >> iv.hi) || (in >> extra)) reader.fail(v.line, "domain '" + c + "' must be \"lo hi\"");
      if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        reader.fail(v.line, "domain '" + c + "' must satisfy lo < hi");
      f.domain.push_back(iv);
    }
    d.finish();
  }
  if (doc.count("test")) {
    Fields t(reader, doc["test"], "test");
    if (t.has("samples")) {
      const Value& v = t.get("samples");
      const long long s = t.integer(v, "samples");
      if (s < 1 || s > 1000000) reader.fail(v.line, "samples must be in [1, 1000000]");
      f.samples = static_cast<int>(s);
    }
    if (t.has("seed")) {
      const Value& v = t.get("seed");
      const long long s = t.integer(v, "seed");
      if (s < 0) reader.fail(v.line, "seed must be non-negative");
      f.seed = static_cast<std::uint64_t>(s);
    }
    if (t.has("omega")) {
      const Value& v = t.get("omega");
      f.omega = t.str(v, "omega");
      f.omega_line = v.line;
    }
    if (t.has("expected_verdict")) {
      const Value& v = t.get("expected_verdict");
      const std::string s = t.str(v, "expected_verdict");
      static const std::set<std::string> ok{"FEFFERMAN_LOCAL", "ODD_DIM_NILPOTENT", "HYPOTHESES_FAIL",
                                            "INCONCLUSIVE_SIGN"};
      if (!ok.count(s)) reader.fail(v.line, "unknown verdict '" + s + "'");
      f.expected_verdict = s;
    }
    t.finish();
  }
  if (doc.count("holonomy")) {
    Fields h(reader, doc["holonomy"], "holonomy");
    f.has_holonomy = true;
    if (h.has("epsilon")) {
      const Value& v = h.get("epsilon");
      f.holonomy.epsilon = h.real(v, "epsilon");
      if (!(f.holonomy.epsilon > 0.0)) reader.fail(v.line, "epsilon must be positive");
    }
    if (h.has("steps")) {
      const Value& v = h.get("steps");
      const long long s = h.integer(v, "steps");
      if (s < 4 || s > 10000000) reader.fail(v.line, "steps must be in [4, 10000000]");
      f.holonomy.steps = static_cast<int>(s);
    }
    if (h.has("loops_per_plane")) {
      const Value& v = h.get("loops_per_plane");
      const long long s = h.integer(v, "loops_per_plane");
      if (s < 1 || s > 16) reader.fail(v.line, "loops_per_plane must be in [1, 16]");
      f.holonomy.loops_per_plane = static_cast<int>(s);
    }
    h.finish();
  }
  return f;
}

GeometryFile load_geometry_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_geometry_file(ss.str(), path.string());
}

std::string serialize(const GeometryFile& f) {
  std::ostringstream o;
  auto list = [&](const std::vector<std::string>& xs, bool multiline) {
    o << "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (multiline) o << "\n  ";
      o << quote(xs[i]);
      if (i + 1 < xs.size() || multiline) o << (multiline ? "," : ", ");
    }
    if (multiline) o << "\n";
    o << "]\n";
  };
  o << "[geometry]\n";
  o << "name = " << quote(f.name) << "\n";
  o << "dimension = " << f.dimension << "\n";
  o << "signature = [";
  for (std::size_t i = 0; i < f.signature.size(); ++i) o << (i ? ", " : "") << f.signature[i];
  o << "]\n";
  o << "coords = ";
  list(f.coords, false);
  o << "metric = ";
  list(f.metric, true);
  o << "kappa = ";
  list(f.kappa, false);
  o << "scale = " << quote(scale_name(f.scale)) << "\n\n[domain]\n";
  for (std::size_t i = 0; i < f.coords.size(); ++i)
    o << f.coords[i] << " = " << quote(num17(f.domain[i].lo) + " " + num17(f.domain[i].hi)) << "\n";
  o << "\n[test]\nsamples = " << f.samples << "\nseed = " << f.seed << "\n";
  if (f.omega) o << "omega = " << quote(*f.omega) << "\n";
  if (f.expected_verdict) o << "expected_verdict = " << quote(*f.expected_verdict) << "\n";
  if (f.has_holonomy) {
    o << "\n[holonomy]\n";
    if (f.holonomy.epsilon > 0.0) o << "epsilon = " << num17(f.holonomy.epsilon) << "\n";
    o << "steps = " << f.holonomy.steps << "\nloops_per_plane = " << f.holonomy.loops_per_plane << "\n";
  }
  return o.str();
}

GeometrySpec to_spec(const GeometryFile& f) {
  auto at = [&](int line) { return f.origin + ":" + std::to_string(line) + ": "; };
  {
    expr::Pool scratch(f.coords);
    std::size_t k = 0;
    for (int i = 0; i < f.dimension; ++i)
      for (int j = 0; j <= i; ++j, ++k) {
        try {
          (void)expr::parse(f.metric[k], scratch);
        } catch (const ParseError& e) {
          throw InputError(at(f.metric_lines[k]) + "metric g_" + f.coords[i] + f.coords[j] + ": " + e.message() +
                           " at column " + std::to_string(e.column()));
        }
      }
    for (int i = 0; i < f.dimension; ++i) {
      try {
        (void)expr::parse(f.kappa[i], scratch);
      } catch (const ParseError& e) {
        throw InputError(at(f.kappa_lines[i]) + "kappa^" + f.coords[i] + ": " + e.message() + " at column " +
                         std::to_string(e.column()));
      }
    }
  }
  GeometrySpec spec;
  try {
    spec = GeometrySpec::from_strings(f.name, f.signature, f.coords, f.metric, f.kappa, f.domain);
  } catch (const InputError& e) {
    throw InputError(f.origin + ": " + e.what());
  }
  spec.samples = f.samples;
  spec.seed = f.seed;
  spec.scale = f.scale;
  spec.omega = parse_omega(f, *spec.pool);
  return spec;
}

std::optional<expr::Expr> parse_omega(const GeometryFile& f, expr::Pool& pool) {
  if (!f.omega) return std::nullopt;
  try {
    return expr::parse(*f.omega, pool);
  } catch (const ParseError& e) {
    throw InputError(f.origin + ":" + std::to_string(f.omega_line) + ": omega: " + e.message() + " at column " +
                     std::to_string(e.column()));
  }
}

}  // namespace feff
