#include "feff/expr.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace feff::expr {

bool is_unary(Op op) { return op >= Op::Neg && op <= Op::Cosh; }
bool is_binary(Op op) { return op >= Op::Add && op <= Op::Div; }

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Neg: return "neg";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Sinh: return "sinh";
    case Op::Cosh: return "cosh";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Pow: return "pow";
  }
  return "?";
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

namespace {

using i128 = __int128;

bool fits(i128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

// Exact rational op when the result fits in int64; false otherwise.
bool rational_op(Op op, const Rational& x, const Rational& y, Rational& out) {
  i128 num = 0, den = 1;
  switch (op) {
    case Op::Add:
      num = i128(x.num) * y.den + i128(y.num) * x.den;
      den = i128(x.den) * y.den;
      break;
    case Op::Sub:
      num = i128(x.num) * y.den - i128(y.num) * x.den;
      den = i128(x.den) * y.den;
      break;
    case Op::Mul:
      num = i128(x.num) * y.num;
      den = i128(x.den) * y.den;
      break;
    case Op::Div:
      if (y.num == 0) return false;
      num = i128(x.num) * y.den;
      den = i128(x.den) * y.num;
      break;
    default:
      return false;
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  if (!fits(num) || !fits(den)) return false;
  out = Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
  return true;
}

double double_op(Op op, double x, double y) {
  switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul: return x * y;
    case Op::Div: return x / y;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::size_t Pool::KeyHash::operator()(const Key& key) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::uint64_t>(key.op));
  mix(key.a);
  mix(key.b);
  mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.k)));
  mix(key.exact);
  mix(static_cast<std::uint64_t>(key.num));
  mix(static_cast<std::uint64_t>(key.den));
  mix(key.bits);
  return static_cast<std::size_t>(h);
}

Pool::Pool(std::vector<std::string> coords) : coords_(std::move(coords)) {
  if (coords_.size() > 60) throw std::invalid_argument("too many coordinates");
  zero_ = constant(Rational{0, 1}).id();
  one_ = constant(Rational{1, 1}).id();
}

Expr Pool::intern(const Node& node) {
  Key key{node.op, node.a, node.b, node.k, node.exact, 0, 1, 0};
  if (node.op == Op::Const) {
    if (node.exact) {
      key.num = node.q.num;
      key.den = node.q.den;
    } else {
      key.bits = std::bit_cast<std::uint64_t>(node.value);
    }
  }
  auto [it, inserted] = index_.try_emplace(key, static_cast<NodeId>(nodes_.size()));
  if (inserted) nodes_.push_back(node);
  return Expr(this, it->second);
}

Expr Pool::constant(Rational q) {
  Node node;
  node.op = Op::Const;
  node.exact = true;
  node.q = Rational::make(q.num, q.den);
  node.value = node.q.value();
  return intern(node);
}

Expr Pool::decimal(double v) {
  Node node;
  node.op = Op::Const;
  node.exact = false;
  node.value = v;
  return intern(node);
}

Expr Pool::var(int index) {
  if (index < 0 || index >= dimension()) throw std::out_of_range("coordinate index");
  Node node;
  node.op = Op::Var;
  node.k = index;
  return intern(node);
}

int Pool::coord_index(std::string_view name) const {
  for (std::size_t i = 0; i < coords_.size(); ++i)
    if (coords_[i] == name) return static_cast<int>(i);
  return -1;
}

Expr Pool::var(std::string_view name) {
  const int i = coord_index(name);
  if (i < 0) throw std::invalid_argument("undeclared coordinate: " + std::string(name));
  return var(i);
}

Expr Pool::fold_unary(Op op, const Node& x) {
  // Only exact special values; anything else stays symbolic.
  const bool is0 = x.exact && x.q.num == 0;
  const bool is1 = x.exact && x.q.num == 1 && x.q.den == 1;
  switch (op) {
    case Op::Neg:
      if (x.exact) return constant(Rational{-x.q.num, x.q.den});
      return decimal(-x.value);
    case Op::Sin:
    case Op::Tan:
    case Op::Sinh:
      if (is0) return zero();
      break;
    case Op::Cos:
    case Op::Cosh:
    case Op::Exp:
      if (is0) return one();
      break;
    case Op::Log:
      if (is1) return zero();
      break;
    case Op::Sqrt:
      if (is0) return zero();
      if (is1) return one();
      break;
    default:
      break;
  }
  return Expr();
}

Expr Pool::unary(Op op, Expr x) {
  if (!is_unary(op)) throw std::invalid_argument("not a unary op");
  const Node& xn = node(x.id());
  if (xn.op == Op::Const) {
    Expr folded = fold_unary(op, xn);
    if (folded.valid()) return folded;
  }
  if (op == Op::Neg && xn.op == Op::Neg) return Expr(this, xn.a);
  Node node;
  node.op = op;
  node.a = x.id();
  return intern(node);
}

Expr Pool::binary(Op op, Expr x, Expr y) {
  if (!is_binary(op)) throw std::invalid_argument("not a binary op");
  const Node xn = node(x.id());
  const Node yn = node(y.id());
  const bool xc = xn.op == Op::Const, yc = yn.op == Op::Const;
  const bool x0 = xc && xn.exact && xn.q.num == 0;
  const bool y0 = yc && yn.exact && yn.q.num == 0;
  const bool x1 = xc && xn.exact && xn.q == Rational{1, 1};
  const bool y1 = yc && yn.exact && yn.q == Rational{1, 1};

  if (xc && yc) {
    if (xn.exact && yn.exact) {
      Rational r;
      if (rational_op(op, xn.q, yn.q, r)) return constant(r);
      if (!(op == Op::Div && yn.q.num == 0)) return decimal(double_op(op, xn.value, yn.value));
    } else if (!(op == Op::Div && yn.value == 0.0)) {
      return decimal(double_op(op, xn.value, yn.value));
    }
  }
  switch (op) {
    case Op::Add:
      if (x0) return y;
      if (y0) return x;
      break;
    case Op::Sub:
      if (y0) return x;
      if (x0) return unary(Op::Neg, y);
      if (x == y) return zero();
      break;
    case Op::Mul:
      if (x0 || y0) return zero();
      if (x1) return y;
      if (y1) return x;
      if (xc && xn.exact && xn.q == Rational{-1, 1}) return unary(Op::Neg, y);
      if (yc && yn.exact && yn.q == Rational{-1, 1}) return unary(Op::Neg, x);
      break;
    case Op::Div:
      if (x0 && !y0) return zero();
      if (y1) return x;
      break;
    default:
      break;
  }
  Node node;
  node.op = op;
  node.a = x.id();
  node.b = y.id();
  return intern(node);
}

Expr Pool::power(Expr x, int k) {
  if (k < 0) return binary(Op::Div, one(), power(x, -k));
  if (k == 0) return one();
  if (k == 1) return x;
  const Node& xn = node(x.id());
  if (xn.op == Op::Const) {
    if (xn.exact) {
      Rational acc{1, 1};
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) ok = rational_op(Op::Mul, acc, xn.q, acc);
      if (ok) return constant(acc);
    }
    if (xn.exact && xn.q.num == 0) return zero();
  }
  Node node;
  node.op = Op::Pow;
  node.a = x.id();
  node.k = k;
  return intern(node);
}

Expr Pool::diff_node(NodeId id, int coord) {
  const Node n = node(id);
  auto d = [&](NodeId child) { return Expr(this, diff_memo_.at(std::uint64_t(child) * 64 + coord)); };
  Expr a(this, n.a), b(this, n.b);
  switch (n.op) {
    case Op::Const: return zero();
    case Op::Var: return n.k == coord ? one() : zero();
    case Op::Neg: return -d(n.a);
    case Op::Sin: return cos(a) * d(n.a);
    case Op::Cos: return -(sin(a) * d(n.a));
    case Op::Tan: return (one() + pow(Expr(this, id), 2)) * d(n.a);
    case Op::Exp: return Expr(this, id) * d(n.a);
    case Op::Log: return d(n.a) / a;
    case Op::Sqrt: return d(n.a) / (constant(2) * Expr(this, id));
    case Op::Sinh: return cosh(a) * d(n.a);
    case Op::Cosh: return sinh(a) * d(n.a);
    case Op::Add: return d(n.a) + d(n.b);
    case Op::Sub: return d(n.a) - d(n.b);
    case Op::Mul: return d(n.a) * b + a * d(n.b);
    case Op::Div: return (d(n.a) * b - a * d(n.b)) / pow(b, 2);
    case Op::Pow: return constant(n.k) * power(a, n.k - 1) * d(n.a);
  }
  return zero();
}

Expr Pool::diff(Expr e, int coord) {
  if (coord < 0 || coord >= dimension()) throw std::out_of_range("coordinate index");
  auto key = [coord](NodeId id) { return std::uint64_t(id) * 64 + coord; };
  if (auto it = diff_memo_.find(key(e.id())); it != diff_memo_.end()) return Expr(this, it->second);

  // Iterative post-order so deep sum chains cannot overflow the stack.
  std::vector<std::pair<NodeId, bool>> stack{{e.id(), false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (diff_memo_.count(key(id))) continue;
    const Node& n = node(id);
    if (expanded || n.op == Op::Const || n.op == Op::Var) {
      Expr r = diff_node(id, coord);
      diff_memo_.emplace(key(id), r.id());
      continue;
    }
    stack.emplace_back(id, true);
    if (is_binary(n.op) && !diff_memo_.count(key(n.b))) stack.emplace_back(n.b, false);
    if (!diff_memo_.count(key(n.a))) stack.emplace_back(n.a, false);
  }
  return Expr(this, diff_memo_.at(key(e.id())));
}

Expr substitute(Expr e, int coord, Expr value) {
  Pool& P = *e.pool();
  if (value.pool() != &P) throw std::invalid_argument("expressions from different pools");
  std::unordered_map<NodeId, NodeId> done;
  std::vector<std::pair<NodeId, bool>> stack{{e.id(), false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (done.count(id)) continue;
    const Node n = P.node(id);
    if (n.op == Op::Const) {
      done.emplace(id, id);
    } else if (n.op == Op::Var) {
      done.emplace(id, n.k == coord ? value.id() : id);
    } else if (!expanded) {
      stack.emplace_back(id, true);
      if (is_binary(n.op)) stack.emplace_back(n.b, false);
      stack.emplace_back(n.a, false);
    } else {
      const Expr a(&P, done.at(n.a));
      Expr r;
      if (n.op == Op::Pow)
        r = P.power(a, n.k);
      else if (is_binary(n.op))
        r = P.binary(n.op, a, Expr(&P, done.at(n.b)));
      else
        r = P.unary(n.op, a);
      done.emplace(id, r.id());
    }
  }
  return Expr(&P, done.at(e.id()));
}

const Node& Expr::node() const { return pool_->node(id_); }
bool Expr::is_const() const { return node().op == Op::Const; }
bool Expr::is_zero() const {
  const Node& n = node();
  return n.op == Op::Const && n.exact && n.q.num == 0;
}
bool Expr::is_one() const {
  const Node& n = node();
  return n.op == Op::Const && n.exact && n.q == Rational{1, 1};
}

namespace {
Pool* pool_of(Expr x, Expr y) {
  if (x.pool() != y.pool()) throw std::invalid_argument("expressions from different pools");
  return x.pool();
}
}  // namespace

Expr operator+(Expr x, Expr y) { return pool_of(x, y)->binary(Op::Add, x, y); }
Expr operator-(Expr x, Expr y) { return pool_of(x, y)->binary(Op::Sub, x, y); }
Expr operator*(Expr x, Expr y) { return pool_of(x, y)->binary(Op::Mul, x, y); }
Expr operator/(Expr x, Expr y) { return pool_of(x, y)->binary(Op::Div, x, y); }
Expr operator-(Expr x) { return x.pool()->unary(Op::Neg, x); }
Expr operator*(Expr x, std::int64_t c) { return x * x.pool()->constant(c); }
Expr operator*(std::int64_t c, Expr x) { return x.pool()->constant(c) * x; }
Expr operator+(Expr x, std::int64_t c) { return x + x.pool()->constant(c); }
Expr operator-(Expr x, std::int64_t c) { return x - x.pool()->constant(c); }
Expr& operator+=(Expr& x, Expr y) { return x = x + y; }
Expr& operator-=(Expr& x, Expr y) { return x = x - y; }

Expr sin(Expr x) { return x.pool()->unary(Op::Sin, x); }
Expr cos(Expr x) { return x.pool()->unary(Op::Cos, x); }
Expr tan(Expr x) { return x.pool()->unary(Op::Tan, x); }
Expr exp(Expr x) { return x.pool()->unary(Op::Exp, x); }
Expr log(Expr x) { return x.pool()->unary(Op::Log, x); }
Expr sqrt(Expr x) { return x.pool()->unary(Op::Sqrt, x); }
Expr sinh(Expr x) { return x.pool()->unary(Op::Sinh, x); }
Expr cosh(Expr x) { return x.pool()->unary(Op::Cosh, x); }
Expr pow(Expr x, int k) { return x.pool()->power(x, k); }

namespace {

// Precedence levels used by the printer: 1 sum, 2 product, 3 unary minus,
// 4 power, 5 atom.
int precedence(const Node& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const:
      if (n.exact ? (n.q.num < 0 || n.q.den != 1) : (n.value < 0 || std::signbit(n.value))) return 0;
      return 5;
    default: return 5;
  }
}

std::string format_const(const Node& n) {
  if (n.exact) {
    std::string s = std::to_string(n.q.num);
    if (n.q.den != 1) s += "/" + std::to_string(n.q.den);
    return s;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", n.value);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(const Pool& pool, NodeId id, std::string& out);

void print_child(const Pool& pool, NodeId id, int min_prec, std::string& out) {
  const Node& n = pool.node(id);
  if (precedence(n) < min_prec) {
    out += '(';
    print(pool, id, out);
    out += ')';
  } else {
    print(pool, id, out);
  }
}

void print(const Pool& pool, NodeId id, std::string& out) {
  const Node& n = pool.node(id);
  switch (n.op) {
    case Op::Const: out += format_const(n); return;
    case Op::Var: out += pool.coords()[n.k]; return;
    case Op::Neg:
      out += '-';
      print_child(pool, n.a, 4, out);
      return;
    case Op::Add:
    case Op::Sub:
      print_child(pool, n.a, 1, out);
      out += n.op == Op::Add ? " + " : " - ";
      print_child(pool, n.b, 2, out);
      return;
    case Op::Mul:
    case Op::Div: {
      print_child(pool, n.a, 2, out);
      out += n.op == Op::Mul ? " * " : " / ";
      const Node& r = pool.node(n.b);
      // A bare integer right of '/' would be read back as part of a rational literal.
      const bool guard = r.op == Op::Const && n.op == Op::Div;
      print_child(pool, n.b, guard ? 6 : 3, out);
      return;
    }
    case Op::Pow:
      print_child(pool, n.a, 5, out);
      out += '^';
      out += std::to_string(n.k);
      return;
    default:
      out += op_name(n.op);
      out += '(';
      print(pool, n.a, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(Expr e) { return to_string(*e.pool(), e.id()); }

std::string to_string(const Pool& pool, NodeId id) {
  std::string out;
  print(pool, id, out);
  return out;
}

std::string describe_node(const Pool& pool, NodeId id, std::size_t max_chars) {
  // Tree size (not DAG size) bounds the printed length; stop counting early.
  std::size_t budget = max_chars;
  std::vector<NodeId> stack{id};
  while (!stack.empty() && budget > 0) {
    const Node& n = pool.node(stack.back());
    stack.pop_back();
    --budget;
    if (is_unary(n.op) || n.op == Op::Pow) stack.push_back(n.a);
    if (is_binary(n.op)) {
      stack.push_back(n.a);
      stack.push_back(n.b);
    }
  }
  if (stack.empty()) {
    std::string s = to_string(pool, id);
    if (s.size() <= max_chars) return s;
  }
  return "<" + std::string(op_name(pool.node(id).op)) + " node #" + std::to_string(id) + ">";
}

std::size_t dag_size(std::span<const Expr> roots) {
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> stack;
  for (const Expr& r : roots) stack.push_back(r.id());
  const Pool* pool = roots.empty() ? nullptr : roots.front().pool();
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    const Node& n = pool->node(id);
    if (is_unary(n.op) || n.op == Op::Pow) stack.push_back(n.a);
    if (is_binary(n.op)) {
      stack.push_back(n.a);
      stack.push_back(n.b);
    }
  }
  return seen.size();
}

}  // namespace feff::expr
