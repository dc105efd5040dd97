#pragma once

// Hash-consed symbolic expressions over a fixed list of chart coordinates.
//
// Every node lives in a Pool and is immutable once created. Building the same
// (op, children, payload) twice returns the same node id, so structural
// equality is id equality. Only constant folding and identity elimination
// (x+0, x*1, x*0, x^1, x^0, -(-x)) are applied; there is no canonical form.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace feff::expr {

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Sinh,
  Cosh,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

bool is_unary(Op op);
bool is_binary(Op op);
std::string_view op_name(Op op);

/// Exact rational with int64 numerator/denominator, always normalised
/// (gcd = 1, den > 0).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

using NodeId = std::uint32_t;

struct Node {
  Op op = Op::Const;
  NodeId a = 0;  // first child (unary/binary)
  NodeId b = 0;  // second child (binary)
  std::int32_t k = 0;  // Var: coordinate index; Pow: exponent
  bool exact = true;   // Const: rational payload valid
  Rational q;          // Const, exact
  double value = 0.0;  // Const: numeric value (always set)
};

class Pool;

/// Lightweight handle to a node in a Pool. Copyable, comparable by identity.
class Expr {
 public:
  Expr() = default;
  Expr(Pool* pool, NodeId id) : pool_(pool), id_(id) {}

  Pool* pool() const { return pool_; }
  NodeId id() const { return id_; }
  bool valid() const { return pool_ != nullptr; }
  const Node& node() const;

  bool is_const() const;
  bool is_zero() const;
  bool is_one() const;

  friend bool operator==(const Expr& x, const Expr& y) {
    return x.pool_ == y.pool_ && x.id_ == y.id_;
  }

 private:
  Pool* pool_ = nullptr;
  NodeId id_ = 0;
};

Expr operator+(Expr x, Expr y);
Expr operator-(Expr x, Expr y);
Expr operator*(Expr x, Expr y);
Expr operator/(Expr x, Expr y);
Expr operator-(Expr x);
Expr operator*(Expr x, std::int64_t c);
Expr operator*(std::int64_t c, Expr x);
Expr operator+(Expr x, std::int64_t c);
Expr operator-(Expr x, std::int64_t c);
Expr& operator+=(Expr& x, Expr y);
Expr& operator-=(Expr& x, Expr y);

Expr sin(Expr x);
Expr cos(Expr x);
Expr tan(Expr x);
Expr exp(Expr x);
Expr log(Expr x);
Expr sqrt(Expr x);
Expr sinh(Expr x);
Expr cosh(Expr x);
Expr pow(Expr x, int k);

/// Owns the node table, the hash-consing index and the derivative memo.
/// Construction is single threaded; a pool that is no longer being extended
/// may be read (evaluated, printed) from any number of threads.
class Pool {
 public:
  explicit Pool(std::vector<std::string> coords);
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;

  const std::vector<std::string>& coords() const { return coords_; }
  int dimension() const { return static_cast<int>(coords_.size()); }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }

  Expr constant(Rational q);
  Expr constant(std::int64_t v) { return constant(Rational::make(v, 1)); }
  Expr rational(std::int64_t num, std::int64_t den) { return constant(Rational::make(num, den)); }
  Expr decimal(double v);
  Expr zero() { return Expr(this, zero_); }
  Expr one() { return Expr(this, one_); }
  Expr var(int index);
  Expr var(std::string_view name);
  int coord_index(std::string_view name) const;  // -1 if absent

  Expr unary(Op op, Expr x);
  Expr binary(Op op, Expr x, Expr y);
  Expr power(Expr x, int k);

  /// Exact symbolic partial derivative, memoised per (node, coordinate).
  Expr diff(Expr e, int coord);

 private:
  struct Key {
    Op op;
    NodeId a, b;
    std::int32_t k;
    bool exact;
    std::int64_t num, den;
    std::uint64_t bits;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };

  Expr intern(const Node& node);
  Expr fold_unary(Op op, const Node& x);
  Expr diff_node(NodeId id, int coord);

  std::vector<std::string> coords_;
  std::vector<Node> nodes_;
  std::unordered_map<Key, NodeId, KeyHash> index_;
  std::unordered_map<std::uint64_t, NodeId> diff_memo_;
  NodeId zero_ = 0;
  NodeId one_ = 0;
};

inline Expr diff(Expr e, int coord) { return e.pool()->diff(e, coord); }

/// Replaces every occurrence of coordinate `coord` by `value` (same pool).
Expr substitute(Expr e, int coord, Expr value);

/// Prints in the input grammar; parse(to_string(e)) returns the same node.
std::string to_string(Expr e);
std::string to_string(const Pool& pool, NodeId id);

/// Like to_string, but falls back to "<op node #id>" when the printed form
/// would exceed `max_chars` (large derivative DAGs print exponentially).
std::string describe_node(const Pool& pool, NodeId id, std::size_t max_chars = 160);

/// Number of distinct nodes reachable from the given roots.
std::size_t dag_size(std::span<const Expr> roots);

}  // namespace feff::expr
