#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "feff/errors.hpp"
#include "feff/expr.hpp"
#include "feff/parse.hpp"
#include "feff/tape.hpp"

using namespace feff;
using namespace feff::expr;

namespace {

double at(Expr e, std::vector<double> p) { return eval(e, p); }

}  // namespace

TEST_CASE("parse builds the expected tree") {
  Pool pool({"x", "y"});
  Expr e = parse("x^2 + sin(y)", pool);
  const Node& n = e.node();
  REQUIRE(n.op == Op::Add);
  CHECK(pool.node(n.a).op == Op::Pow);
  CHECK(pool.node(n.a).k == 2);
  CHECK(pool.node(pool.node(n.a).a).op == Op::Var);
  CHECK(pool.node(n.b).op == Op::Sin);
  CHECK(e == pow(pool.var("x"), 2) + sin(pool.var("y")));
}

TEST_CASE("parse reports position of a doubled operator") {
  Pool pool({"x", "y"});
  try {
    parse("x + + y", pool);
    FAIL("no error");
  } catch (const ParseError& err) {
    CHECK(err.line() == 1);
    CHECK(err.column() == 5);
  }
}

TEST_CASE("parse rejects undeclared identifiers and bad exponents") {
  Pool pool({"x", "y"});
  CHECK_THROWS_WITH_AS(parse("z", pool), doctest::Contains("undeclared identifier 'z'"), ParseError);
  CHECK_THROWS_AS(parse("x^1.5", pool), ParseError);
  CHECK_THROWS_AS(parse("x^y", pool), ParseError);
  CHECK_THROWS_AS(parse("x^-2", pool), ParseError);
  CHECK_THROWS_AS(parse("(x + y", pool), ParseError);
  CHECK_THROWS_AS(parse("1/0", pool), ParseError);
  CHECK_THROWS_AS(parse("", pool), ParseError);
  CHECK_THROWS_AS(parse("x y", pool), ParseError);
}

TEST_CASE("multi-line source positions") {
  Pool pool({"x"});
  try {
    parse("x +\n  q", pool);
    FAIL("no error");
  } catch (const ParseError& err) {
    CHECK(err.line() == 2);
    CHECK(err.column() == 3);
  }
}

TEST_CASE("differentiation rules") {
  Pool pool({"x", "y"});
  Expr x = pool.var(0);
  Expr e = parse("x^2+sin(y)", pool);
  CHECK(diff(e, 0) == 2 * x);
  CHECK(diff(pool.rational(3, 7), 0).is_zero());
  CHECK(diff(pool.decimal(0.25), 1).is_zero());

  Expr m = parse("exp(x*y)", pool);
  const double v = at(diff(diff(m, 0), 1), {1.0, 1.0});
  CHECK(v == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-15));

  // Central-difference oracle on the first derivative.
  auto f = [](double xx, double yy) { return std::exp(xx * yy); };
  const double h = 1e-5;
  const double dy_fd = (f(1.0 + h, 1.0) - f(1.0 - h, 1.0)) / (2 * h);
  const double dxy_fd = ((f(1.0 + h, 1.0 + h) - f(1.0 + h, 1.0 - h)) - (f(1.0 - h, 1.0 + h) - f(1.0 - h, 1.0 - h))) /
                        (4 * h * h);
  CHECK(std::abs(at(diff(m, 0), {1.0, 1.0}) - dy_fd) <= 1e-6 * std::abs(dy_fd));
  CHECK(std::abs(v - dxy_fd) <= 1e-6 * std::abs(v));

  Pool p1({"x"});
  CHECK(at(diff(parse("sin(x)", p1), 0), {0.3}) == std::cos(0.3));
}

TEST_CASE("derivative of every unary op matches finite differences") {
  Pool pool({"x"});
  const char* sources[] = {"-x", "sin(x)", "cos(x)", "tan(x)", "exp(x)", "log(x)", "sqrt(x)", "sinh(x)", "cosh(x)",
                           "x^5", "1/x", "x/(1+x^2)", "2/3*x^3", "0.5*x - 1/4"};
  for (const char* src : sources) {
    Expr e = parse(src, pool);
    const double x0 = 0.7, h = 1e-5;
    const double fd = (at(e, {x0 + h}) - at(e, {x0 - h})) / (2 * h);
    const double d = at(diff(e, 0), {x0});
    INFO(src);
    CHECK(std::abs(d - fd) <= 1e-8 * (1 + std::abs(d)));
  }
}

TEST_CASE("hash-consing gives identical nodes") {
  Pool pool({"a", "b"});
  Expr a = pool.var("a"), b = pool.var("b");
  Expr s1 = a + b;
  Expr s2 = a + b;
  CHECK(s1 == s2);
  CHECK(s1.id() == s2.id());
  const std::size_t before = pool.size();
  Expr s3 = pool.binary(Op::Add, a, b);
  CHECK(s3 == s1);
  CHECK(pool.size() == before);
  CHECK(parse("a*b + sin(a)", pool) == parse("a * b+sin( a )", pool));
  // Distinct numeric payloads stay distinct.
  CHECK(!(pool.decimal(0.1) == pool.rational(1, 10)));
  CHECK(pool.rational(2, 4) == pool.rational(1, 2));
}

TEST_CASE("identity elimination and constant folding") {
  Pool pool({"x"});
  Expr x = pool.var(0);
  CHECK(x + pool.zero() == x);
  CHECK(pool.zero() + x == x);
  CHECK(x * pool.one() == x);
  CHECK((x * pool.zero()).is_zero());
  CHECK(pow(x, 1) == x);
  CHECK(pow(x, 0).is_one());
  CHECK(-(-x) == x);
  CHECK((x - x).is_zero());
  CHECK(pool.rational(1, 3) + pool.rational(1, 6) == pool.rational(1, 2));
  CHECK(pow(pool.rational(2, 3), 2) == pool.rational(4, 9));
}

TEST_CASE("print then parse is a fixed point") {
  Pool pool({"x", "y", "t"});
  const char* sources[] = {"x^2 + sin(y)",
                           "-(x - y)^3 / (1 + t^2)",
                           "2/3*x - 1/7",
                           "exp(-x*y) * cosh(t) - sqrt(1 + x^2)",
                           "x - (y - t)",
                           "x / (y * t)",
                           "(-x)^2",
                           "-x^2",
                           "0.1*x + 1e-3*y",
                           "(2/3)^2 * x",
                           "x - -y",
                           "tan(log(1 + x^2))"};
  for (const char* src : sources) {
    Expr e = parse(src, pool);
    const std::string printed = to_string(e);
    INFO(src << " -> " << printed);
    Expr back = parse(printed, pool);
    CHECK(back == e);
    CHECK(to_string(back) == printed);
    Expr d = diff(diff(e, 0), 1);
    CHECK(parse(to_string(d), pool) == d);
  }
}

TEST_CASE("domain errors name the node") {
  Pool pool({"x"});
  Expr e = parse("1 + log(x)", pool);
  CHECK_THROWS_WITH_AS(at(e, {0.0}), doctest::Contains("log"), NumericalError);
  CHECK_THROWS_AS(at(parse("1/x", pool), {0.0}), NumericalError);
  CHECK_THROWS_AS(at(parse("sqrt(x)", pool), {-1.0}), NumericalError);
  CHECK(at(parse("x*x+1", pool), {3.0}) == 10.0);
  Pool p2({"x", "y"});
  CHECK(at(parse("x*y+1", p2), {2.0, 3.0}) == 7.0);
}

namespace {

// Random trees whose ops are guarded so every draw is smooth on [-1, 1]^3.
class TreeGen {
 public:
  TreeGen(Pool& pool, std::uint64_t seed) : pool_(pool), rng_(seed) {}

  Expr make(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    Expr c = make(depth - 1);
    switch (pick(14)) {
      case 0: return -c;
      case 1: return sin(c);
      case 2: return cos(c);
      case 3: return tan(c / (pool_.constant(2) + pow(c, 2)));
      case 4: return exp(sin(c));
      case 5: return log(pool_.one() + pow(c, 2));
      case 6: return sqrt(pool_.one() + pow(c, 2));
      case 7: return sinh(sin(c));
      case 8: return cosh(sin(c));
      case 9: return pow(sin(c), pick(4) + 1);
      case 10: return c + make(depth - 1);
      case 11: return c - make(depth - 1);
      case 12: return c * make(depth - 1);
      default: return c / (pool_.one() + pow(make(depth - 1), 2));
    }
  }

 private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  Expr leaf() {
    if (pick(3) == 0) return pool_.rational(pick(7) - 3, pick(3) + 1);
    return pool_.var(pick(pool_.dimension()));
  }
  Pool& pool_;
  std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("random trees: symbolic derivative matches central difference") {
  Pool pool({"x", "y", "z"});
  TreeGen gen(pool, 20261014);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Expr e = gen.make(6);
    std::vector<double> p{u(rng), u(rng), u(rng)};
    const int coord = trial % 3;
    const double h = 1e-5;
    std::vector<double> pp = p, pm = p;
    pp[coord] += h;
    pm[coord] -= h;
    const double value = at(diff(e, coord), p);
    const double fd = (at(e, pp) - at(e, pm)) / (2 * h);
    if (std::abs(value - fd) > 1e-5 * (1 + std::abs(value))) {
      INFO(to_string(e));
      CHECK(value == doctest::Approx(fd));
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("differentiation is memoised and stays in the pool") {
  Pool pool({"x", "y"});
  Expr e = parse("sin(x*y)^3", pool);
  Expr d1 = diff(e, 0);
  Expr d2 = diff(e, 0);
  CHECK(d1 == d2);
  CHECK(d1.pool() == &pool);
}
