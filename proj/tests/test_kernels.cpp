#include <doctest.h>

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "feff/parse.hpp"
#include "feff/tape.hpp"

using namespace feff::expr;

namespace {

std::vector<double> run(const Tape& tape, const std::vector<double>& pts, Isa isa, int workers) {
  std::vector<double> out(pts.size() / static_cast<std::size_t>(tape.dimension()) * tape.outputs());
  tape.evaluate(pts, out, isa, workers);
  return out;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("SIMD kernels are bit-identical to the scalar reference") {
  Pool pool({"x", "y", "z"});
  std::vector<Expr> roots;
  for (const char* src : {"x^7 - 3*y^2*z + 1/3", "sin(x)*cos(y) / (2 + tan(z))", "exp(-x*y) + log(2 + z)",
                          "sqrt(1 + x^2) * sinh(y) - cosh(z)^3", "-(x - y)^11 / (1 + 0.125*z^2)"}) {
    Expr e = parse(src, pool);
    roots.push_back(e);
    for (int c = 0; c < 3; ++c) roots.push_back(diff(diff(e, c), (c + 1) % 3));
  }
  const Tape tape = Tape::compile(roots);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t npts : {1u, 3u, 4u, 5u, 37u}) {
    std::vector<double> pts(npts * 3);
    for (double& v : pts) v = u(rng);
    const auto ref = run(tape, pts, Isa::Scalar, 1);
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
      if (!isa_available(isa)) continue;
      INFO(isa_name(isa) << " npts=" << npts);
      CHECK(bit_equal(ref, run(tape, pts, isa, 1)));
      CHECK(bit_equal(ref, run(tape, pts, isa, 3)));
    }
    CHECK(bit_equal(ref, run(tape, pts, Isa::Scalar, 4)));
  }
}

TEST_CASE("single-point eval agrees with block evaluation") {
  Pool pool({"x", "y"});
  Expr e = parse("x*y + sin(x)^3", pool);
  const Tape tape = Tape::compile(std::vector<Expr>{e});
  std::vector<double> pts{0.25, -0.5, 0.75, 2.0};
  const auto out = run(tape, pts, active_isa(), 1);
  CHECK(out[0] == eval(e, std::vector<double>{0.25, -0.5}));
  CHECK(out[1] == eval(e, std::vector<double>{0.75, 2.0}));
}

TEST_CASE("domain error surfaces from every kernel and worker count") {
  Pool pool({"x"});
  const Tape tape = Tape::compile(std::vector<Expr>{parse("log(x)", pool)});
  std::vector<double> pts{1.0, 2.0, 3.0, 4.0, 5.0, -1.0};
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (!isa_available(isa)) continue;
    CHECK_THROWS_WITH(run(tape, pts, isa, 1), doctest::Contains("at point (-1)"));
    CHECK_THROWS_WITH(run(tape, pts, isa, 2), doctest::Contains("at point (-1)"));
  }
}

TEST_CASE("ISA names round trip") {
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) CHECK(isa_from_name(isa_name(isa)) == isa);
  CHECK(!isa_from_name("sse9"));
  CHECK(isa_available(Isa::Scalar));
}
