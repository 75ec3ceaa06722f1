#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopf/arith.hpp"

using namespace loopf::arith;

namespace {

EqSystem with_ack() {
  EqSystem sys = peano_base();
  sys.signature["a"] = 2;
  auto z = fo_var("z");
  auto u = fo_var("u");
  auto n = fo_var("n");
  sys.equations.push_back({"a1", fo_app("a", {fo_zero(), n}), fo_succ(n)});
  sys.equations.push_back({"a2", fo_app("a", {fo_succ(z), fo_zero()}), fo_num(2)});
  sys.equations.push_back(
      {"a3", fo_app("a", {fo_succ(z), fo_succ(u)}),
       fo_app("a", {z, fo_app("a", {fo_succ(z), u})})});
  return sys;
}

// Independent oracle for the modified Ackermann equations: direct recursion
// on the defining equations using machine arithmetic.
Nat ack_oracle(unsigned m, Nat n) {
  if (m == 0) return n + 1;
  if (n == 0) return 2;
  return ack_oracle(m - 1, ack_oracle(m, n - 1));
}

// Rewrites + and * using only the oriented equations (1)-(4), no machine
// shortcut; used to certify that the builtin fast path agrees with E.
Nat eq_add(const Nat& x, const Nat& i) { return i == 0 ? x : eq_add(x, Nat(i - 1)) + 1; }
Nat eq_mul(const Nat& x, const Nat& i) {
  return i == 0 ? Nat(0) : eq_add(eq_mul(x, Nat(i - 1)), x);
}

}  // namespace

TEST_CASE("fo_subst basics") {
  auto i = fo_var("i");
  CHECK(fo_equal(fo_subst(i, fo_add(fo_var("x"), fo_zero()), "i"),
                 fo_add(fo_var("x"), fo_zero())));
  CHECK(fo_equal(fo_subst(fo_succ(i), fo_zero(), "i"), fo_num(1)));
  CHECK(fo_equal(fo_subst(fo_zero(), fo_var("m"), "i"), fo_zero()));
}

TEST_CASE("substitution lemma on generated terms") {
  // t[a/i][b/j] = t[b/j][a[b/j]/i]  when i != j and i not free in b
  std::uint64_t s = 42;
  auto rnd = [&]() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    return z ^ (z >> 27);
  };
  std::function<FoPtr(int)> gen = [&](int d) -> FoPtr {
    if (d == 0) {
      switch (rnd() % 4) {
        case 0: return fo_var("i");
        case 1: return fo_var("j");
        case 2: return fo_var("x");
        default: return fo_num(rnd() % 3);
      }
    }
    switch (rnd() % 4) {
      case 0: return fo_succ(gen(d - 1));
      case 1: return fo_add(gen(d - 1), gen(d - 1));
      case 2: return fo_mul(gen(d - 1), gen(d - 1));
      default: return gen(0);
    }
  };
  for (int rep = 0; rep < 200; ++rep) {
    auto t = gen(3);
    auto a = gen(2);
    auto b = fo_add(fo_var("x"), fo_num(1));  // i not free
    auto lhs = fo_subst(fo_subst(t, a, "i"), b, "j");
    auto rhs = fo_subst(fo_subst(t, b, "j"), fo_subst(a, b, "j"), "i");
    CHECK(fo_equal(lhs, rhs));
  }
}

TEST_CASE("fo_match_instance") {
  EqSystem sys = peano_base();
  auto n = fo_add(fo_num(1), fo_zero());
  auto m = fo_num(1);
  auto r = fo_match_instance(sys, n, m);
  CHECK(r.ok);
  CHECK(r.label == "1");
  REQUIRE(r.theta.count("x"));
  CHECK(fo_equal(r.theta["x"], fo_num(1)));

  // reflexivity
  auto k = fo_var("k");
  CHECK(fo_match_instance(sys, k, k).ok);
  CHECK(fo_match_instance(sys, k, k).reflexivity);

  // 0 + x = x is *not* an instance in either orientation
  auto bad = fo_match_instance(sys, fo_add(fo_zero(), fo_var("x")), fo_var("x"));
  CHECK_FALSE(bad.ok);
}

TEST_CASE("fo_eval peano") {
  EqSystem sys = peano_base();
  auto r = fo_eval(sys, fo_add(fo_num(2), fo_num(3)));
  REQUIRE(r.status == EvalStatus::Value);
  CHECK(fo_equal(r.term, fo_num(5)));
}

TEST_CASE("fo_eval ackermann variant") {
  EqSystem sys = with_ack();
  CHECK(ack_oracle(2, 3) == 8);  // a(2,n) = 2n+2
  auto r = fo_eval(sys, fo_app("a", {fo_num(2), fo_num(3)}));
  REQUIRE(r.status == EvalStatus::Value);
  CHECK(fo_equal(r.term, fo_num(8)));

  for (unsigned m = 0; m <= 3; ++m)
    for (unsigned n = 0; n <= 3; ++n) {
      auto e = fo_eval(sys, fo_app("a", {fo_num(m), fo_num(n)}));
      REQUIRE(e.status == EvalStatus::Value);
      CHECK(*fo_numeral_value(e.term) == ack_oracle(m, n));
    }
}

TEST_CASE("fo_eval f32") {
  EqSystem sys = peano_base();
  sys.signature["f32"] = 1;
  auto i = fo_var("i");
  sys.equations.push_back({"f1", fo_app("f32", {fo_zero()}), fo_num(3)});
  sys.equations.push_back({"f2", fo_app("f32", {fo_succ(i)}), fo_num(2)});
  auto r = fo_eval(sys, fo_add(fo_app("f32", {fo_zero()}), fo_app("f32", {fo_num(1)})));
  REQUIRE(r.status == EvalStatus::Value);
  CHECK(fo_equal(r.term, fo_num(5)));
}

TEST_CASE("fo_eval agrees with machine arithmetic and the pure-equation oracle") {
  EqSystem sys = peano_base();
  for (unsigned a = 0; a <= 20; ++a)
    for (unsigned b = 0; b <= 20; ++b) {
      auto r1 = fo_eval(sys, fo_add(fo_num(a), fo_num(b)));
      auto r2 = fo_eval(sys, fo_mul(fo_num(a), fo_num(b)));
      REQUIRE(r1.status == EvalStatus::Value);
      REQUIRE(r2.status == EvalStatus::Value);
      CHECK(*fo_numeral_value(r1.term) == a + b);
      CHECK(*fo_numeral_value(r2.term) == a * b);
      if (a <= 6 && b <= 6) {
        CHECK(eq_add(a, b) == a + b);
        CHECK(eq_mul(a, b) == a * b);
      }
    }
}

TEST_CASE("fo_eval determinism and stuck detection") {
  EqSystem sys = peano_base();
  sys.signature["g"] = 1;  // declared but never defined
  auto t = fo_app("g", {fo_num(1)});
  auto r1 = fo_eval(sys, t);
  auto r2 = fo_eval(sys, t);
  CHECK(r1.status == EvalStatus::Stuck);
  CHECK(r2.status == EvalStatus::Stuck);
  CHECK(fo_equal(r1.term, r2.term));

  auto e1 = fo_eval(sys, fo_mul(fo_num(7), fo_num(8)));
  auto e2 = fo_eval(sys, fo_mul(fo_num(7), fo_num(8)));
  CHECK(fo_equal(e1.term, e2.term));
  CHECK(e1.steps == e2.steps);
}

TEST_CASE("fuel exhaustion") {
  EqSystem sys = peano_base();
  sys.signature["w"] = 1;
  auto x = fo_var("x");
  sys.equations.push_back({"w1", fo_app("w", {x}), fo_app("w", {fo_succ(x)})});
  auto r = fo_eval(sys, fo_app("w", {fo_zero()}), 1000);
  CHECK(r.status == EvalStatus::FuelExhausted);
}

TEST_CASE("match symmetry") {
  EqSystem sys = peano_base();
  auto n = fo_add(fo_var("y"), fo_zero());
  auto m = fo_var("y");
  CHECK(fo_match_instance(sys, n, m).ok);
  CHECK(fo_match_instance(sys, m, n).ok);
}
