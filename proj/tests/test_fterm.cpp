#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "loopf/fterm.hpp"

using namespace loopf::flang;
using loopf::arith::Nat;

namespace {

FP lam(const std::string& x, FP b) { return f_lam(Pattern::name(x), std::move(b)); }
FP v(const std::string& x) { return f_var(x); }

// machine oracle for the modified Ackermann equations
Nat ack_oracle(unsigned m, Nat n) {
  if (m == 0) return n + 1;
  if (n == 0) return 2;
  return ack_oracle(m - 1, ack_oracle(m, n - 1));
}

// fn x => fn y => rec(y, x, fn i => fn z => S(z))   -- addition
FP add_term() {
  return lam("x", lam("y", f_rec(v("y"), v("x"),
                                 lam("i", lam("z", f_succ(v("z")))))));
}

// section 2.1.1 Ackermann term
FP ack_term() {
  FP inner = f_rec(v("y"), f_num(2), lam("j", lam("k", f_app(v("f"), v("k")))));
  FP outer = f_rec(v("x"), lam("y", f_succ(v("y"))),
                   lam("i", lam("f", lam("y", inner))));
  return lam("x", lam("y", f_app(outer, v("y"))));
}

struct Rng {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    return z ^ (z >> 27);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

FP gen_term(Rng& r, int depth) {
  static const char* vars[] = {"x", "y", "z", "w"};
  if (depth <= 0) {
    switch (r.below(4)) {
      case 0: return f_var(vars[r.below(4)]);
      case 1: return f_zero();
      case 2: return f_unit();
      default: return f_num(r.below(3));
    }
  }
  switch (r.below(8)) {
    case 0: return f_succ(gen_term(r, depth - 1), 1 + r.below(2));
    case 1: return f_pred(gen_term(r, depth - 1));
    case 2: return f_app(gen_term(r, depth - 1), gen_term(r, depth - 1));
    case 3: return lam(vars[r.below(4)], gen_term(r, depth - 1));
    case 4: {
      std::size_t n = 2 + r.below(2);
      std::vector<FP> cs;
      for (std::size_t i = 0; i < n; ++i) cs.push_back(gen_term(r, depth - 1));
      return f_tuple(std::move(cs));
    }
    case 5:
      return f_let(Pattern::name(vars[r.below(4)]), gen_term(r, depth - 1),
                   gen_term(r, depth - 1));
    case 6:
      return f_rec(gen_term(r, depth - 1), gen_term(r, depth - 1),
                   lam("i", lam("a", gen_term(r, depth - 1))));
    default:
      return gen_term(r, 0);
  }
}

}  // namespace

TEST_CASE("substitution") {
  // no free occurrence
  auto t1 = f_subst(lam("x", v("x")), {{"y", f_zero()}});
  CHECK(f_alpha_eq(t1, lam("x", v("x"))));
  // plain replacement
  auto t2 = f_subst(lam("x", v("y")), {{"y", f_zero()}});
  CHECK(f_alpha_eq(t2, lam("x", f_zero())));
  // capture avoidance: (fn x => y)[y := x]  renames the binder
  auto t3 = f_subst(lam("x", v("y")), {{"y", v("x")}});
  CHECK(f_alpha_eq(t3, lam("q", v("x"))));
  CHECK_FALSE(f_alpha_eq(t3, lam("x", v("x"))));
}

TEST_CASE("step rules") {
  auto r1 = f_step(f_pred(f_num(1)));
  REQUIRE(r1.status == StepStatus::Stepped);
  CHECK(f_alpha_eq(r1.term, f_zero()));

  auto r2 = f_step(f_rec(f_zero(), f_num(1), lam("x", lam("y", v("y")))));
  REQUIRE(r2.status == StepStatus::Stepped);
  CHECK(f_alpha_eq(r2.term, f_num(1)));

  auto r3 = f_step(f_let(Pattern::tuple({"x", "y"}),
                         f_tuple({f_zero(), f_num(1)}), v("x")));
  REQUIRE(r3.status == StepStatus::Stepped);
  CHECK(f_alpha_eq(r3.term, f_zero()));

  // rec successor rule, substituting as written
  auto f = lam("x", lam("y", v("y")));
  auto r4 = f_step(f_rec(f_num(1), f_zero(), f));
  REQUIRE(r4.status == StepStatus::Stepped);
  CHECK(f_alpha_eq(r4.term, f_app(f_app(f, f_zero()), f_rec(f_zero(), f_zero(), f))));

  // applying 0 is stuck
  auto r5 = f_step(f_app(f_zero(), f_zero()));
  CHECK(r5.status == StepStatus::Stuck);

  // at value
  CHECK(f_step(f_num(3)).status == StepStatus::AtValue);
}

TEST_CASE("evaluation: addition and Ackermann") {
  auto add = add_term();
  auto r = f_eval(f_app(f_app(add, f_num(2)), f_num(3)));
  REQUIRE(r.status == RunStatus::Value);
  CHECK(f_alpha_eq(r.term, f_num(5)));  // machine oracle: 2+3

  CHECK(ack_oracle(2, 3) == 8);
  auto ack = ack_term();
  auto r2 = f_eval(f_app(f_app(ack, f_num(2)), f_num(3)));
  REQUIRE(r2.status == RunStatus::Value);
  CHECK(f_alpha_eq(r2.term, f_num(8)));

  for (unsigned m = 0; m <= 2; ++m)
    for (unsigned n = 0; n <= 3; ++n) {
      auto e = f_eval(f_app(f_app(ack_term(), f_num(m)), f_num(n)));
      REQUIRE(e.status == RunStatus::Value);
      CHECK(f_alpha_eq(e.term, f_num(ack_oracle(m, n))));
    }
}

TEST_CASE("divergence exhausts fuel") {
  auto omega = f_app(lam("x", f_app(v("x"), v("x"))),
                     lam("x", f_app(v("x"), v("x"))));
  CHECK(f_eval(omega, 1000).status == RunStatus::FuelExhausted);
}

TEST_CASE("determinism of step") {
  Rng r{17};
  for (int i = 0; i < 200; ++i) {
    auto t = gen_term(r, 4);
    auto a = f_step(t);
    auto b = f_step(t);
    CHECK(a.status == b.status);
    if (a.status == StepStatus::Stepped) CHECK(f_alpha_eq(a.term, b.term));
  }
}

TEST_CASE("normalize") {
  auto t1 = lam("x", f_app(lam("y", v("y")), v("x")));
  auto n1 = f_normalize(t1);
  REQUIRE(n1.status == RunStatus::Value);
  CHECK(f_alpha_eq(n1.term, lam("x", v("x"))));

  // open let reduces
  auto t2 = f_let(Pattern::name("r"), v("x"), v("r"));
  auto n2 = f_normalize(t2);
  CHECK(f_alpha_eq(n2.term, v("x")));

  // numerals are fixed points
  auto n3 = f_normalize(f_num(7));
  CHECK(n3.steps == 0);
  CHECK(f_alpha_eq(n3.term, f_num(7)));

  // idempotent on outputs
  Rng r{5};
  for (int i = 0; i < 100; ++i) {
    auto t = gen_term(r, 3);
    auto a = f_normalize(t, 2000);
    if (a.status != RunStatus::Value) continue;
    auto b = f_normalize(a.term, 2000);
    REQUIRE(b.status == RunStatus::Value);
    CHECK(b.steps == 0);
    CHECK(f_alpha_eq(a.term, b.term));
  }
}

TEST_CASE("monadic classification") {
  CHECK(f_is_monadic(v("x")) == Monadic::InV);
  CHECK(in_L(v("x")));
  // bare application is neither
  CHECK(f_is_monadic(f_app(lam("x", v("x")), f_zero())) == Monadic::Neither);
  // let x = succ(y) in x
  auto t = f_let(Pattern::name("x"), f_app(f_succ_const(), v("y")), v("x"));
  CHECK(f_is_monadic(t) == Monadic::InL);
  // S(x) is not a V-value (numerals only)
  CHECK_FALSE(in_V(f_succ(v("x"))));
  CHECK(in_V(f_num(3)));
}

TEST_CASE("sharp produces monadic normal forms (Prop A.2)") {
  CHECK(f_alpha_eq(f_sharp(v("x")), v("x")));

  // (t u)# shape
  auto app = f_sharp(f_app(v("t"), v("u")));
  auto expect = f_let(Pattern::name("a"), v("t"),
                      f_let(Pattern::name("b"), v("u"),
                            f_let(Pattern::name("r"), f_app(v("a"), v("b")), v("r"))));
  CHECK(f_alpha_eq(app, expect));

  // S(x)# per the S^n(t) clause at n=1
  auto sx = f_sharp(f_succ(v("x")));
  auto expect2 = f_let(Pattern::name("z"), v("x"),
                       f_let(Pattern::name("w"), f_app(f_succ_const(), v("z")), v("w")));
  CHECK(f_alpha_eq(sx, expect2));

  Rng r{99};
  for (int i = 0; i < 500; ++i) {
    auto t = gen_term(r, 4);
    CHECK(in_L(f_sharp(t)));
  }
}

TEST_CASE("sharp is deterministic") {
  Rng r{3};
  for (int i = 0; i < 50; ++i) {
    auto t = gen_term(r, 4);
    CHECK(f_equal_raw(f_sharp(t), f_sharp(t)));
  }
}

TEST_CASE("let_normalize") {
  auto t = f_app(lam("x", v("x")), f_app(v("f"), v("y")));
  auto n = let_normalize(t);
  CHECK(f_alpha_eq(n, f_let(Pattern::name("x"), f_app(v("f"), v("y")), v("x"))));
  // nested occurrences rewritten too
  auto t2 = f_tuple({t, t});
  auto n2 = let_normalize(t2);
  CHECK(f_alpha_eq(n2, f_tuple({n, n})));
}

TEST_CASE("erase strips annotations") {
  auto t = f_ascribe(f_subst_node(f_num(1), f_unit(), std::string("i"),
                                  loopf::types::df_nat(loopf::arith::fo_var("i"))),
                     loopf::types::df_nat(loopf::arith::fo_num(1)));
  CHECK(f_alpha_eq(erase(t), f_num(1)));
}
