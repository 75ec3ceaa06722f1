#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "loopf/parser.hpp"

using namespace loopf;
using namespace loopf::parser;

TEST_CASE("theory parsing") {
  auto sys = parse_theory(R"(
-- Ackermann variant
fun a 2;
eq (a1): a(0, n) = s(n);
eq (a2): a(s(z), 0) = 2;
eq (a3): a(s(z), s(u)) = a(z, a(s(z), u));
eq (1): x + 0 = x;   -- restating a builtin is fine
)");
  CHECK(sys.signature.at("a") == 2);
  CHECK(sys.find("a3"));
  CHECK(sys.find("1"));
  auto r = arith::fo_eval(sys, parse_foterm("a(2, 3)"));
  REQUIRE(r.status == arith::EvalStatus::Value);
  CHECK(arith::fo_equal(r.term, arith::fo_num(8)));

  CHECK_THROWS_AS(parse_theory("eq (1): x + 0 = 0;"), ParseError);
}

TEST_CASE("first-order terms round trip") {
  for (const char* s : {"x + 0", "s(s(0)) * p(x)", "a(i, j + 1) + 3", "s^12(k)"}) {
    auto t = parse_foterm(s);
    auto t2 = parse_foterm(arith::fo_show(t));
    CHECK(arith::fo_equal(t, t2));
  }
}

TEST_CASE("F terms parse") {
  auto add = parse_fterm("fn x => fn y => rec(y, x, fn i => fn z => S(z))");
  auto r = flang::f_eval(flang::f_app(flang::f_app(flang::erase(add), flang::f_num(2)),
                                      flang::f_num(3)));
  REQUIRE(r.status == flang::RunStatus::Value);
  CHECK(flang::f_alpha_eq(r.term, flang::f_num(5)));

  auto u = parse_funit(
      "fn x => fn y => rec[i. nat(n + i)](y, subst(x, [nat(n + 0)]),"
      " fn i => fn z => subst(S(z), [nat(n + s(i))]))"
      " : forall n.(nat(n) => forall m.(nat(m) => nat(n + m)))");
  REQUIRE(u.dep_type);
  CHECK(types::alpha_eq(
      u.dep_type,
      types::df_forall({"n"}, types::df_nat(arith::fo_var("n")),
                       types::df_forall({"m"}, types::df_nat(arith::fo_var("m")),
                                        types::df_nat(arith::fo_add(
                                            arith::fo_var("n"), arith::fo_var("m")))))));

  auto lets = parse_fterm("let (x, y) = (0, 1) in (x : nat)");
  CHECK(flang::f_alpha_eq(flang::erase(lets),
                          flang::f_let(flang::Pattern::tuple({"x", "y"}),
                                       flang::f_tuple({flang::f_zero(), flang::f_num(1)}),
                                       flang::f_var("x"))));
}

TEST_CASE("I programs parse and run") {
  auto prog = parse_iprog(R"(
cst add = proc (in X, Y; out Z) {
  Z := X;
  for I := 0 until Y { inc(Z); }[Z];
};
add(2, 3; r);
)");
  ilang::Store mu;
  mu.extend("r", ilang::e_star());
  auto r = ilang::i_run(ilang::i_desugar(prog), mu);
  REQUIRE(r.status == ilang::IRunStatus::Done);
  CHECK((*r.store.lookup("r"))->num == 5);
}

TEST_CASE("annotated I programs parse") {
  auto prog = parse_iprog(R"(
cst add = proc forall x, y (in X: nat(x), Y: nat(y); out Z: nat(x + y)) {
  Z := X;
  subst Z: nat(x + 0);
  for I := 0 until Y invariant [i | Z: nat(x + i)] {
    inc(Z);
    subst Z: nat(x + s(i));
  }[Z];
};
)");
  REQUIRE(prog->k == ilang::SK::Cst);
  const auto& p = prog->init;
  REQUIRE(p->k == ilang::EK::Proc);
  CHECK(p->ivars == std::vector<std::string>{"x", "y"});
  REQUIRE(p->in_types.size() == 2);
  CHECK(types::alpha_eq(p->in_types[0], types::di_nat(arith::fo_var("x"))));
}

TEST_CASE("labels, jumps, globals and schemes parse") {
  auto prog = parse_iprog(R"(
cst twice : forall a. proc (in proc (in 'a; out 'a), 'a; out 'a) =
  proc (in f, x; out z) { f(x; z); f(z; z); };
k : [nat(3)] : {
  jump(k, 3)[z];
  z := 9;
}[z];
p(1; y)[g];
)");
  REQUIRE(prog->k == ilang::SK::Cst);
  CHECK(prog->scheme_atoms == std::vector<std::string>{"a"});
  REQUIRE(prog->rest->k == ilang::SK::Cmd);
  CHECK(prog->rest->cmd->k == ilang::CK::Label);
  CHECK(prog->rest->rest->cmd->k == ilang::CK::Call);
  CHECK(prog->rest->rest->cmd->globals == std::vector<std::string>{"g"});
}

TEST_CASE("print/parse round trip on generated F terms") {
  struct Rng {
    std::uint64_t s;
    std::uint64_t next() {
      s += 0x9e3779b97f4a7c15ull;
      auto z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      return z ^ (z >> 27);
    }
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
  } rng{314};
  static const char* vars[] = {"x", "y", "z", "w"};
  std::function<flang::FP(int)> gen = [&](int d) -> flang::FP {
    using namespace flang;
    if (d <= 0) {
      switch (rng.below(4)) {
        case 0: return f_var(vars[rng.below(4)]);
        case 1: return f_num(rng.below(5));
        default: return f_unit();
      }
    }
    switch (rng.below(8)) {
      case 0: return f_succ(gen(d - 1), 1 + rng.below(2));
      case 1: return f_pred(gen(d - 1));
      case 2: return f_app(gen(d - 1), gen(d - 1));
      case 3: return f_lam(Pattern::name(vars[rng.below(4)]), gen(d - 1));
      case 4: {
        std::vector<flang::FP> cs;
        for (int i = 0; i < 2; ++i) cs.push_back(gen(d - 1));
        return f_tuple(std::move(cs));
      }
      case 5:
        return f_let(Pattern::tuple({"a", "b"}), gen(d - 1), gen(d - 1));
      case 6:
        return f_rec(gen(d - 1), gen(d - 1),
                     f_lam(Pattern::name("i"), f_lam(Pattern::name("k"), gen(d - 1))));
      default:
        return f_app(f_succ_const(), gen(d - 1));
    }
  };
  for (int i = 0; i < 10000; ++i) {
    auto t = gen(4);
    auto printed = flang::f_show(t);
    INFO(printed);
    auto back = parse_fterm(printed);
    CHECK(flang::f_alpha_eq(t, back));
  }
}

TEST_CASE("print/parse round trip on generated types") {
  types::TypeGen g(2718);
  for (int i = 0; i < 10000; ++i) {
    auto d = g.gen_df(3);
    INFO(types::show(d));
    CHECK(types::alpha_eq(parse_df(types::show(d)), d));
    auto di = g.gen_di(3);
    INFO(types::show(di));
    CHECK(types::alpha_eq(parse_di(types::show(di)), di));
    auto sf = g.gen_sf(3);
    CHECK(types::alpha_eq(parse_sf(types::show(sf)), sf));
  }
}

TEST_CASE("print/parse round trip on I programs") {
  auto texts = {
      R"(cst add = proc (in X, Y; out Z) { Z := X; for I := 0 until Y { inc(Z); }[Z]; }; add(2, 3; r);)",
      R"(var g; var x := 3; { x, g := (1, 2); dec(x); }[x, g];)",
      R"(k : { jump(k, 3)[z]; }[z];)",
      R"(subst Z: nat(x + 0); subst [i | Z: nat(i)] via (1);)",
      R"(p{a := nat(0)}(*; r)[mk];)",
  };
  for (const auto* text : texts) {
    auto a = parse_iprog(text);
    auto printed = ilang::i_show(a);
    INFO(printed);
    auto b = parse_iprog(printed);
    CHECK(ilang::seq_equal(ilang::i_desugar(a), ilang::i_desugar(b)));
  }
}

TEST_CASE("parse errors carry locations") {
  try {
    parse_iprog("cst x = ;");
    FAIL("should have thrown");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.show().find("parse error") == 0);
  }
}
