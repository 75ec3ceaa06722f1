#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopf/fcheck.hpp"

using namespace loopf::flang;
using namespace loopf::types;
using namespace loopf::arith;

namespace {

FP lam(const std::string& x, FP b) { return f_lam(Pattern::name(x), std::move(b)); }
FP v(const std::string& x) { return f_var(x); }

EqSystem peano() { return peano_base(); }

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

}  // namespace

TEST_CASE("FS: basics") {
  FsEnv env;
  // |- fn x => S(x) : nat -> nat
  auto r1 = f_check_simple(env, lam("x", f_succ(v("x"))), sf_arrow(sf_nat(), sf_nat()));
  CHECK(r1.ok);

  // |- rec(S(0), 0, fn x => fn y => S(y)) : nat
  auto r2 = f_check_simple(
      env, f_rec(f_num(1), f_zero(), lam("x", lam("y", f_succ(v("y"))))), sf_nat());
  CHECK(r2.ok);

  // 0 0 is ill typed (APP)
  auto r3 = f_check_simple(env, f_app(f_zero(), f_zero()));
  CHECK_FALSE(r3.ok);
  CHECK(r3.error.find("APP") != std::string::npos);

  // synthesis through lets and tuples
  auto t = f_let(Pattern::tuple({"a", "b"}), f_tuple({f_zero(), f_unit()}), v("a"));
  auto r4 = f_check_simple(env, t);
  REQUIRE(r4.ok);
  CHECK(alpha_eq(r4.type, sf_nat()));
}

TEST_CASE("FS: preservation along full traces") {
  FsEnv env;
  auto add = lam("x", lam("y", f_rec(v("y"), v("x"), lam("i", lam("z", f_succ(v("z")))))));
  FP t = f_app(f_app(add, f_num(2)), f_num(3));
  auto ty = sf_nat();
  REQUIRE(f_check_simple(env, t, ty).ok);
  int steps = 0;
  for (;;) {
    auto s = f_step(t);
    if (s.status == StepStatus::AtValue) break;
    REQUIRE(s.status == StepStatus::Stepped);
    t = s.term;
    CHECK(f_check_simple(env, t, ty).ok);
    ++steps;
  }
  CHECK(steps > 5);
  CHECK(f_alpha_eq(t, f_num(5)));
}

TEST_CASE("FD: the 4.1.1 addition term") {
  EqSystem E = peano();
  // fn x => fn y => rec[i. nat(n+i)](y, subst(x, [nat(n+0)]),
  //                                  fn i => fn z => subst(S(z), [nat(n+s(i))]))
  FP base = f_subst_node(v("x"), nullptr, std::nullopt,
                         df_nat(fo_add(fo_var("n"), fo_zero())));
  FP step = lam("i", lam("z", f_subst_node(f_succ(v("z")), nullptr, std::nullopt,
                                           df_nat(fo_add(fo_var("n"),
                                                         fo_succ(fo_var("i")))))));
  FP rec = f_rec(v("y"), base, step, std::string("i"),
                 df_nat(fo_add(fo_var("n"), fo_var("i"))));
  FP add = lam("x", lam("y", rec));

  DF ty = df_forall({"n"}, df_nat(fo_var("n")),
                    df_forall({"m"}, df_nat(fo_var("m")),
                              df_nat(fo_add(fo_var("n"), fo_var("m")))));
  FdEnv env;
  auto r = f_check_dep(E, env, add, ty, false);
  INFO(r.error);
  CHECK(r.ok);
}

TEST_CASE("FD: hole-form subst with equation labels") {
  EqSystem E = peano();
  FdEnv env;
  env.vars.emplace_back("x", df_nat(fo_var("n")));
  // subst(x, *, [i. nat(i)] via (1)) : nat(n+0)
  FP s = f_subst_node(v("x"), f_unit(), std::string("i"), df_nat(fo_var("i")),
                      std::string("1"));
  auto r = f_check_dep(E, env, s, df_nat(fo_add(fo_var("n"), fo_zero())), false);
  INFO(r.error);
  CHECK(r.ok);
}

TEST_CASE("FD: subst type mismatch is rejected") {
  EqSystem E = peano();
  FdEnv env;
  env.vars.emplace_back("x", df_nat(fo_add(fo_var("x0"), fo_succ(fo_zero()))));
  // target nat(x0+0) from current nat(x0+s(0)): s(0) = 0 is not an instance
  FP s = f_subst_node(v("x"), nullptr, std::nullopt,
                      df_nat(fo_add(fo_var("x0"), fo_zero())));
  auto r = f_check_dep(E, env, s, df_nat(fo_add(fo_var("x0"), fo_zero())), false);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("SUBST") != std::string::npos);
}

TEST_CASE("FD: the D.3.1 Ackermann term") {
  EqSystem E = with_ack();
  auto a = [](FoPtr x, FoPtr y) { return fo_app("a", {std::move(x), std::move(y)}); };

  // inner: fn y => rec[j. nat(a(s(i), j))](y, subst(2, [nat(a(s(i),0))]),
  //                                        fn j => fn k => subst(f k, [nat(a(s(i),s(j)))]))
  FP inner_base = f_subst_node(f_num(2), nullptr, std::nullopt,
                               df_nat(a(fo_succ(fo_var("i")), fo_zero())));
  FP inner_step =
      lam("j", lam("k", f_subst_node(f_app(v("f"), v("k")), nullptr, std::nullopt,
                                     df_nat(a(fo_succ(fo_var("i")),
                                              fo_succ(fo_var("j")))))));
  FP inner = lam("y", f_rec(v("y"), inner_base, inner_step, std::string("j"),
                            df_nat(a(fo_succ(fo_var("i")), fo_var("j")))));

  // base: fn y => subst(S(y), [nat(a(0,y))])  : forall y (nat(y) => nat(a(0,y)))
  FP base = f_lam(Pattern::name("y"),
                  f_subst_node(f_succ(v("y")), nullptr, std::nullopt,
                               df_nat(a(fo_zero(), fo_var("y")))),
                  df_nat(fo_var("y")));
  DF base_ty = df_forall({"y"}, df_nat(fo_var("y")), df_nat(a(fo_zero(), fo_var("y"))));

  // outer motive [i. forall y (nat(y) => nat(a(i, y)))]
  DF motive = df_forall({"y"}, df_nat(fo_var("y")), df_nat(a(fo_var("i"), fo_var("y"))));
  FP outer = f_rec(v("x"), f_ascribe(base, base_ty), lam("i", lam("f", inner)),
                   std::string("i"), motive);
  FP ack = lam("x", outer);

  DF ty = df_forall({"m"}, df_nat(fo_var("m")),
                    df_forall({"n"}, df_nat(fo_var("n")),
                              df_nat(a(fo_var("m"), fo_var("n")))));
  FdEnv env;
  auto r = f_check_dep(E, env, ack, ty, false);
  INFO(r.error);
  CHECK(r.ok);
}

TEST_CASE("FD: LET opens existentials and checks escapes") {
  EqSystem E = peano();
  FdEnv env;
  env.vars.emplace_back(
      "p", df_exists({"i"}, {df_nat(fo_var("i")), df_equal(fo_var("i"), fo_zero())}));
  // let (x, e) = p in x : exists i. (nat(i)) -- repack, fine
  FP t = f_let(Pattern::tuple({"x", "e"}), v("p"),
               f_pack(v("x"), df_exists({"j"}, {df_nat(fo_var("j"))}), {fo_var("i")}));
  auto r = f_check_dep(E, env, t, df_exists({"j"}, {df_nat(fo_var("j"))}), false);
  INFO(r.error);
  CHECK(r.ok);

  // escaping eigenvariable: let (x, e) = p in x : nat(i) must fail
  FP bad = f_let(Pattern::tuple({"x", "e"}), v("p"), v("x"));
  auto r2 = f_check_dep(E, env, bad, df_nat(fo_var("i")), false);
  CHECK_FALSE(r2.ok);
}

TEST_CASE("FD: equal rule via matching") {
  EqSystem E = peano();
  FdEnv env;
  // () : x + 0 = x
  auto r = f_check_dep(E, env, f_unit(),
                       df_equal(fo_add(fo_var("x"), fo_zero()), fo_var("x")), false);
  CHECK(r.ok);
  // () : 0 + x = x fails
  auto r2 = f_check_dep(E, env, f_unit(),
                        df_equal(fo_add(fo_zero(), fo_var("x")), fo_var("x")), false);
  CHECK_FALSE(r2.ok);
}

TEST_CASE("FD^c: callcc and throw types") {
  EqSystem E = peano();
  FdEnv env;
  DF phi = df_nat(fo_zero());
  // callcc : (not phi => phi) => phi
  DF cty = df_forall({}, df_forall({}, df_not(phi), phi), phi);
  CHECK(f_check_dep(E, env, f_callcc(), cty, true).ok);
  CHECK_FALSE(f_check_dep(E, env, f_callcc(), cty, false).ok);

  // throw : (not phi /\ phi) => psi
  DF tty = df_forall({}, df_exists({}, {df_not(phi), phi}), df_nat(fo_num(7)));
  CHECK(f_check_dep(E, env, f_throw(), tty, true).ok);

  // applied: callcc (fn k => 0) : nat(0)
  FP t = f_app(f_callcc(), lam("k", f_zero()));
  auto r = f_check_dep(E, env, t, phi, true);
  INFO(r.error);
  CHECK(r.ok);

  // applied: callcc (fn k => let u = throw (k, 0) in 0)
  FP t2 = f_app(f_callcc(),
                lam("k", f_let(Pattern::name("u"),
                               f_ascribe(f_app(f_throw(), f_tuple({v("k"), f_zero()})),
                                         df_nat(fo_num(3))),
                               f_zero())));
  auto r2 = f_check_dep(E, env, t2, phi, true);
  INFO(r2.error);
  CHECK(r2.ok);
}

TEST_CASE("FD: instantiation nodes") {
  EqSystem E = peano();
  FdEnv env;
  env.vars.emplace_back("f", df_forall({"i"}, df_equal(fo_var("i"), fo_var("i")),
                                       df_nat(fo_var("i"))));
  // matching cannot determine i from the argument type (top = 0=0 matches i:=0);
  // f{s(0)} () : nat(1) via explicit instantiation
  FP t = f_app(f_inst(v("f"), {fo_num(1)}), f_unit());
  auto r = f_check_dep(E, env, t, df_nat(fo_num(1)), false);
  INFO(r.error);
  CHECK(r.ok);
}
