#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopf/types.hpp"

using namespace loopf::types;
using namespace loopf::arith;

TEST_CASE("alpha equality of dependent types") {
  // forall i (nat(i) => nat(s(i)))  vs  forall j (...)
  auto a = df_forall({"i"}, df_nat(fo_var("i")), df_nat(fo_succ(fo_var("i"))));
  auto b = df_forall({"j"}, df_nat(fo_var("j")), df_nat(fo_succ(fo_var("j"))));
  CHECK(alpha_eq(a, b));

  // E-equality is not type equality
  CHECK_FALSE(alpha_eq(df_nat(fo_add(fo_var("x"), fo_zero())), df_nat(fo_var("x"))));

  // conjunct order matters
  auto c1 = df_exists({"i"}, {df_nat(fo_var("i")), df_equal(fo_var("i"), fo_zero())});
  auto c2 = df_exists({"i"}, {df_equal(fo_var("i"), fo_zero()), df_nat(fo_var("i"))});
  CHECK_FALSE(alpha_eq(c1, c2));

  // free variables must agree by name
  CHECK_FALSE(alpha_eq(df_nat(fo_var("x")), df_nat(fo_var("y"))));
  // bound/free confusion rejected
  auto d1 = df_forall({"i"}, df_nat(fo_var("i")), df_nat(fo_var("i")));
  auto d2 = df_forall({"i"}, df_nat(fo_var("i")), df_nat(fo_var("x")));
  CHECK_FALSE(alpha_eq(d1, d2));
}

TEST_CASE("kappa") {
  CHECK(alpha_eq(*kappa_f(df_nat(fo_var("n"))), sf_nat()));
  CHECK(alpha_eq(*kappa_f(df_equal(fo_var("n"), fo_var("m"))), sf_unit()));
  auto p = di_proc({"x"}, {di_nat(fo_var("x"))}, {di_nat(fo_succ(fo_var("x")))});
  CHECK(alpha_eq(*kappa_i(p), si_proc({si_nat()}, {si_nat()})));
  CHECK_FALSE(kappa_f(df_bottom()).has_value());
  CHECK_FALSE(kappa_f(df_o()).has_value());
}

TEST_CASE("star on simple and dependent types") {
  CHECK(alpha_eq(star_type(si_proc({si_nat()}, {si_nat()})), sf_arrow(sf_nat(), sf_nat())));
  CHECK(alpha_eq(star_type(si_unit()), sf_unit()));

  auto add_ty = di_proc({"x", "y"}, {di_nat(fo_var("x")), di_nat(fo_var("y"))},
                        {di_nat(fo_add(fo_var("x"), fo_var("y")))});
  auto expect = df_forall({"x", "y"},
                          df_exists({}, {df_nat(fo_var("x")), df_nat(fo_var("y"))}),
                          df_nat(fo_add(fo_var("x"), fo_var("y"))));
  CHECK(alpha_eq(star_type(add_ty), expect));
}

TEST_CASE("diamond") {
  CHECK(alpha_eq(diamond_type(sf_arrow(sf_nat(), sf_nat())), si_proc({si_nat()}, {si_nat()})));
  // callcc's type is ((not phi => phi) => phi)diamond (section 6.1)
  auto phi = df_nat(fo_var("n"));
  auto callcc_f = df_forall({}, df_forall({}, df_not(phi), phi), phi);
  auto d = diamond_type(callcc_f);
  auto expect = di_proc({}, {di_proc({}, {di_not({di_nat(fo_var("n"))})}, {di_nat(fo_var("n"))})},
                        {di_nat(fo_var("n"))});
  CHECK(alpha_eq(d, expect));
  // round trip through an existential
  auto s = df_exists({"i"}, {df_nat(fo_var("i")), df_equal(fo_var("i"), fo_zero())});
  CHECK(alpha_eq(star_type(diamond_type(s)), s));
}

TEST_CASE("cps translation of types") {
  CHECK(alpha_eq(cps_type(df_bottom()), df_o()));
  CHECK(alpha_eq(cps_type(df_nat(fo_var("n"))), df_nat(fo_var("n"))));
  auto t = df_forall({"i"}, df_nat(fo_var("i")), df_nat(fo_succ(fo_var("i"))));
  auto expect = df_forall({"i"}, df_nat(fo_var("i")),
                          df_nabla(df_nat(fo_succ(fo_var("i")))));
  CHECK(alpha_eq(cps_type(t), expect));
  // negation clause
  CHECK(alpha_eq(cps_type(df_not(df_nat(fo_zero()))),
                 df_forall({}, df_nat(fo_zero()), df_o())));
}

TEST_CASE("cps output never contains bottom, o only guarded") {
  TypeGen g(7);
  std::function<bool(const DF&, bool)> ok = [&](const DF& t, bool tail) -> bool {
    switch (t->k) {
      case DFK::Bottom: return false;
      case DFK::O: return tail;
      case DFK::Forall:
        return ok(t->ant, false) && ok(t->cons, t->cons->k == DFK::O ? false : tail) &&
               (t->cons->k != DFK::O || true);
      case DFK::Exists: {
        for (const auto& c : t->comps)
          if (!ok(c, false)) return false;
        return true;
      }
      default: return true;
    }
  };
  for (int i = 0; i < 2000; ++i) {
    auto t = cps_type(g.gen_df(3));
    // o appears only as the consequent of an implication
    std::function<bool(const DF&)> guarded = [&](const DF& t) -> bool {
      switch (t->k) {
        case DFK::Bottom: return false;
        case DFK::O: return false;  // bare o at top is not allowed
        case DFK::Forall: {
          bool a = t->ant->k == DFK::O ? false : guarded(t->ant);
          bool c = t->cons->k == DFK::O ? true : guarded(t->cons);
          return a && c;
        }
        case DFK::Exists: {
          for (const auto& c : t->comps)
            if (c->k == DFK::O || !guarded(c)) return false;
          return true;
        }
        default: return true;
      }
    };
    CHECK(guarded(t));
  }
}

TEST_CASE("natural translation is identity") {
  TypeGen g(11);
  for (int i = 0; i < 1000; ++i) {
    auto s = g.gen_sf(3);
    CHECK(alpha_eq(natural_type(s), s));
    auto d = g.gen_df(3);
    CHECK(alpha_eq(natural_type(d), d));
  }
  CHECK(alpha_eq(natural_type(sf_nat()), sf_nat()));
  CHECK(alpha_eq(natural_type(sf_arrow(sf_nat(), sf_unit())),
                 sf_arrow(sf_nat(), sf_unit())));
}

TEST_CASE("retraction on generated types (Props 3.6 / 4.12)") {
  TypeGen g(1234);
  for (int i = 0; i < 10000; ++i) {
    auto si = g.gen_si(3);
    CHECK(alpha_eq(diamond_type(star_type(si)), si));
    auto sf = g.gen_sf(3);
    CHECK(alpha_eq(star_type(diamond_type(sf)), sf));
  }
  TypeGen g2(99);
  for (int i = 0; i < 10000; ++i) {
    auto di = g2.gen_di(3);
    CHECK(alpha_eq(diamond_type(star_type(di)), di));
    auto df = g2.gen_df(3);
    CHECK(alpha_eq(star_type(diamond_type(df)), df));
  }
}

TEST_CASE("erasure and translation commute (Prop 4.13)") {
  TypeGen g(555);
  for (int i = 0; i < 10000; ++i) {
    auto di = g.gen_di(3);
    auto lhs = kappa_f(star_type(di));
    auto rhs = star_type(*kappa_i(di));
    REQUIRE(lhs.has_value());
    CHECK(alpha_eq(*lhs, rhs));
  }
}

TEST_CASE("generator determinism and invariants") {
  TypeGen a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(alpha_eq(a.gen_di(4), b.gen_di(4)));
  TypeGen c(3);
  std::function<void(const DI&)> walk = [&](const DI& t) {
    if (t->k == DIK::Proc) {
      CHECK_FALSE(t->outs.empty());
      for (const auto& x : t->ins) walk(x);
      for (const auto& x : t->outs) walk(x);
    }
    if (t->k == DIK::Exists)
      for (const auto& x : t->comps) walk(x);
  };
  for (int i = 0; i < 500; ++i) walk(c.gen_di(4));
  // depth 0 is a base type
  TypeGen d(1);
  for (int i = 0; i < 20; ++i) {
    auto t = d.gen_sf(0);
    CHECK((t->k == SFK::Nat || t->k == SFK::Unit));
  }
}

TEST_CASE("index substitution in types avoids capture") {
  // (forall i. nat(i) => nat(j))[ s(i) / j ]  must rename the binder
  auto t = df_forall({"i"}, df_nat(fo_var("i")), df_nat(fo_var("j")));
  auto r = subst_index(t, "j", fo_succ(fo_var("i")));
  auto expect = df_forall({"i'"}, df_nat(fo_var("i'")), df_nat(fo_succ(fo_var("i"))));
  CHECK(alpha_eq(r, expect));
}
