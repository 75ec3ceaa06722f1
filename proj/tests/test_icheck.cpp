#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopf/icheck.hpp"

using namespace loopf::ilang;
using namespace loopf::types;
using namespace loopf::arith;

namespace {

FoPtr v(const char* n) { return fo_var(n); }
FoPtr num(unsigned n) { return fo_num(n); }

EqSystem theory_all() {
  EqSystem sys = peano_base();
  sys.signature["fact"] = 1;
  auto n = v("n");
  sys.equations.push_back({"f1", fo_app("fact", {fo_zero()}), fo_succ(fo_zero())});
  sys.equations.push_back({"f2", fo_app("fact", {fo_succ(n)}),
                           fo_mul(fo_app("fact", {n}), fo_succ(n))});
  sys.signature["a"] = 2;
  auto z = v("z");
  auto u = v("u");
  sys.equations.push_back({"a1", fo_app("a", {fo_zero(), n}), fo_succ(n)});
  sys.equations.push_back({"a2", fo_app("a", {fo_succ(z), fo_zero()}), num(2)});
  sys.equations.push_back(
      {"a3", fo_app("a", {fo_succ(z), fo_succ(u)}),
       fo_app("a", {z, fo_app("a", {fo_succ(z), u})})});
  return sys;
}

CP target_hint(const std::string& x, DI t) {
  return c_subst_hint(std::nullopt, {{x, std::move(t)}});
}

// the annotated corpus procedures (section 4.2.1, D.1.2, D.2.2, section 4.2.2)

EP add_proc_dep() {
  SP loop = s_cmd(c_inc("Z"),
                  s_cmd(target_hint("Z", di_nat(fo_add(v("x"), fo_succ(v("i"))))),
                        s_empty()));
  SP body = s_cmd(
      c_assign({"Z"}, e_var("X")),
      s_cmd(target_hint("Z", di_nat(fo_add(v("x"), fo_zero()))),
            s_cmd(c_for("I", e_var("Y"), loop, {"Z"}, std::string("i"),
                        {{"Z", di_nat(fo_add(v("x"), v("i")))}}),
                  s_empty())));
  return e_proc({"x", "y"}, {"X", "Y"}, {"Z"}, body,
                {di_nat(v("x")), di_nat(v("y"))}, {di_nat(fo_add(v("x"), v("y")))});
}

DI add_type() {
  return di_proc({"x", "y"}, {di_nat(v("x")), di_nat(v("y"))},
                 {di_nat(fo_add(v("x"), v("y")))});
}

EP mult_proc_dep() {
  SP loop = s_cmd(c_call(e_var("add"), {e_var("Z"), e_var("X")}, {"Z"}),
                  s_cmd(target_hint("Z", di_nat(fo_mul(v("x"), fo_succ(v("i"))))),
                        s_empty()));
  SP body = s_cmd(
      c_assign({"Z"}, e_num(0)),
      s_cmd(target_hint("Z", di_nat(fo_mul(v("x"), fo_zero()))),
            s_cmd(c_for("I", e_var("Y"), loop, {"Z"}, std::string("i"),
                        {{"Z", di_nat(fo_mul(v("x"), v("i")))}}),
                  s_empty())));
  return e_proc({"x", "y"}, {"X", "Y"}, {"Z"}, body,
                {di_nat(v("x")), di_nat(v("y"))}, {di_nat(fo_mul(v("x"), v("y")))});
}

DI mult_type() {
  return di_proc({"x", "y"}, {di_nat(v("x")), di_nat(v("y"))},
                 {di_nat(fo_mul(v("x"), v("y")))});
}

FoPtr fact_of(FoPtr t) { return fo_app("fact", {std::move(t)}); }

EP fact_proc_dep() {
  SP loop = s_var(
      "Y", e_var("I"),
      s_cmd(c_inc("Y"),
            s_cmd(c_call(e_var("mult"), {e_var("Z"), e_var("Y")}, {"Z"}),
                  s_cmd(target_hint("Z", di_nat(fact_of(fo_succ(v("i"))))),
                        s_empty()))));
  SP body = s_cmd(
      c_assign({"Z"}, e_num(1)),
      s_cmd(target_hint("Z", di_nat(fact_of(fo_zero()))),
            s_cmd(c_for("I", e_var("X"), loop, {"Z"}, std::string("i"),
                        {{"Z", di_nat(fact_of(v("i")))}}),
                  s_empty())));
  return e_proc({"n"}, {"X"}, {"Z"}, body, {di_nat(v("n"))},
                {di_nat(fact_of(v("n")))});
}

DI fact_type() {
  return di_proc({"n"}, {di_nat(v("n"))}, {di_nat(fact_of(v("n")))});
}

FoPtr a2(FoPtr x, FoPtr y) { return fo_app("a", {std::move(x), std::move(y)}); }

DI g_type(FoPtr first) {
  return di_proc({"y"}, {di_nat(v("y"))}, {di_nat(a2(std::move(first), v("y")))});
}

EP ack_proc_dep() {
  // initial G
  SP g0_body = s_cmd(c_assign({"P"}, e_var("Y")),
                     s_cmd(c_inc("P"),
                           s_cmd(target_hint("P", di_nat(a2(fo_zero(), v("y")))),
                                 s_empty())));
  EP g0 = e_proc({"y"}, {"Y"}, {"P"}, g0_body, {di_nat(v("y"))},
                 {di_nat(a2(fo_zero(), v("y")))});

  // inner loop of the updated G
  SP inner = s_cmd(
      c_call(e_var("H"), {e_var("P")}, {"P"}),
      s_cmd(target_hint("P", di_nat(a2(fo_succ(v("i")), fo_succ(v("j"))))),
            s_empty()));
  SP g1_body = s_cmd(
      c_assign({"P"}, e_num(2)),
      s_cmd(target_hint("P", di_nat(a2(fo_succ(v("i")), fo_zero()))),
            s_cmd(c_for("J", e_var("Y"), inner, {"P"}, std::string("j"),
                        {{"P", di_nat(a2(fo_succ(v("i")), v("j")))}}),
                  s_empty())));
  EP g1 = e_proc({"y"}, {"Y"}, {"P"}, g1_body, {di_nat(v("y"))},
                 {di_nat(a2(fo_succ(v("i")), v("y")))});

  SP for_body = s_cst("H", e_var("G"), s_cmd(c_assign({"G"}, g1), s_empty()));
  SP body = s_var(
      "G", g0,
      s_cmd(c_for("I", e_var("M"), for_body, {"G"}, std::string("i"),
                  {{"G", g_type(v("i"))}}),
            s_cmd(c_call(e_var("G"), {e_var("N")}, {"Z"}), s_empty())));
  return e_proc({"m", "n"}, {"M", "N"}, {"Z"}, body,
                {di_nat(v("m")), di_nat(v("n"))}, {di_nat(a2(v("m"), v("n")))});
}

DI ack_type() {
  return di_proc({"m", "n"}, {di_nat(v("m")), di_nat(v("n"))},
                 {di_nat(a2(v("m"), v("n")))});
}

}  // namespace

TEST_CASE("ID: add checks at its section 4.2.1 type") {
  EqSystem E = theory_all();
  auto r = id_type_expr(E, {}, {}, add_proc_dep(), false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(r.type, add_type()));
}

TEST_CASE("ID: mult checks at nat(x*y) (D.1.2)") {
  EqSystem E = theory_all();
  IdEnv env;
  env.bind("add", add_type());
  auto r = id_type_expr(E, env, {}, mult_proc_dep(), false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(r.type, mult_type()));
}

TEST_CASE("ID: fact checks at nat(fact(n)) (D.2.2)") {
  EqSystem E = theory_all();
  IdEnv env;
  env.bind("mult", mult_type());
  auto r = id_type_expr(E, env, {}, fact_proc_dep(), false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(r.type, fact_type()));
}

TEST_CASE("ID: ack checks at nat(a(m,n)) (section 4.2.2)") {
  EqSystem E = theory_all();
  auto r = id_type_expr(E, {}, {}, ack_proc_dep(), false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(r.type, ack_type()));
}

TEST_CASE("ID: wrong invariants and missing hints are rejected") {
  EqSystem E = theory_all();
  // add without the entry hint: Z enters the loop at nat(x), not nat(x+0)
  SP loop = s_cmd(c_inc("Z"), s_empty());
  SP body = s_cmd(c_assign({"Z"}, e_var("X")),
                  s_cmd(c_for("I", e_var("Y"), loop, {"Z"}, std::string("i"),
                              {{"Z", di_nat(fo_add(v("x"), v("i")))}}),
                        s_empty()));
  EP bad = e_proc({"x", "y"}, {"X", "Y"}, {"Z"}, body,
                  {di_nat(v("x")), di_nat(v("y"))},
                  {di_nat(fo_add(v("x"), v("y")))});
  auto r = id_type_expr(E, {}, {}, bad, false);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("T.FOR") != std::string::npos);
}

TEST_CASE("ID: pseudo-dynamic retyping through assignment") {
  EqSystem E = theory_all();
  OutEnv om;
  om.extend("y", di_top());
  SP s = s_cmd(c_assign({"y"}, e_num(0)), s_empty());
  auto r = i_check_dep(E, {}, om, s, false);
  REQUIRE(r.ok);
  CHECK(alpha_eq(*r.out.lookup("y"), di_nat(fo_zero())));
}

TEST_CASE("ID: inc/dec index tracking") {
  EqSystem E = theory_all();
  OutEnv om;
  om.extend("y", di_nat(v("n")));
  SP s = s_cmd(c_inc("y"), s_cmd(c_dec("y"), s_empty()));
  auto r = i_check_dep(E, {}, om, s, false);
  REQUIRE(r.ok);
  CHECK(alpha_eq(*r.out.lookup("y"), di_nat(fo_pred(fo_succ(v("n"))))));
}

TEST_CASE("ID^c: label type inference from jump sites") {
  EqSystem E = theory_all();
  // k:{ z := 3; jump(k, z)[z]; }[z]  with z: top
  SP lbl_body = s_cmd(c_assign({"z"}, e_num(3)),
                      s_cmd(c_jump(e_var("k"), {e_var("z")}, {"z"}), s_empty()));
  SP s = s_cmd(c_label("k", lbl_body, {"z"}), s_empty());
  OutEnv om;
  om.extend("z", di_top());
  auto r = i_check_dep(E, {}, om, i_desugar(s), true);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(*r.out.lookup("z"), di_nat(num(3))));

  // conflicting fall-through: jump passes nat(3), fall-through leaves nat(9)
  SP bad_body = s_cmd(c_jump(e_var("k"), {e_num(3)}, {"z"}),
                      s_cmd(c_assign({"z"}, e_num(9)), s_empty()));
  SP bad = s_cmd(c_label("k", bad_body, {"z"}), s_empty());
  auto r2 = i_check_dep(E, {}, om, i_desugar(bad), true);
  CHECK_FALSE(r2.ok);

  // classical off: rejected
  auto r3 = i_check_dep(E, {}, om, i_desugar(s), false);
  CHECK_FALSE(r3.ok);
}

TEST_CASE("ID: eigenvariable escape through assignment is rejected") {
  EqSystem E = theory_all();
  IdEnv env;
  env.bind("p", di_exists({"i"}, {di_nat(v("i")), di_equal(v("i"), fo_zero())}));
  OutEnv om;
  om.extend("y", di_top());
  om.extend("w", di_top());
  // y, w := p;  leaves y: nat($e) in the final environment
  SP s = s_cmd(c_assign({"y", "w"}, e_var("p")), s_empty());
  auto r = i_check_dep(E, env, om, s, false);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("Eigenvariable") != std::string::npos);

  // but consuming the eigenvariable before the end is fine
  SP s2 = s_cmd(c_assign({"y", "w"}, e_var("p")),
                s_cmd(c_assign({"y"}, e_num(0)),
                      s_cmd(c_assign({"w"}, e_star()),
                            s_empty())));
  auto r2 = i_check_dep(E, env, om, s2, false);
  INFO(r2.error);
  CHECK(r2.ok);
}

TEST_CASE("IS: add at proc(in nat, nat; out nat) and erasure agreement") {
  auto r = is_type_expr({}, {}, add_proc_dep(), false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(r.type, si_proc({si_nat(), si_nat()}, {si_nat()})));

  EqSystem E = theory_all();
  OutEnv om;
  om.extend("r", di_top());
  SP prog = s_cst("add", add_proc_dep(),
                  s_cmd(c_call(e_var("add"), {e_num(2), e_num(3)}, {"r"}), s_empty()));
  auto ec = kappa_erase_check(E, {}, om, prog, false);
  INFO(ec.error);
  CHECK(ec.ok);
}

TEST_CASE("IS: pseudo-dynamic signature feature") {
  // var y := *; y := 0;  -- final y: nat
  OutEnvS om;
  om.extend("z", si_unit());
  SP s = s_cmd(c_assign({"z"}, e_num(0)), s_empty());
  auto r = i_check_simple({}, om, s, false);
  REQUIRE(r.ok);
  CHECK(alpha_eq(*r.sout.lookup("z"), si_nat()));
}

TEST_CASE("IS: no-backpatching (proc reading an outer mutable)") {
  // proc (in X; out Z) { Z := g; }  where g is a mutable outside
  SP body = s_cmd(c_assign({"Z"}, e_var("g")), s_empty());
  EP p = e_proc({}, {"X"}, {"Z"}, body, {di_nat(v("x"))}, {});
  OutEnvS om;
  om.extend("g", si_nat());
  auto r = is_type_expr({}, om, p, false);
  CHECK_FALSE(r.ok);
  CHECK(r.error.find("unbound") != std::string::npos);
}

TEST_CASE("state checking along a full trace (preservation + progress)") {
  Store mu;
  mu.extend("r", e_star());
  SP prog = s_cst("add", add_proc_dep(),
                  s_cmd(c_call(e_var("add"), {e_num(2), e_num(3)}, {"r"}), s_empty()));
  State st{prog, mu};
  auto first = i_check_state(st, false);
  INFO(first.error);
  REQUIRE(first.ok);
  int steps = 0;
  for (;;) {
    auto sc = i_check_state(st, false);
    INFO(sc.error);
    REQUIRE(sc.ok);
    auto r = i_step(st);
    if (r.status == IStatus::AtEmpty) break;
    REQUIRE(r.status == IStatus::Stepped);  // progress
    st = r.state;
    ++steps;
  }
  CHECK(steps > 10);
  CHECK((*st.store.lookup("r"))->num == 5);
}

TEST_CASE("ID: scheme binding with atoms and instantiation by matching") {
  EqSystem E = theory_all();
  // cst id2 : forall a. proc(in 'a; out 'a) = proc(in X; out Z){ Z := X; }
  DI sch = di_proc({}, {di_atom("a")}, {di_atom("a")});
  EP lit = e_proc({}, {"X"}, {"Z"}, s_cmd(c_assign({"Z"}, e_var("X")), s_empty()));
  OutEnv om;
  om.extend("r", di_top());
  SP prog = s_cst("id2", lit,
                  s_cmd(c_call(e_var("id2"), {e_num(4)}, {"r"}), s_empty()), {"a"},
                  sch);
  auto r = i_check_dep(E, {}, om, prog, false);
  INFO(r.error);
  REQUIRE(r.ok);
  CHECK(alpha_eq(*r.out.lookup("r"), di_nat(num(4))));
}
