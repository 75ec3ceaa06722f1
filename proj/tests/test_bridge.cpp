#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopf/bridge.hpp"
#include "loopf/fcheck.hpp"
#include "loopf/icheck.hpp"

using namespace loopf;
using namespace loopf::bridge;
using namespace loopf::flang;
using namespace loopf::ilang;
using namespace loopf::types;
using loopf::arith::Nat;

namespace {

EP add_proc() {
  SP loop_body = s_cmd(c_inc("Z"), s_empty());
  SP body = s_cmd(c_assign({"Z"}, e_var("X")),
                  s_cmd(c_for("I", e_var("Y"), loop_body, {"Z"}), s_empty()));
  return e_proc({}, {"X", "Y"}, {"Z"}, body);
}

EP mult_proc() {
  SP loop_body = s_cmd(c_call(e_var("add"), {e_var("Z"), e_var("X")}, {"Z"}), s_empty());
  SP body = s_cmd(c_assign({"Z"}, e_num(0)),
                  s_cmd(c_for("I", e_var("Y"), loop_body, {"Z"}), s_empty()));
  return e_proc({}, {"X", "Y"}, {"Z"}, body);
}

EP fact_proc() {
  SP loop = s_var("Y", e_var("I"),
                  s_cmd(c_inc("Y"),
                        s_cmd(c_call(e_var("mult"), {e_var("Z"), e_var("Y")}, {"Z"}),
                              s_empty())));
  SP body = s_cmd(c_assign({"Z"}, e_num(1)),
                  s_cmd(c_for("I", e_var("X"), loop, {"Z"}), s_empty()));
  return e_proc({}, {"X"}, {"Z"}, body);
}

EP ack_proc() {
  SP g0_body = s_cmd(c_assign({"P"}, e_var("Y")), s_cmd(c_inc("P"), s_empty()));
  EP g0 = e_proc({}, {"Y"}, {"P"}, g0_body);
  SP inner_loop = s_cmd(c_call(e_var("H"), {e_var("P")}, {"P"}), s_empty());
  SP g1_body = s_cmd(c_assign({"P"}, e_num(2)),
                     s_cmd(c_for("J", e_var("Y"), inner_loop, {"P"}), s_empty()));
  EP g1 = e_proc({}, {"Y"}, {"P"}, g1_body);
  SP for_body = s_cst("H", e_var("G"), s_cmd(c_assign({"G"}, g1), s_empty()));
  SP body = s_var("G", g0,
                  s_cmd(c_for("I", e_var("M"), for_body, {"G"}),
                        s_cmd(c_call(e_var("G"), {e_var("N")}, {"Z"}), s_empty())));
  return e_proc({}, {"M", "N"}, {"Z"}, body);
}

struct Rng {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    return z ^ (z >> 27);
  }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
};

// well-typed closed L-term generator: every generated term carries a simple
// type so normalization terminates (system T)
struct LGen {
  Rng rng;
  flang::FreshGen g;

  FP value_at(const SF& ty, int depth);
  FP lterm_at(const SF& ty, int depth);

  SF gen_ty(int depth) {
    if (depth <= 0) return rng.below(2) ? sf_nat() : sf_unit();
    switch (rng.below(4)) {
      case 0: return sf_arrow(gen_ty(depth - 1), gen_ty(depth - 1));
      case 1: {
        std::vector<SF> cs;
        std::size_t n = 2 + rng.below(2);
        for (std::size_t i = 0; i < n; ++i) cs.push_back(gen_ty(depth - 1));
        return sf_product(std::move(cs));
      }
      default: return gen_ty(0);
    }
  }
};

FP LGen::value_at(const SF& ty, int depth) {
  switch (ty->k) {
    case SFK::Nat: return f_num(rng.below(4));
    case SFK::Unit: return f_unit();
    case SFK::Product: {
      std::vector<FP> cs;
      for (const auto& c : ty->comps) cs.push_back(value_at(c, depth - 1));
      return f_tuple(std::move(cs));
    }
    case SFK::Arrow: {
      // tuple-typed parameters use a tuple pattern, matching the shape of
      // star images (calls pass tuple components as separate arguments)
      if (ty->a->k == SFK::Product) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < ty->a->comps.size(); ++i)
          names.push_back(g.fresh("x"));
        return f_lam(Pattern::tuple(names), lterm_at(ty->b, depth - 1));
      }
      std::string x = g.fresh("x");
      return f_lam(Pattern::name(x), lterm_at(ty->b, depth - 1));
    }
    default: return f_unit();
  }
}

FP LGen::lterm_at(const SF& ty, int depth) {
  if (depth <= 0 || rng.below(3) == 0) return value_at(ty, depth);
  switch (rng.below(5)) {
    case 0: {  // let x = succ(v) in x ...
      std::string x = g.fresh("x");
      FP v = value_at(sf_nat(), depth - 1);
      return f_let(Pattern::name(x), f_app(f_succ_const(), v),
                   ty->k == SFK::Nat ? f_var(x) : lterm_at(ty, depth - 1));
    }
    case 1: {  // let x = pred(v) in ...
      std::string x = g.fresh("x");
      return f_let(Pattern::name(x), f_pred(value_at(sf_nat(), depth - 1)),
                   ty->k == SFK::Nat ? f_var(x) : lterm_at(ty, depth - 1));
    }
    case 2: {  // let x = v v' in ...
      std::string x = g.fresh("x");
      SF a = gen_ty(1);
      FP fun = value_at(sf_arrow(a, ty), depth - 1);
      FP arg = value_at(a, depth - 1);
      return f_let(Pattern::name(x), f_app(fun, arg), f_var(x));
    }
    case 3: {  // let x = rec(v, v', fn i => fn y => body) in ...
      std::string x = g.fresh("x");
      std::string i = g.fresh("i");
      std::string y = g.fresh("y");
      FP body = lterm_at(ty, depth - 1);
      // keep the recursion structurally decreasing and closed
      FP step = f_lam(Pattern::name(i), f_lam(Pattern::name(y), body));
      return f_let(Pattern::name(x),
                   f_rec(f_num(rng.below(3)), value_at(ty, depth - 1), step),
                   f_var(x));
    }
    default: {  // nested let of an L-term
      std::string x = g.fresh("x");
      return f_let(Pattern::name(x), lterm_at(gen_ty(1), depth - 1),
                   lterm_at(ty, depth - 1));
    }
  }
}

}  // namespace

TEST_CASE("star on the spec's clause examples") {
  // (inc(y); e)*_y = let y = succ(y) in y
  FP t = star_seq(s_cmd(c_inc("y"), s_empty()), {"y"});
  CHECK(f_alpha_eq(t, f_let(Pattern::name("y"), f_app(f_succ_const(), f_var("y")),
                            f_var("y"))));
  // numeral literals
  CHECK(f_alpha_eq(star_expr(e_num(3)), f_num(3)));
  // unit
  CHECK(f_alpha_eq(star_expr(e_star()), f_unit()));
}

TEST_CASE("star images are monadic (Prop 2.14)") {
  CHECK(in_V(erase(star_expr(add_proc()))));
  CHECK(in_V(erase(star_expr(ack_proc()))));
  SP body = s_cst("add", add_proc(),
                  s_cmd(c_call(e_var("add"), {e_num(2), e_num(3)}, {"r"}), s_empty()));
  CHECK(in_L(erase(star_seq(body, {"r"}))));
}

TEST_CASE("star agrees with the imperative run") {
  FP addf = erase(star_expr(add_proc()));
  auto r = f_eval(f_app(addf, f_tuple({f_num(2), f_num(3)})));
  REQUIRE(r.status == RunStatus::Value);
  CHECK(f_alpha_eq(r.term, f_num(5)));

  Store mu;
  mu.extend("r", e_star());
  auto ir = i_run(s_cst("p", add_proc(),
                        s_cmd(c_call(e_var("p"), {e_num(2), e_num(3)}, {"r"}),
                              s_empty())),
                  mu);
  REQUIRE(ir.status == IRunStatus::Done);
  CHECK((*ir.store.lookup("r"))->num == 5);
}

TEST_CASE("type preservation of star at simple types (Thm 3.7)") {
  auto is = is_type_expr({}, {}, [] {
    SP loop_body = s_cmd(c_inc("Z"), s_empty());
    SP body = s_cmd(c_assign({"Z"}, e_var("X")),
                    s_cmd(c_for("I", e_var("Y"), loop_body, {"Z"}), s_empty()));
    return e_proc({}, {"X", "Y"}, {"Z"}, body,
                  {types::di_nat(arith::fo_var("x")), types::di_nat(arith::fo_var("y"))},
                  {types::di_nat(arith::fo_add(arith::fo_var("x"), arith::fo_var("y")))});
  }(), false);
  REQUIRE(is.ok);
  FsEnv env;
  auto fs = f_check_simple(env, erase(star_expr(add_proc())), star_type(is.type));
  INFO(fs.error);
  CHECK(fs.ok);
}

TEST_CASE("diamond on the spec's clause examples") {
  flang::FreshGen g;
  // S^2(0) diamond = 2
  CHECK(e_equal(diamond_value(f_num(2), g), e_num(2)));
  // (fn x => t) diamond = proc (in x; out z) { t_z }
  FP lam = f_lam(Pattern::name("x"), f_var("x"));
  EP p = diamond_value(lam, g);
  REQUIRE(p->k == EK::Proc);
  CHECK(p->ins == std::vector<std::string>{"x"});
  CHECK(p->outs.size() == 1);
  // succ clause: let y = succ(w) in y  ==>  var z := w; inc(z); cst y = z; ...
  flang::FreshGen g2;
  SP d = diamond_term(f_let(Pattern::name("y"), f_app(f_succ_const(), f_num(1)),
                            f_var("y")),
                      {"r"}, g2);
  REQUIRE(d->k == SK::Var);
  REQUIRE(d->rest->k == SK::Cmd);
  CHECK(d->rest->cmd->k == CK::Inc);
  REQUIRE(d->rest->rest->k == SK::Cst);
}

TEST_CASE("diamond images have no free mutables inside procedures (Rem 2.17)") {
  LGen gen{Rng{2024}, {}};
  for (int i = 0; i < 200; ++i) {
    SF ty = gen.gen_ty(2);
    FP t = gen.lterm_at(ty, 3);
    REQUIRE(in_L(t));
    flang::FreshGen g;
    g.avoid(t);
    std::size_t n = l_arity(t);
    std::vector<std::string> rs;
    for (std::size_t k = 0; k < n; ++k) rs.push_back(g.fresh("r"));
    SP img = diamond_term(t, rs, g);
    // every proc literal's body references no mutables beyond its outs:
    // checked by running the simple checker on annotated output below, and
    // structurally: free idents of each proc body minus ins/outs are free
    // idents of the source term (read-only by construction)
    std::function<void(const EP&)> walk_e = [&](const EP& e) {
      if (e->k == EK::Proc) {
        auto fm = free_mutables(e->body);
        for (const auto& z : e->outs) fm.erase(z);
        CHECK(fm.empty());
      }
      for (const auto& c : e->comps) walk_e(c);
    };
    std::function<void(const SP&)> walk = [&](const SP& s) {
      if (s->k == SK::Cst || s->k == SK::Var) walk_e(s->init);
      if (s->k == SK::Cmd) {
        if (s->cmd->src) walk_e(s->cmd->src);
        if (s->cmd->callee) walk_e(s->cmd->callee);
        for (const auto& a : s->cmd->args) walk_e(a);
        if (s->cmd->body) walk(s->cmd->body);
      }
      if (s->k != SK::Empty) walk(s->rest);
    };
    walk(img);
  }
}

TEST_CASE("type preservation of diamond at simple types (Thm 3.9)") {
  LGen gen{Rng{77}, {}};
  int done = 0;
  for (int i = 0; i < 100; ++i) {
    SF ty = gen.gen_ty(2);
    FP t = gen.lterm_at(ty, 3);
    FsEnv fenv;
    std::map<const flang::FTerm*, SF> rec;
    auto fs = f_check_simple(fenv, t, ty, &rec);
    if (!fs.ok) continue;  // underconstrained generations are skipped
    flang::FreshGen g;
    g.avoid(t);
    auto comps = unpack_sf(ty);
    std::size_t n = comps.size();
    std::vector<std::string> rs;
    for (std::size_t k = 0; k < n; ++k) rs.push_back(g.fresh("r"));
    SP img = diamond_term(t, rs, g, &rec);
    // any initial out types: alternate between unit and nat
    OutEnvS om;
    for (std::size_t k = 0; k < n; ++k)
      om.extend(rs[k], k % 2 ? si_nat() : si_unit());
    auto r = i_check_simple({}, om, img, false);
    INFO(r.error);
    REQUIRE(r.ok);
    for (std::size_t k = 0; k < n; ++k) {
      const SI* got = r.sout.lookup(rs[k]);
      REQUIRE(got);
      CHECK(alpha_eq(*got, diamond_type(comps[k])));
    }
    ++done;
  }
  CHECK(done > 50);
}

TEST_CASE("simulation of full corpus traces (Prop 2.12)") {
  Store mu;
  mu.extend("r", e_star());
  {
    SP prog = s_cst("p", add_proc(),
                    s_cmd(c_call(e_var("p"), {e_num(2), e_num(3)}, {"r"}), s_empty()));
    auto rep = check_simulation(prog, mu, {"r"});
    INFO(rep.error);
    REQUIRE(rep.pass);
    CHECK(rep.max_f_steps <= 64);
    CHECK(rep.total_steps > 10);
  }
  {
    SP prog = s_cst(
        "add", add_proc(),
        s_cst("p", mult_proc(),
              s_cmd(c_call(e_var("p"), {e_num(3), e_num(2)}, {"r"}), s_empty())));
    auto rep = check_simulation(prog, mu, {"r"});
    INFO(rep.error);
    REQUIRE(rep.pass);
    CHECK(rep.max_f_steps <= 64);
  }
  {
    SP prog = s_cst("p", ack_proc(),
                    s_cmd(c_call(e_var("p"), {e_num(2), e_num(2)}, {"r"}), s_empty()));
    auto rep = check_simulation(prog, mu, {"r"});
    INFO(rep.error);
    REQUIRE(rep.pass);
    CHECK(rep.max_f_steps <= 64);
  }
}

TEST_CASE("S.VAR-I consumes zero reduction steps") {
  // (var y := e; eps) translates to a substitution already performed
  Store mu;
  mu.extend("x", e_num(1));
  SP prog = s_var("y", e_num(0), s_empty());
  auto rep = check_simulation(prog, mu, {"x"});
  REQUIRE(rep.pass);
  REQUIRE(rep.steps.size() == 1);
  CHECK(rep.steps[0].f_steps == 0);
}

TEST_CASE("retraction on specific terms (Props 2.19/2.20)") {
  // let x = succ(y) in x
  FP t = f_let(Pattern::name("x"), f_app(f_succ_const(), f_var("y")), f_var("x"));
  auto r = check_retraction(t);
  INFO(r.error);
  CHECK(r.pass);

  // numerals round-trip exactly in both directions
  auto r2 = check_retraction(f_num(7));
  CHECK(r2.pass);
  flang::FreshGen g;
  CHECK(f_equal_raw(star_expr(diamond_value(f_num(5), g)), f_num(5)));
  CHECK(e_equal(diamond_value(erase(star_expr(e_num(5))), g), e_num(5)));
  CHECK(f_equal_raw(star_expr(diamond_value(f_unit(), g)), f_unit()));
  CHECK(e_equal(diamond_value(erase(star_expr(e_star())), g), e_star()));
}

TEST_CASE("retraction on generated L-terms") {
  LGen gen{Rng{99}, {}};
  int pass = 0;
  for (int i = 0; i < 500; ++i) {
    SF ty = gen.gen_ty(2);
    FP t = gen.lterm_at(ty, 3);
    auto r = check_retraction(t);
    INFO(r.error, " term: ", f_show(t));
    REQUIRE(r.pass);
    ++pass;
  }
  CHECK(pass == 500);
}

TEST_CASE("representation: add, mult, fact, ack vs fo-eval") {
  arith::EqSystem E = arith::peano_base();
  {
    std::vector<std::vector<Nat>> ins;
    for (unsigned a = 0; a <= 5; ++a)
      for (unsigned b = 0; b <= 5; ++b) ins.push_back({a, b});
    // + is a builtin operation: wrap it as a symbol through an equation
    arith::EqSystem E2 = E;
    E2.signature["addf"] = 2;
    E2.equations.push_back({"ad", arith::fo_app("addf", {arith::fo_var("x"), arith::fo_var("y")}),
                            arith::fo_add(arith::fo_var("x"), arith::fo_var("y"))});
    auto rep = check_represents(add_proc(), "addf", E2, ins);
    INFO(rep.error);
    CHECK(rep.pass);
  }
  {
    arith::EqSystem E2 = E;
    E2.signature["a"] = 2;
    auto z = arith::fo_var("z");
    auto u = arith::fo_var("u");
    auto n = arith::fo_var("n");
    E2.equations.push_back({"a1", arith::fo_app("a", {arith::fo_zero(), n}), arith::fo_succ(n)});
    E2.equations.push_back({"a2", arith::fo_app("a", {arith::fo_succ(z), arith::fo_zero()}),
                            arith::fo_num(2)});
    E2.equations.push_back({"a3", arith::fo_app("a", {arith::fo_succ(z), arith::fo_succ(u)}),
                            arith::fo_app("a", {z, arith::fo_app("a", {arith::fo_succ(z), u})})});
    std::vector<std::vector<Nat>> ins;
    for (unsigned m = 0; m <= 2; ++m)
      for (unsigned nn = 0; nn <= 2; ++nn) ins.push_back({m, nn});
    auto rep = check_represents(ack_proc(), "a", E2, ins);
    INFO(rep.error);
    CHECK(rep.pass);
  }
}
