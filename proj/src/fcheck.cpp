#include "loopf/fcheck.hpp"

#include <sstream>

namespace loopf::flang {

using namespace loopf::types;
using arith::FoPtr;

// --------------------------------------------------------------------- FS
//
// FS is simply typed, so checking is plain monomorphic inference with
// unification; reducts of well-typed terms then always re-check.

namespace {

struct FsFail {
  std::string rule, msg;
};

class Unifier {
 public:
  SF fresh() {
    slots.emplace_back(nullptr);
    return sf_atom("?" + std::to_string(slots.size() - 1));
  }

  bool is_meta(const SF& t, std::size_t& id) const {
    if (t->k != SFK::Atom || t->atom.empty() || t->atom[0] != '?') return false;
    id = std::stoul(t->atom.substr(1));
    return true;
  }

  SF resolve(SF t) const {
    std::size_t id;
    while (is_meta(t, id) && slots[id]) t = slots[id];
    return t;
  }

  bool occurs(std::size_t id, const SF& t0) const {
    SF t = resolve(t0);
    std::size_t j;
    if (is_meta(t, j)) return j == id;
    if (t->k == SFK::Arrow) return occurs(id, t->a) || occurs(id, t->b);
    if (t->k == SFK::Product) {
      for (const auto& c : t->comps)
        if (occurs(id, c)) return true;
    }
    return false;
  }

  void unify(const SF& a0, const SF& b0, const char* rule) {
    SF a = resolve(a0), b = resolve(b0);
    std::size_t ia, ib;
    if (is_meta(a, ia)) {
      if (is_meta(b, ib) && ia == ib) return;
      if (occurs(ia, b)) throw FsFail{rule, "occurs check"};
      slots[ia] = b;
      return;
    }
    if (is_meta(b, ib)) {
      unify(b, a, rule);
      return;
    }
    if (a->k != b->k)
      throw FsFail{rule, types::show(zonk(a)) + " vs " + types::show(zonk(b))};
    switch (a->k) {
      case SFK::Arrow:
        unify(a->a, b->a, rule);
        unify(a->b, b->b, rule);
        return;
      case SFK::Product: {
        if (a->comps.size() != b->comps.size())
          throw FsFail{rule, "tuple arity mismatch"};
        for (std::size_t i = 0; i < a->comps.size(); ++i)
          unify(a->comps[i], b->comps[i], rule);
        return;
      }
      case SFK::Atom:
        if (a->atom != b->atom) throw FsFail{rule, a->atom + " vs " + b->atom};
        return;
      default:
        return;
    }
  }

  SF zonk(const SF& t0) const {
    SF t = resolve(t0);
    switch (t->k) {
      case SFK::Arrow: return sf_arrow(zonk(t->a), zonk(t->b));
      case SFK::Product: {
        std::vector<SF> cs;
        for (const auto& c : t->comps) cs.push_back(zonk(c));
        return sf_product(std::move(cs));
      }
      default: return t;
    }
  }

  bool ground(const SF& t0) const {
    SF t = resolve(t0);
    std::size_t id;
    if (is_meta(t, id)) return false;
    if (t->k == SFK::Arrow) return ground(t->a) && ground(t->b);
    if (t->k == SFK::Product) {
      for (const auto& c : t->comps)
        if (!ground(c)) return false;
    }
    return true;
  }

 private:
  std::vector<SF> slots;
};

void bind_pattern_uni(Unifier& u, FsEnv& env, const Pattern& pat, const SF& ty) {
  switch (pat.k) {
    case Pattern::K::Name:
      env.vars.emplace_back(pat.names[0], ty);
      return;
    case Pattern::K::Unit:
      u.unify(ty, sf_unit(), "LET");
      return;
    case Pattern::K::Tuple: {
      std::vector<SF> comps;
      for (const auto& n : pat.names) {
        comps.push_back(u.fresh());
        env.vars.emplace_back(n, comps.back());
      }
      std::vector<SF> copy = comps;
      u.unify(ty, sf_product(std::move(copy)), "LET");
      return;
    }
  }
}

SF fs_infer(Unifier& u, const FsEnv& env, const FP& t,
            std::map<const FTerm*, SF>* record) {
  SF ty = [&]() -> SF {
  switch (t->k) {
    case FK::Var: {
      if (const SF* ty = env.lookup(t->name)) return *ty;
      throw FsFail{"IDENT", "unbound variable " + t->name};
    }
    case FK::Zero:
      return sf_nat();
    case FK::Unit:
      return sf_unit();
    case FK::SuccConst:
      return sf_arrow(sf_nat(), sf_nat());
    case FK::Succ:
    case FK::Pred:
      u.unify(fs_infer(u, env, t->sub[0], record), sf_nat(),
              t->k == FK::Succ ? "SUCC" : "PRED");
      return sf_nat();
    case FK::Tuple: {
      std::vector<SF> comps;
      for (const auto& c : t->sub) comps.push_back(fs_infer(u, env, c, record));
      return sf_product(std::move(comps));
    }
    case FK::App: {
      SF f = fs_infer(u, env, t->sub[0], record);
      SF a = fs_infer(u, env, t->sub[1], record);
      SF r = u.fresh();
      u.unify(f, sf_arrow(a, r), "APP");
      return r;
    }
    case FK::Lam: {
      FsEnv env2 = env;
      SF p;
      if (t->param_simple) {
        p = t->param_simple;
      } else if (t->param) {
        auto k = kappa_f(t->param);
        if (!k) throw FsFail{"ABS", "parameter annotation has no computational content"};
        p = *k;
      } else {
        p = u.fresh();
      }
      bind_pattern_uni(u, env2, t->pat, p);
      SF b = fs_infer(u, env2, t->sub[0], record);
      return sf_arrow(p, b);
    }
    case FK::Let: {
      SF bound = fs_infer(u, env, t->sub[0], record);
      FsEnv env2 = env;
      bind_pattern_uni(u, env2, t->pat, bound);
      return fs_infer(u, env2, t->sub[1], record);
    }
    case FK::Rec: {
      u.unify(fs_infer(u, env, t->sub[0], record), sf_nat(), "REC");
      SF base = fs_infer(u, env, t->sub[1], record);
      u.unify(fs_infer(u, env, t->sub[2], record),
              sf_arrow(sf_nat(), sf_arrow(base, base)), "REC");
      return base;
    }
    case FK::Ascribe: {
      SF want;
      if (t->anno_simple) {
        want = t->anno_simple;
      } else {
        auto k = kappa_f(t->anno);
        if (!k) throw FsFail{"ASCRIBE", "annotation has no computational content"};
        want = *k;
      }
      u.unify(fs_infer(u, env, t->sub[0], record), want, "ASCRIBE");
      return want;
    }
    case FK::Pack:
    case FK::Subst:
    case FK::Inst:
      return fs_infer(u, env, t->sub[0], record);  // FS sees the erased view
    case FK::Callcc:
    case FK::Throw:
      throw FsFail{"CONST", "classical constants are not typable in FS"};
  }
  throw FsFail{"INTERNAL", "unhandled term"};
  }();
  if (record) (*record)[t.get()] = ty;
  return ty;
}

}  // namespace

FsResult f_check_simple(const FsEnv& env, const FP& t, SF expected,
                        std::map<const FTerm*, SF>* record) {
  Unifier u;
  try {
    SF ty = fs_infer(u, env, t, record);
    if (expected) u.unify(ty, expected, "CONV");
    SF out = u.zonk(ty);
    if (!u.ground(ty))
      return {false, nullptr,
              "TypeError(AMBIGUOUS): underconstrained type " + types::show(out) +
                  "; add an ascription"};
    if (record)
      for (auto& [k, v] : *record) v = u.zonk(v);
    return {true, out, ""};
  } catch (const FsFail& f) {
    return {false, nullptr, "TypeError(" + f.rule + "): " + f.msg};
  }
}

// --------------------------------------------------------------------- FD

namespace {

FdResult fd_err(const std::string& rule, const std::string& msg) {
  return {false, nullptr, "TypeError(" + rule + "): " + msg};
}

FdResult fd_done(FdCtx& ctx, const FP& t, DF ty) {
  if (ctx.record) (*ctx.record)[t.get()] = ty;
  return {true, std::move(ty), ""};
}

}  // namespace

// rename-right-to-left walk shared by matching and diff extraction
namespace {

struct RenameMap {
  std::map<std::string, FoPtr> map;  // right name -> left var
};

}  // namespace

bool type_match(const DF& pattern, const DF& subject,
                const std::set<std::string>& pvars,
                std::map<std::string, FoPtr>& theta) {
  // binders in the pattern shadow pvars; subject binders renamed to match.
  std::function<bool(const DF&, const DF&, std::set<std::string>,
                     std::map<std::string, FoPtr>)>
      go = [&](const DF& p, const DF& s, std::set<std::string> pv,
               std::map<std::string, FoPtr> ren) -> bool {
    auto fo_side = [&](const FoPtr& ps, const FoPtr& ss) {
      FoPtr s2 = arith::fo_subst_many(ss, ren);
      return arith::fo_match(ps, s2, pv, theta);
    };
    if (p->k == DFK::Any || s->k == DFK::Any) return true;
    if (p->k != s->k) return false;
    switch (p->k) {
      case DFK::Nat:
        return fo_side(p->n, s->n);
      case DFK::Equal:
        return fo_side(p->n, s->n) && fo_side(p->m, s->m);
      case DFK::Forall: {
        if (p->ivars.size() != s->ivars.size()) return false;
        for (std::size_t i = 0; i < p->ivars.size(); ++i) {
          pv.erase(p->ivars[i]);
          ren[s->ivars[i]] = arith::fo_var(p->ivars[i]);
        }
        return go(p->ant, s->ant, pv, ren) && go(p->cons, s->cons, pv, ren);
      }
      case DFK::Exists: {
        if (p->ivars.size() != s->ivars.size() || p->comps.size() != s->comps.size())
          return false;
        for (std::size_t i = 0; i < p->ivars.size(); ++i) {
          pv.erase(p->ivars[i]);
          ren[s->ivars[i]] = arith::fo_var(p->ivars[i]);
        }
        for (std::size_t i = 0; i < p->comps.size(); ++i)
          if (!go(p->comps[i], s->comps[i], pv, ren)) return false;
        return true;
      }
      case DFK::Atom:
        return p->atom == s->atom;
      default:
        return true;
    }
  };
  return go(pattern, subject, pvars, {});
}

std::optional<std::vector<std::pair<FoPtr, FoPtr>>> type_diff(const DF& a,
                                                              const DF& b) {
  std::vector<std::pair<FoPtr, FoPtr>> out;
  std::function<bool(const DF&, const DF&, std::map<std::string, FoPtr>)> go =
      [&](const DF& x, const DF& y, std::map<std::string, FoPtr> ren) -> bool {
    auto leaf = [&](const FoPtr& u, const FoPtr& w) {
      FoPtr w2 = arith::fo_subst_many(w, ren);
      if (!arith::fo_equal(u, w2)) out.emplace_back(u, w2);
    };
    if (x->k != y->k) return false;
    switch (x->k) {
      case DFK::Nat:
        leaf(x->n, y->n);
        return true;
      case DFK::Equal:
        leaf(x->n, y->n);
        leaf(x->m, y->m);
        return true;
      case DFK::Forall: {
        if (x->ivars.size() != y->ivars.size()) return false;
        for (std::size_t i = 0; i < x->ivars.size(); ++i)
          ren[y->ivars[i]] = arith::fo_var(x->ivars[i]);
        return go(x->ant, y->ant, ren) && go(x->cons, y->cons, ren);
      }
      case DFK::Exists: {
        if (x->ivars.size() != y->ivars.size() || x->comps.size() != y->comps.size())
          return false;
        for (std::size_t i = 0; i < x->ivars.size(); ++i)
          ren[y->ivars[i]] = arith::fo_var(x->ivars[i]);
        for (std::size_t i = 0; i < x->comps.size(); ++i)
          if (!go(x->comps[i], y->comps[i], ren)) return false;
        return true;
      }
      case DFK::Atom:
        return x->atom == y->atom;
      default:
        return true;
    }
  };
  if (!go(a, b, {})) return std::nullopt;
  return out;
}

namespace {

// Reduce the raw leaf disagreements to one (n, m) rewrite pair.
std::optional<std::pair<FoPtr, FoPtr>> consolidate(
    const std::vector<std::pair<FoPtr, FoPtr>>& pairs) {
  if (pairs.empty()) return std::nullopt;
  // First try descending into the leaves for minimal pairs.
  std::vector<std::pair<FoPtr, FoPtr>> mins;
  std::function<void(const FoPtr&, const FoPtr&)> diff = [&](const FoPtr& u,
                                                             const FoPtr& w) {
    if (arith::fo_equal(u, w)) return;
    if (u->kind == w->kind && u->name == w->name && u->count == w->count &&
        u->args.size() == w->args.size() && u->kind != arith::FoKind::Var) {
      for (std::size_t i = 0; i < u->args.size(); ++i) diff(u->args[i], w->args[i]);
      return;
    }
    mins.emplace_back(u, w);
  };
  for (const auto& [u, w] : pairs) diff(u, w);
  auto all_equal = [](const std::vector<std::pair<FoPtr, FoPtr>>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!arith::fo_equal(v[i].first, v[0].first) ||
          !arith::fo_equal(v[i].second, v[0].second))
        return false;
    return true;
  };
  if (all_equal(mins)) return mins[0];
  if (all_equal(pairs)) return pairs[0];
  return std::nullopt;
}

struct Opened {
  FdEnv env;
  std::vector<std::string> eigens;
};

// Restores ctx.rigid on scope exit.
struct RigidGuard {
  FdCtx& ctx;
  std::vector<std::string> added;
  RigidGuard(FdCtx& c) : ctx(c) {}
  void add(const std::string& n) {
    if (ctx.rigid.insert(n).second) added.push_back(n);
  }
  ~RigidGuard() {
    for (const auto& n : added) ctx.rigid.erase(n);
  }
};

// A binder keeps its source name (annotations in the body refer to it)
// unless the name is already rigid or occurs in the environment.
bool index_clashes(const FdCtx& ctx, const FdEnv& env, const std::string& n) {
  if (ctx.rigid.count(n)) return true;
  for (const auto& [_, ty] : env.vars)
    if (ty && contains_var(ty, n)) return true;
  return false;
}

std::string choose_index(FdCtx& ctx, const FdEnv& env, const std::string& base) {
  return index_clashes(ctx, env, base) ? ctx.fresh_index() : base;
}

FdResult open_pattern_df(FdCtx& ctx, FdEnv env, const Pattern& pat, const DF& ty,
                         Opened& out, RigidGuard& guard, const DF& avoid = nullptr) {
  const FdEnv& env0 = env;
  auto open_binders = [&](const std::vector<std::string>& ivars) {
    std::map<std::string, FoPtr> ren;
    for (const auto& iv : ivars) {
      std::string e = index_clashes(ctx, env0, iv) || (avoid && contains_var(avoid, iv))
                          ? ctx.fresh_index()
                          : iv;
      out.eigens.push_back(e);
      guard.add(e);
      if (e != iv) ren[iv] = arith::fo_var(e);
    }
    return ren;
  };
  switch (pat.k) {
    case Pattern::K::Name: {
      if (ty->k == DFK::Exists && !ty->ivars.empty() && ty->comps.size() == 1) {
        auto ren = open_binders(ty->ivars);
        env.vars.emplace_back(pat.names[0], subst_index_many(ty->comps[0], ren));
      } else {
        env.vars.emplace_back(pat.names[0], ty);
      }
      out.env = std::move(env);
      return {true, nullptr, ""};
    }
    case Pattern::K::Unit: {
      if (ty->k != DFK::Equal && ty->k != DFK::Any)
        return fd_err("LET", "unit pattern against " + types::show(ty));
      out.env = std::move(env);
      return {true, nullptr, ""};
    }
    case Pattern::K::Tuple: {
      if (ty->k == DFK::Any) {
        for (const auto& n : pat.names) env.vars.emplace_back(n, df_any());
        out.env = std::move(env);
        return {true, nullptr, ""};
      }
      if (ty->k != DFK::Exists || ty->comps.size() != pat.names.size())
        return fd_err("LET", "tuple pattern arity against " + types::show(ty));
      auto ren = open_binders(ty->ivars);
      for (std::size_t i = 0; i < pat.names.size(); ++i)
        env.vars.emplace_back(pat.names[i], subst_index_many(ty->comps[i], ren));
      out.env = std::move(env);
      return {true, nullptr, ""};
    }
  }
  return fd_err("LET", "bad pattern");
}

bool escapes(const DF& ty, const std::vector<std::string>& eigens) {
  for (const auto& e : eigens)
    if (contains_var(ty, e)) return true;
  return false;
}

// Shape helpers for the classical constant schemes.
bool callcc_shape(const DF& ty, DF& phi) {
  // ((phi => bot) => phi) => phi
  if (ty->k != DFK::Forall || !ty->ivars.empty()) return false;
  const DF& ant = ty->ant;
  phi = ty->cons;
  if (ant->k != DFK::Forall || !ant->ivars.empty()) return false;
  if (!alpha_eq(ant->cons, phi)) return false;
  const DF& neg = ant->ant;
  return neg->k == DFK::Forall && neg->ivars.empty() &&
         neg->cons->k == DFK::Bottom && alpha_eq(neg->ant, phi);
}

bool throw_shape(const DF& ty) {
  // (not phi /\ phi) => psi
  if (ty->k != DFK::Forall || !ty->ivars.empty()) return false;
  const DF& ant = ty->ant;
  if (ant->k != DFK::Exists || !ant->ivars.empty() || ant->comps.size() != 2)
    return false;
  const DF& neg = ant->comps[0];
  return neg->k == DFK::Forall && neg->ivars.empty() &&
         neg->cons->k == DFK::Bottom && alpha_eq(neg->ant, ant->comps[1]);
}

DF skolemize_forall(FdCtx& ctx, const FdEnv& env, const DF& ty, RigidGuard& guard) {
  std::map<std::string, FoPtr> ren;
  for (const auto& iv : ty->ivars) {
    std::string e = choose_index(ctx, env, iv);
    guard.add(e);
    if (e != iv) ren[iv] = arith::fo_var(e);
  }
  return df_forall({}, subst_index_many(ty->ant, ren),
                   subst_index_many(ty->cons, ren));
}

FdResult fd_subst_node(FdCtx& ctx, const FdEnv& env, const FP& t, DF expected);

}  // namespace

FdResult fd_synth(FdCtx& ctx, const FdEnv& env, const FP& t) {
  switch (t->k) {
    case FK::Var: {
      if (const DF* ty = env.lookup(t->name)) return fd_done(ctx, t, *ty);
      return fd_err("IDENT", "unbound variable " + t->name);
    }
    case FK::Zero:
      return fd_done(ctx, t, df_nat(arith::fo_zero()));
    case FK::Unit:
      return fd_done(ctx, t, df_top());
    case FK::SuccConst:
      return fd_done(ctx, t,
                     df_forall({"x"}, df_nat(arith::fo_var("x")),
                               df_nat(arith::fo_succ(arith::fo_var("x")))));
    case FK::Succ: {
      auto r = fd_synth(ctx, env, t->sub[0]);
      if (!r.ok) return r;
      if (r.type->k == DFK::Any) return fd_done(ctx, t, df_any());
      if (r.type->k != DFK::Nat)
        return fd_err("SUCC", "successor of " + types::show(r.type));
      return fd_done(ctx, t, df_nat(arith::fo_succ(r.type->n, t->count)));
    }
    case FK::Pred: {
      auto r = fd_synth(ctx, env, t->sub[0]);
      if (!r.ok) return r;
      if (r.type->k == DFK::Any) return fd_done(ctx, t, df_any());
      if (r.type->k != DFK::Nat)
        return fd_err("PRED", "predecessor of " + types::show(r.type));
      return fd_done(ctx, t, df_nat(arith::fo_pred(r.type->n)));
    }
    case FK::Tuple: {
      std::vector<DF> comps;
      for (const auto& c : t->sub) {
        auto r = fd_synth(ctx, env, c);
        if (!r.ok) return r;
        comps.push_back(r.type);
      }
      return fd_done(ctx, t, df_exists({}, std::move(comps)));
    }
    case FK::Pack: {
      const DF& decl = t->anno;
      if (!decl || decl->k != DFK::Exists)
        return fd_err("TUPLE", "pack needs a declared existential type");
      if (decl->ivars.size() != t->witnesses.size())
        return fd_err("TUPLE", "witness count mismatch");
      std::map<std::string, FoPtr> inst;
      for (std::size_t i = 0; i < decl->ivars.size(); ++i)
        inst[decl->ivars[i]] = t->witnesses[i];
      std::vector<FP> comps =
          t->sub[0]->k == FK::Tuple ? t->sub[0]->sub : std::vector<FP>{t->sub[0]};
      if (comps.size() != decl->comps.size())
        return fd_err("TUPLE", "component count mismatch");
      for (std::size_t i = 0; i < comps.size(); ++i) {
        auto r = fd_check(ctx, env, comps[i], subst_index_many(decl->comps[i], inst));
        if (!r.ok) return r;
      }
      return fd_done(ctx, t, decl);
    }
    case FK::App: {
      const FP& f = t->sub[0];
      if (f->k == FK::SuccConst) {
        auto a = fd_synth(ctx, env, t->sub[1]);
        if (!a.ok) return a;
        if (a.type->k != DFK::Nat)
          return fd_err("SUCC", "succ of " + types::show(a.type));
        return fd_done(ctx, t, df_nat(arith::fo_succ(a.type->n)));
      }
      if (f->k == FK::Callcc || f->k == FK::Throw)
        return fd_err("CONST", "classical application needs an expected type");
      auto fr = fd_synth(ctx, env, f);
      if (!fr.ok) return fr;
      if (fr.type->k == DFK::Any) return fd_done(ctx, t, df_any());
      if (fr.type->k != DFK::Forall)
        return fd_err("APP", types::show(fr.type) + " is not an implication");
      if (fr.type->ivars.empty()) {
        auto a = fd_check(ctx, env, t->sub[1], fr.type->ant);
        if (!a.ok) return a;
        return fd_done(ctx, t, fr.type->cons);
      }
      auto a = fd_synth(ctx, env, t->sub[1]);
      if (!a.ok)
        return fd_err("APP", "cannot synthesize the operand for instantiation; " +
                                 a.error);
      std::set<std::string> pv(fr.type->ivars.begin(), fr.type->ivars.end());
      std::map<std::string, FoPtr> theta;
      if (!type_match(fr.type->ant, a.type, pv, theta))
        return fd_err("APP", "MatchFailure: cannot instantiate " +
                                 types::show(fr.type) + " at operand " +
                                 types::show(a.type) +
                                 " (an explicit instantiation t{...} may help)");
      for (const auto& iv : fr.type->ivars)
        if (!theta.count(iv))
          return fd_err("APP", "MatchFailure: " + iv +
                                   " unconstrained; use explicit instantiation");
      return fd_done(ctx, t, subst_index_many(fr.type->cons, theta));
    }
    case FK::Inst: {
      auto r = fd_synth(ctx, env, t->sub[0]);
      if (!r.ok) return r;
      if (r.type->k != DFK::Forall || r.type->ivars.size() != t->witnesses.size())
        return fd_err("INST", "instantiation arity mismatch on " + types::show(r.type));
      std::map<std::string, FoPtr> inst;
      for (std::size_t i = 0; i < t->witnesses.size(); ++i)
        inst[r.type->ivars[i]] = t->witnesses[i];
      return fd_done(ctx, t,
                     df_forall({}, subst_index_many(r.type->ant, inst),
                               subst_index_many(r.type->cons, inst)));
    }
    case FK::Lam: {
      if (!t->param)
        return fd_err("ABS", "lambda needs an expected type or a parameter ascription");
      Opened op;
      RigidGuard guard(ctx);
      auto bound = open_pattern_df(ctx, env, t->pat, t->param, op, guard);
      if (!bound.ok) return bound;
      auto b = fd_synth(ctx, op.env, t->sub[0]);
      if (!b.ok) return b;
      if (escapes(b.type, op.eigens))
        return fd_err("ABS", "EigenvariableEscape in result " + types::show(b.type));
      return fd_done(ctx, t, df_forall({}, t->param, b.type));
    }
    case FK::Let: {
      auto u = fd_synth(ctx, env, t->sub[0]);
      if (!u.ok) return u;
      Opened op;
      RigidGuard guard(ctx);
      auto bound = open_pattern_df(ctx, env, t->pat, u.type, op, guard);
      if (!bound.ok) return bound;
      auto b = fd_synth(ctx, op.env, t->sub[1]);
      if (!b.ok) return b;
      if (escapes(b.type, op.eigens))
        return fd_err("LET", "EigenvariableEscape in result " + types::show(b.type));
      return fd_done(ctx, t, b.type);
    }
    case FK::Rec: {
      auto n = fd_synth(ctx, env, t->sub[0]);
      if (!n.ok) return n;
      if (n.type->k != DFK::Nat)
        return fd_err("REC", "recursion on " + types::show(n.type));
      DF motive = t->motive;
      std::string mv = t->motive_var ? *t->motive_var : std::string();
      if (!motive) {
        auto base = fd_synth(ctx, env, t->sub[1]);
        if (!base.ok)
          return fd_err("REC", "motive annotation required: " + base.error);
        motive = base.type;
        mv = ctx.fresh_index();  // vacuous hole
      }
      auto base = fd_check(ctx, env, t->sub[1],
                           subst_index(motive, mv, arith::fo_zero()));
      if (!base.ok) return fd_err("REC", base.error);
      // step: fn x => fn y => body, checked at a rigid index (i not in Gamma)
      RigidGuard guard(ctx);
      std::string ih = choose_index(ctx, env, mv);
      guard.add(ih);
      DF mot_i = subst_index(motive, mv, arith::fo_var(ih));
      DF mot_si = subst_index(motive, mv, arith::fo_succ(arith::fo_var(ih)));
      const FP& step = t->sub[2];
      if (step->k != FK::Lam || step->sub[0]->k != FK::Lam)
        return fd_err("REC", "step must be a double lambda");
      FdEnv env2 = env;
      if (step->pat.k != Pattern::K::Name) return fd_err("REC", "step binder shape");
      env2.vars.emplace_back(step->pat.names[0], df_nat(arith::fo_var(ih)));
      Opened op;
      auto bound = open_pattern_df(ctx, env2, step->sub[0]->pat, mot_i, op, guard);
      if (!bound.ok) return bound;
      auto body = fd_check(ctx, op.env, step->sub[0]->sub[0], mot_si);
      if (!body.ok) return fd_err("REC", body.error);
      return fd_done(ctx, t, subst_index(motive, mv, n.type->n));
    }
    case FK::Subst:
      return fd_subst_node(ctx, env, t, nullptr);
    case FK::Ascribe: {
      if (!t->anno)
        return fd_err("ASCRIBE", "a dependent type annotation is required here");
      auto r = fd_check(ctx, env, t->sub[0], t->anno);
      if (!r.ok) return r;
      return fd_done(ctx, t, t->anno);
    }
    case FK::Callcc:
    case FK::Throw:
      return fd_err("CONST", "classical constant needs an expected type");
  }
  return fd_err("INTERNAL", "unhandled term");
}

namespace {

FdResult fd_subst_node(FdCtx& ctx, const FdEnv& env, const FP& t, DF expected) {
  auto subj = fd_synth(ctx, env, t->sub[0]);
  if (!subj.ok) return subj;
  DF cur = subj.type;
  const arith::EqSystem& E = *ctx.E;

  if (t->subst_hole) {  // hole form [i. tau]
    const std::string& hole = *t->subst_hole;
    if (!t->anno) return fd_err("SUBST", "missing pattern annotation");
    std::map<std::string, FoPtr> theta;
    if (!type_match(t->anno, cur, {hole}, theta))
      return fd_err("SUBST", "current type " + types::show(cur) +
                                 " does not match pattern " + types::show(t->anno));
    if (!theta.count(hole))
      return fd_err("SUBST", "hole variable does not occur in the pattern");
    FoPtr n = theta[hole];
    FoPtr m;
    if (t->subst_label) {
      const arith::Equation* eq = E.find(*t->subst_label);
      if (!eq) return fd_err("SUBST", "unknown equation (" + *t->subst_label + ")");
      auto orient = [&](const FoPtr& from, const FoPtr& to) -> FoPtr {
        std::set<std::string> pv = arith::fo_vars(from);
        auto tv = arith::fo_vars(to);
        for (const auto& v : tv)
          if (!pv.count(v)) return nullptr;  // target underdetermined
        std::map<std::string, FoPtr> th;
        if (!arith::fo_match(from, n, pv, th)) return nullptr;
        return arith::fo_subst_many(to, th);
      };
      m = orient(eq->lhs, eq->rhs);
      if (!m) m = orient(eq->rhs, eq->lhs);
      if (!m)
        return fd_err("SUBST", "equation (" + *t->subst_label +
                                   ") does not apply to " + arith::fo_show(n));
    } else if (t->sub.size() > 1) {
      auto ev = fd_synth(ctx, env, t->sub[1]);
      if (!ev.ok) return ev;
      if (ev.type->k != DFK::Equal)
        return fd_err("SUBST", "evidence is not an equation: " + types::show(ev.type));
      if (arith::fo_equal(ev.type->n, n))
        m = ev.type->m;
      else if (arith::fo_equal(ev.type->m, n))
        m = ev.type->n;
      else
        return fd_err("SUBST", "evidence " + types::show(ev.type) +
                                   " does not mention " + arith::fo_show(n));
    } else {
      return fd_err("SUBST", "hole form needs an equation label or evidence");
    }
    return fd_done(ctx, t, subst_index(t->anno, hole, m));
  }

  // target form: [tau] or bare (target = expected)
  DF target = t->anno ? t->anno : expected;
  if (!target) return fd_err("SUBST", "no target type available");
  auto diffs = type_diff(cur, target);
  if (!diffs)
    return fd_err("SUBST", "type mismatch: " + types::show(cur) + " vs " +
                               types::show(target));
  if (diffs->empty()) return fd_done(ctx, t, target);
  auto pair = consolidate(*diffs);
  if (!pair)
    return fd_err("SUBST", "inconsistent rewrite positions between " +
                               types::show(cur) + " and " + types::show(target));
  auto mi = arith::fo_match_instance(E, pair->first, pair->second);
  if (!mi.ok)
    return fd_err("SUBST", arith::fo_show(pair->first) + " = " +
                               arith::fo_show(pair->second) +
                               " is not an instance of E");
  return fd_done(ctx, t, target);
}

}  // namespace

FdResult fd_check(FdCtx& ctx, const FdEnv& env, const FP& t, const DF& expected) {
  if (expected->k == DFK::Any) {
    auto r = fd_synth(ctx, env, t);
    if (r.ok) return r;
    return fd_done(ctx, t, df_any());  // dead code after a jump
  }
  switch (t->k) {
    case FK::Lam: {
      if (expected->k != DFK::Forall)
        return fd_err("ABS", "expected " + types::show(expected) + ", found a lambda");
      RigidGuard guard(ctx);
      DF skolemized = expected->ivars.empty()
                          ? expected
                          : skolemize_forall(ctx, env, expected, guard);
      if (t->param && !alpha_eq(t->param, skolemized->ant))
        return fd_err("ABS", "parameter ascription mismatch: " +
                                 types::show(t->param) + " vs " +
                                 types::show(skolemized->ant));
      Opened op;
      auto bound = open_pattern_df(ctx, env, t->pat, skolemized->ant, op, guard);
      if (!bound.ok) return bound;
      auto b = fd_check(ctx, op.env, t->sub[0], skolemized->cons);
      if (!b.ok) return b;
      return fd_done(ctx, t, expected);
    }
    case FK::Unit: {
      if (expected->k == DFK::Equal) {
        auto mi = arith::fo_match_instance(*ctx.E, expected->n, expected->m);
        if (!mi.ok)
          return fd_err("EQUAL", types::show(expected) + " is not an instance of E");
        return fd_done(ctx, t, expected);
      }
      return fd_err("EQUAL", "expected " + types::show(expected) + ", found ()");
    }
    case FK::Tuple: {
      if (expected->k != DFK::Exists)
        return fd_err("TUPLE", "expected " + types::show(expected) + ", found a tuple");
      if (expected->comps.size() != t->sub.size())
        return fd_err("TUPLE", "arity mismatch against " + types::show(expected));
      if (expected->ivars.empty()) {
        for (std::size_t i = 0; i < t->sub.size(); ++i) {
          auto r = fd_check(ctx, env, t->sub[i], expected->comps[i]);
          if (!r.ok) return r;
        }
        return fd_done(ctx, t, expected);
      }
      // infer witnesses by matching the synthesized component types
      std::vector<DF> synths;
      for (const auto& c : t->sub) {
        auto r = fd_synth(ctx, env, c);
        if (!r.ok)
          return fd_err("TUPLE", "cannot infer witnesses; use pack: " + r.error);
        synths.push_back(r.type);
      }
      std::set<std::string> pv(expected->ivars.begin(), expected->ivars.end());
      std::map<std::string, FoPtr> theta;
      for (std::size_t i = 0; i < synths.size(); ++i)
        if (!type_match(expected->comps[i], synths[i], pv, theta))
          return fd_err("TUPLE", "cannot infer witnesses; use pack");
      for (const auto& iv : expected->ivars)
        if (!theta.count(iv))
          return fd_err("TUPLE", "witness " + iv + " unconstrained; use pack");
      for (std::size_t i = 0; i < t->sub.size(); ++i) {
        auto r = fd_check(ctx, env, t->sub[i],
                          subst_index_many(expected->comps[i], theta));
        if (!r.ok) return r;
      }
      return fd_done(ctx, t, expected);
    }
    case FK::Let: {
      auto u = fd_synth(ctx, env, t->sub[0]);
      if (!u.ok) return u;
      Opened op;
      RigidGuard guard(ctx);
      auto bound = open_pattern_df(ctx, env, t->pat, u.type, op, guard, expected);
      if (!bound.ok) return bound;
      if (escapes(expected, op.eigens))
        return fd_err("LET", "EigenvariableEscape into the expected type");
      auto b = fd_check(ctx, op.env, t->sub[1], expected);
      if (!b.ok) return b;
      return fd_done(ctx, t, expected);
    }
    case FK::Rec: {
      if (!t->motive) {
        // constant motive taken from the expected type
        FP annotated = f_rec(t->sub[0], t->sub[1], t->sub[2],
                             std::string("$unused"), expected);
        auto r = fd_synth(ctx, env, annotated);
        if (!r.ok) return r;
        if (!alpha_eq(r.type, expected))
          return fd_err("REC", "expected " + types::show(expected) + ", derived " +
                                   types::show(r.type));
        return fd_done(ctx, t, expected);
      }
      auto r = fd_synth(ctx, env, t);
      if (!r.ok) return r;
      if (!alpha_eq(r.type, expected))
        return fd_err("REC", "expected " + types::show(expected) + ", derived " +
                                 types::show(r.type));
      return fd_done(ctx, t, expected);
    }
    case FK::Subst: {
      auto r = fd_subst_node(ctx, env, t, expected);
      if (!r.ok) return r;
      if (!compat(r.type, expected))
        return fd_err("SUBST", "expected " + types::show(expected) + ", derived " +
                                   types::show(r.type));
      return fd_done(ctx, t, expected);
    }
    case FK::App: {
      const FP& f = t->sub[0];
      if (f->k == FK::Callcc) {
        if (!ctx.classical) return fd_err("CONST", "callcc outside FD^c");
        DF phi = expected;
        DF handler_ty = df_forall({}, df_not(phi), phi);
        auto h = fd_check(ctx, env, t->sub[1], handler_ty);
        if (!h.ok) return h;
        return fd_done(ctx, t, expected);
      }
      if (f->k == FK::Throw) {
        if (!ctx.classical) return fd_err("CONST", "throw outside FD^c");
        // argument: (k, a) with k : not phi and a : phi
        const FP& arg = t->sub[1];
        if (arg->k == FK::Tuple && arg->sub.size() == 2) {
          auto k = fd_synth(ctx, env, arg->sub[0]);
          if (!k.ok) return k;
          const DF& kt = k.type;
          if (kt->k != DFK::Forall || !kt->ivars.empty() || kt->cons->k != DFK::Bottom)
            return fd_err("THROW", "first component is not a negation: " +
                                       types::show(kt));
          auto a = fd_check(ctx, env, arg->sub[1], kt->ant);
          if (!a.ok) return a;
          return fd_done(ctx, t, expected);
        }
        auto s = fd_synth(ctx, env, arg);
        if (!s.ok) return s;
        if (!throw_shape(df_forall({}, s.type, expected)))
          return fd_err("THROW", "argument is not (not phi /\\ phi): " +
                                     types::show(s.type));
        return fd_done(ctx, t, expected);
      }
      // general application: synthesize, fall back to expected-side matching
      auto r = fd_synth(ctx, env, t);
      if (r.ok) {
        if (!compat(r.type, expected))
          return fd_err("APP", "expected " + types::show(expected) + ", derived " +
                                   types::show(r.type));
        return fd_done(ctx, t, expected);
      }
      auto fr = fd_synth(ctx, env, f);
      if (!fr.ok) return r;
      if (fr.type->k != DFK::Forall) return r;
      std::set<std::string> pv(fr.type->ivars.begin(), fr.type->ivars.end());
      std::map<std::string, FoPtr> theta;
      if (!type_match(fr.type->cons, expected, pv, theta)) return r;
      bool total = true;
      for (const auto& iv : fr.type->ivars) total = total && theta.count(iv);
      if (!total) return r;
      auto a = fd_check(ctx, env, t->sub[1],
                        subst_index_many(fr.type->ant, theta));
      if (!a.ok) return a;
      return fd_done(ctx, t, expected);
    }
    case FK::Callcc: {
      if (!ctx.classical) return fd_err("CONST", "callcc outside FD^c");
      DF phi;
      if (!callcc_shape(expected, phi))
        return fd_err("CONST", "callcc cannot have type " + types::show(expected));
      return fd_done(ctx, t, expected);
    }
    case FK::Throw: {
      if (!ctx.classical) return fd_err("CONST", "throw outside FD^c");
      if (!throw_shape(expected))
        return fd_err("CONST", "throw cannot have type " + types::show(expected));
      return fd_done(ctx, t, expected);
    }
    case FK::Inst:
    case FK::Pack:
    case FK::Ascribe:
    default: {
      auto r = fd_synth(ctx, env, t);
      if (!r.ok) return r;
      if (!compat(r.type, expected))
        return fd_err("CONV", "expected " + types::show(expected) + ", found " +
                                  types::show(r.type));
      return fd_done(ctx, t, expected);
    }
  }
}

FdResult f_check_dep(const arith::EqSystem& E, const FdEnv& env, const FP& t,
                     const DF& expected, bool classical) {
  FdCtx ctx;
  ctx.E = &E;
  ctx.classical = classical;
  return fd_check(ctx, env, t, expected);
}

}  // namespace loopf::flang
