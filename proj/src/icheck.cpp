#include "loopf/icheck.hpp"

#include <algorithm>
#include <functional>

namespace loopf::ilang {

using namespace loopf::types;
using arith::FoPtr;

// ------------------------------------------------ DI matching and diffing

bool di_type_match(const DI& pattern, const DI& subject,
                   const std::set<std::string>& pvars,
                   std::map<std::string, FoPtr>& theta) {
  std::function<bool(const DI&, const DI&, std::set<std::string>,
                     std::map<std::string, FoPtr>)>
      go = [&](const DI& p, const DI& s, std::set<std::string> pv,
               std::map<std::string, FoPtr> ren) -> bool {
    auto fo_side = [&](const FoPtr& ps, const FoPtr& ss) {
      return arith::fo_match(ps, arith::fo_subst_many(ss, ren), pv, theta);
    };
    if (p->k == DIK::Any || s->k == DIK::Any) return true;
    if (p->k != s->k) return false;
    switch (p->k) {
      case DIK::Nat:
        return fo_side(p->n, s->n);
      case DIK::Equal:
        return fo_side(p->n, s->n) && fo_side(p->m, s->m);
      case DIK::Proc: {
        if (p->ivars.size() != s->ivars.size() || p->ins.size() != s->ins.size() ||
            p->outs.size() != s->outs.size())
          return false;
        for (std::size_t i = 0; i < p->ivars.size(); ++i) {
          pv.erase(p->ivars[i]);
          ren[s->ivars[i]] = arith::fo_var(p->ivars[i]);
        }
        for (std::size_t i = 0; i < p->ins.size(); ++i)
          if (!go(p->ins[i], s->ins[i], pv, ren)) return false;
        for (std::size_t i = 0; i < p->outs.size(); ++i)
          if (!go(p->outs[i], s->outs[i], pv, ren)) return false;
        return true;
      }
      case DIK::Exists: {
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
      case DIK::Atom:
        return p->atom == s->atom;
      default:
        return true;
    }
  };
  return go(pattern, subject, pvars, {});
}

std::optional<std::vector<std::pair<FoPtr, FoPtr>>> di_type_diff(const DI& a,
                                                                 const DI& b) {
  std::vector<std::pair<FoPtr, FoPtr>> out;
  std::function<bool(const DI&, const DI&, std::map<std::string, FoPtr>)> go =
      [&](const DI& x, const DI& y, std::map<std::string, FoPtr> ren) -> bool {
    auto leaf = [&](const FoPtr& u, const FoPtr& w) {
      FoPtr w2 = arith::fo_subst_many(w, ren);
      if (!arith::fo_equal(u, w2)) out.emplace_back(u, w2);
    };
    if (x->k != y->k) return false;
    switch (x->k) {
      case DIK::Nat:
        leaf(x->n, y->n);
        return true;
      case DIK::Equal:
        leaf(x->n, y->n);
        leaf(x->m, y->m);
        return true;
      case DIK::Proc: {
        if (x->ivars.size() != y->ivars.size() || x->ins.size() != y->ins.size() ||
            x->outs.size() != y->outs.size())
          return false;
        for (std::size_t i = 0; i < x->ivars.size(); ++i)
          ren[y->ivars[i]] = arith::fo_var(x->ivars[i]);
        for (std::size_t i = 0; i < x->ins.size(); ++i)
          if (!go(x->ins[i], y->ins[i], ren)) return false;
        for (std::size_t i = 0; i < x->outs.size(); ++i)
          if (!go(x->outs[i], y->outs[i], ren)) return false;
        return true;
      }
      case DIK::Exists: {
        if (x->ivars.size() != y->ivars.size() || x->comps.size() != y->comps.size())
          return false;
        for (std::size_t i = 0; i < x->ivars.size(); ++i)
          ren[y->ivars[i]] = arith::fo_var(x->ivars[i]);
        for (std::size_t i = 0; i < x->comps.size(); ++i)
          if (!go(x->comps[i], y->comps[i], ren)) return false;
        return true;
      }
      case DIK::Atom:
        return x->atom == y->atom;
      default:
        return true;
    }
  };
  if (!go(a, b, {})) return std::nullopt;
  return out;
}

namespace {

std::optional<std::pair<FoPtr, FoPtr>> consolidate_pairs(
    const std::vector<std::pair<FoPtr, FoPtr>>& pairs) {
  if (pairs.empty()) return std::nullopt;
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

// atom matching for scheme instantiation: atoms in the pattern bind to types
bool di_atom_match(const DI& pattern, const DI& subject,
                   const std::set<std::string>& atoms,
                   std::map<std::string, DI>& theta) {
  if (pattern->k == DIK::Atom && atoms.count(pattern->atom)) {
    auto it = theta.find(pattern->atom);
    if (it != theta.end()) return compat(it->second, subject);
    theta.emplace(pattern->atom, subject);
    return true;
  }
  if (subject->k == DIK::Any) return true;
  if (pattern->k != subject->k) return false;
  switch (pattern->k) {
    case DIK::Nat:
      return arith::fo_equal(pattern->n, subject->n);
    case DIK::Equal:
      return arith::fo_equal(pattern->n, subject->n) &&
             arith::fo_equal(pattern->m, subject->m);
    case DIK::Proc: {
      if (pattern->ivars.size() != subject->ivars.size() ||
          pattern->ins.size() != subject->ins.size() ||
          pattern->outs.size() != subject->outs.size())
        return false;
      for (std::size_t i = 0; i < pattern->ins.size(); ++i)
        if (!di_atom_match(pattern->ins[i], subject->ins[i], atoms, theta))
          return false;
      for (std::size_t i = 0; i < pattern->outs.size(); ++i)
        if (!di_atom_match(pattern->outs[i], subject->outs[i], atoms, theta))
          return false;
      return true;
    }
    case DIK::Exists: {
      if (pattern->ivars.size() != subject->ivars.size() ||
          pattern->comps.size() != subject->comps.size())
        return false;
      for (std::size_t i = 0; i < pattern->comps.size(); ++i)
        if (!di_atom_match(pattern->comps[i], subject->comps[i], atoms, theta))
          return false;
      return true;
    }
    case DIK::Atom:
      return pattern->atom == subject->atom;
    default:
      return true;
  }
}

// ------------------------------------------------------------- ID checker

struct IdError {
  std::string msg;
};

[[noreturn]] void fail(const std::string& rule, const std::string& msg) {
  throw IdError{"TypeError(" + rule + "): " + msg};
}

struct LabelState {
  std::vector<std::vector<DI>> candidates;
};

struct IdCtx {
  const arith::EqSystem* E;
  bool classical = false;
  long eigen = 0;
  std::set<std::string> rigid;
  std::vector<LabelState> labels;

  std::string fresh_index() { return "$e" + std::to_string(++eigen); }
};

bool env_mentions(const IdEnv& env, const OutEnv& om, const std::string& v) {
  for (const auto& [_, b] : env.vars)
    if (b.type && contains_var(b.type, v)) return true;
  for (const auto& [_, ty] : om.items)
    if (ty && contains_var(ty, v)) return true;
  return false;
}

std::string choose_index_i(IdCtx& ctx, const IdEnv& env, const OutEnv& om,
                           const std::string& base) {
  if (ctx.rigid.count(base) || env_mentions(env, om, base)) return ctx.fresh_index();
  return base;
}

struct IRigidGuard {
  IdCtx& ctx;
  std::vector<std::string> added;
  explicit IRigidGuard(IdCtx& c) : ctx(c) {}
  void add(const std::string& n) {
    if (ctx.rigid.insert(n).second) added.push_back(n);
  }
  ~IRigidGuard() {
    for (const auto& n : added) ctx.rigid.erase(n);
  }
};

DI id_expr(IdCtx& ctx, const IdEnv& env, const OutEnv& om, const EP& e);
void id_check_expr(IdCtx& ctx, const IdEnv& env, const OutEnv& om, const EP& e,
                   const DI& expected);
OutEnv id_seq(IdCtx& ctx, const IdEnv& env, OutEnv om, const SP& s,
              std::vector<std::string>& eigens);

DI merge_any(const DI& a, const DI& b, const char* rule) {
  if (a->k == DIK::Any) return b;
  if (b->k == DIK::Any) return a;
  if (!compat(a, b))
    fail(rule, "conflicting types " + types::show(a) + " vs " + types::show(b));
  return a;
}

// checks a proc literal against a full proc type (binds parameters from it)
void id_check_proc(IdCtx& ctx, const IdEnv& env, const EP& p, const DI& ty) {
  if (p->k != EK::Proc || ty->k != DIK::Proc)
    fail("T.PROC", "expected a procedure of type " + types::show(ty));
  if (p->ins.size() != ty->ins.size() || p->outs.size() != ty->outs.size())
    fail("T.PROC", "parameter arity differs from " + types::show(ty));
  if (!p->ivars.empty() && p->ivars != ty->ivars)
    fail("T.PROC", "declared index variables differ from " + types::show(ty));
  IRigidGuard guard(ctx);
  std::map<std::string, FoPtr> ren;
  std::vector<DI> ins = ty->ins, outs = ty->outs;
  for (const auto& iv : ty->ivars) {
    std::string e = ctx.rigid.count(iv) ? ctx.fresh_index() : iv;
    guard.add(e);
    if (e != iv) ren[iv] = arith::fo_var(e);
  }
  if (!ren.empty()) {
    for (auto& t : ins) t = subst_index_many(t, ren);
    for (auto& t : outs) t = subst_index_many(t, ren);
  }
  IdEnv env2 = env;
  for (std::size_t i = 0; i < p->ins.size(); ++i) {
    if (i < p->in_types.size() && p->in_types[i] && !compat(p->in_types[i], ins[i]))
      fail("T.PROC", "parameter annotation " + types::show(p->in_types[i]) +
                         " conflicts with " + types::show(ins[i]));
    env2.bind(p->ins[i], ins[i]);
  }
  OutEnv body_env;
  for (const auto& z : p->outs) body_env.extend(z, di_top());
  std::vector<std::string> eigens;
  OutEnv fin = id_seq(ctx, env2, std::move(body_env), p->body, eigens);
  for (std::size_t i = 0; i < p->outs.size(); ++i) {
    const DI* got = fin.lookup(p->outs[i]);
    if (!got) fail("T.PROC", "out parameter " + p->outs[i] + " lost");
    if (!compat(*got, outs[i]))
      fail("T.PROC", "out " + p->outs[i] + " ends at " + types::show(*got) +
                         ", declared " + types::show(outs[i]) +
                         " (a subst hint may be needed)");
  }
}

// synthesizes a proc literal's type from its own annotations
DI id_synth_proc(IdCtx& ctx, const IdEnv& env, const EP& p) {
  if (p->in_types.size() != p->ins.size())
    fail("T.PROC", "procedure parameters need type annotations for synthesis");
  for (const auto& t : p->in_types)
    if (!t) fail("T.PROC", "procedure parameters need type annotations");
  IRigidGuard guard(ctx);
  for (const auto& iv : p->ivars) {
    if (ctx.rigid.count(iv))
      fail("T.PROC", "index variable " + iv + " shadows an enclosing one");
    guard.add(iv);
  }
  IdEnv env2 = env;
  for (std::size_t i = 0; i < p->ins.size(); ++i) env2.bind(p->ins[i], p->in_types[i]);
  OutEnv body_env;
  for (const auto& z : p->outs) body_env.extend(z, di_top());
  std::vector<std::string> eigens;
  OutEnv fin = id_seq(ctx, env2, std::move(body_env), p->body, eigens);
  std::vector<DI> outs;
  for (std::size_t i = 0; i < p->outs.size(); ++i) {
    const DI* got = fin.lookup(p->outs[i]);
    if (!got) fail("T.PROC", "out parameter " + p->outs[i] + " lost");
    DI want = i < p->out_types.size() && p->out_types[i] ? p->out_types[i] : nullptr;
    if (want) {
      if (!compat(*got, want))
        fail("T.PROC", "out " + p->outs[i] + " ends at " + types::show(*got) +
                           ", declared " + types::show(want) +
                           " (a subst hint may be needed)");
      outs.push_back(want);
    } else {
      for (const auto& e : eigens)
        if (contains_var(*got, e))
          fail("T.PROC", "EigenvariableEscape in out " + p->outs[i]);
      outs.push_back(*got);
    }
  }
  return di_proc(p->ivars, p->in_types, std::move(outs));
}

DI id_expr(IdCtx& ctx, const IdEnv& env, const OutEnv& om, const EP& e) {
  switch (e->k) {
    case EK::Var: {
      // innermost read-only binding wins, then the mutable environment
      if (const auto* b = env.lookup(e->name)) {
        if (!b->atoms.empty())
          fail("T.ENV", e->name + " is a type scheme; call it with instantiation");
        if (b->pending_label >= 0)
          fail("T.ENV", "label " + e->name +
                            " used as a value; annotate the label with its type");
        return b->type;
      }
      if (const DI* t = om.lookup(e->name)) return *t;
      fail("T.ENV", "unbound variable " + e->name);
    }
    case EK::Star:
      return di_top();
    case EK::Num:
      return di_nat(arith::fo_num(e->num));
    case EK::Tuple: {
      std::vector<DI> comps;
      for (const auto& c : e->comps) comps.push_back(id_expr(ctx, env, om, c));
      return di_exists({}, std::move(comps));
    }
    case EK::Proc:
      return id_synth_proc(ctx, env, e);
    case EK::CallccConst:
    case EK::ThrowConst:
      fail("T.ENV", "callcc/throw are schematic primitives; use them in calls");
  }
  fail("INTERNAL", "unhandled expression");
}

void id_check_expr(IdCtx& ctx, const IdEnv& env, const OutEnv& om, const EP& e,
                   const DI& expected) {
  if (expected->k == DIK::Any) return;
  switch (e->k) {
    case EK::Proc:
      id_check_proc(ctx, env, e, expected);
      return;
    case EK::Star: {
      if (expected->k != DIK::Equal)
        fail("T.EQUAL", "expected " + types::show(expected) + ", found *");
      if (!arith::fo_match_instance(*ctx.E, expected->n, expected->m).ok)
        fail("T.EQUAL", types::show(expected) + " is not an instance of E");
      return;
    }
    case EK::Tuple: {
      if (expected->k != DIK::Exists || expected->comps.size() != e->comps.size())
        break;  // fall through to synthesis
      if (expected->ivars.empty()) {
        for (std::size_t i = 0; i < e->comps.size(); ++i)
          id_check_expr(ctx, env, om, e->comps[i], expected->comps[i]);
        return;
      }
      std::vector<DI> synths;
      for (const auto& c : e->comps) synths.push_back(id_expr(ctx, env, om, c));
      std::set<std::string> pv(expected->ivars.begin(), expected->ivars.end());
      std::map<std::string, FoPtr> theta;
      for (std::size_t i = 0; i < synths.size(); ++i)
        if (!di_type_match(expected->comps[i], synths[i], pv, theta))
          fail("T.TUPLE", "cannot infer witnesses for " + types::show(expected));
      for (const auto& iv : expected->ivars)
        if (!theta.count(iv))
          fail("T.TUPLE", "witness " + iv + " unconstrained in " +
                              types::show(expected));
      return;
    }
    default:
      break;
  }
  DI got = id_expr(ctx, env, om, e);
  if (!compat(got, expected))
    fail("T.ENV", "expected " + types::show(expected) + ", found " + types::show(got));
}

// resolve a call's instantiated proc type and check the arguments
struct ResolvedCall {
  std::vector<DI> outs;
};

ResolvedCall id_check_call_at(IdCtx& ctx, const IdEnv& env, const OutEnv& om,
                              const DI& proc_ty, const Command& c) {
  if (proc_ty->k != DIK::Proc)
    fail("T.CALL", "calling a value of type " + types::show(proc_ty));
  if (proc_ty->ins.size() != c.args.size())
    fail("T.CALL", "argument count mismatch for " + types::show(proc_ty));
  if (proc_ty->outs.size() != c.call_outs.size())
    fail("T.CALL", "out target count mismatch for " + types::show(proc_ty));
  std::set<std::string> pv(proc_ty->ivars.begin(), proc_ty->ivars.end());
  std::map<std::string, FoPtr> theta;
  std::vector<std::optional<DI>> synths(c.args.size());
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    try {
      synths[i] = id_expr(ctx, env, om, c.args[i]);
    } catch (const IdError&) {
      synths[i] = std::nullopt;  // checked against the instantiated type below
    }
    if (synths[i] && !di_type_match(proc_ty->ins[i], *synths[i], pv, theta))
      fail("T.CALL", "MatchFailure: argument " + std::to_string(i + 1) + " has type " +
                         types::show(*synths[i]) + ", expected an instance of " +
                         types::show(proc_ty->ins[i]));
  }
  for (const auto& iv : proc_ty->ivars)
    if (!theta.count(iv))
      fail("T.CALL", "MatchFailure: index " + iv + " unconstrained in call");
  for (std::size_t i = 0; i < c.args.size(); ++i)
    if (!synths[i])
      id_check_expr(ctx, env, om, c.args[i],
                    subst_index_many(proc_ty->ins[i], theta));
  ResolvedCall out;
  for (const auto& t : proc_ty->outs) out.outs.push_back(subst_index_many(t, theta));
  return out;
}

// the callcc handler: runs the derived label rule, inferring the label type
// from throw sites when the parameter is unannotated
std::vector<DI> id_check_callcc(IdCtx& ctx, const IdEnv& env, const OutEnv& om,
                                const Command& c) {
  if (!ctx.classical) fail("T.CALL", "callcc outside ID^c");
  if (c.args.size() != 1 || c.args[0]->k != EK::Proc)
    fail("T.CALL", "callcc expects one literal handler procedure");
  const EP& h = c.args[0];
  if (h->ins.size() != 1) fail("T.CALL", "callcc handler takes one continuation");
  if (h->outs.size() != c.call_outs.size())
    fail("T.CALL", "callcc handler out arity mismatch");

  DI kty = h->in_types.empty() ? nullptr : h->in_types[0];
  if (kty) {
    // annotated label: k : proc forall u (in sigma; out bot)
    if (kty->k != DIK::Proc) fail("T.CALL", "label annotation must be a proc type");
    for (const auto& o : kty->outs)
      if (o->k != DIK::Bottom)
        fail("T.CALL", "label annotation must have out bot");
    IdEnv env2 = env;
    env2.bind(h->ins[0], kty);
    OutEnv body_env;
    for (const auto& z : h->outs) body_env.extend(z, di_top());
    std::vector<std::string> eigens;
    OutEnv fin = id_seq(ctx, env2, std::move(body_env), h->body, eigens);
    // resume types: the annotation's binders become rigid indices; a binder
    // naming an enclosing rigid index resumes at that instance
    std::map<std::string, FoPtr> ren;
    IRigidGuard guard(ctx);
    for (const auto& iv : kty->ivars) {
      if (ctx.rigid.count(iv)) continue;  // intentional reference
      std::string fresh = env_mentions(env, om, iv) ? ctx.fresh_index() : iv;
      guard.add(fresh);
      if (fresh != iv) ren[iv] = arith::fo_var(fresh);
    }
    std::vector<DI> sigma;
    for (const auto& t : kty->ins) sigma.push_back(subst_index_many(t, ren));
    for (std::size_t i = 0; i < h->outs.size(); ++i) {
      const DI* got = fin.lookup(h->outs[i]);
      if (got && !compat(*got, sigma[i]))
        fail("T.CALL", "label fall-through at " + types::show(*got) +
                           " conflicts with " + types::show(sigma[i]));
    }
    return sigma;
  }

  // unannotated: collect throw-site candidates
  int id = static_cast<int>(ctx.labels.size());
  ctx.labels.push_back({});
  IdEnv env2 = env;
  env2.vars.push_back({h->ins[0], {nullptr, {}, id}});
  OutEnv body_env;
  for (const auto& z : h->outs) body_env.extend(z, di_top());
  std::vector<std::string> eigens;
  OutEnv fin = id_seq(ctx, env2, std::move(body_env), h->body, eigens);
  std::vector<DI> fall;
  bool all_any = true;
  for (const auto& z : h->outs) {
    const DI* got = fin.lookup(z);
    fall.push_back(got ? *got : di_any());
    if (got && (*got)->k != DIK::Any) all_any = false;
  }
  auto& cands = ctx.labels[id].candidates;
  if (!all_any) cands.push_back(fall);
  if (cands.empty())
    fail("T.CALL", "cannot infer the label type of " + h->ins[0] +
                       "; annotate the label");
  std::vector<DI> sigma = cands[0];
  for (std::size_t k = 1; k < cands.size(); ++k) {
    if (cands[k].size() != sigma.size())
      fail("T.CALL", "jump arity mismatch for label " + h->ins[0]);
    for (std::size_t i = 0; i < sigma.size(); ++i)
      sigma[i] = merge_any(sigma[i], cands[k][i], "T.CALL");
  }
  for (const auto& t : sigma)
    if (t->k == DIK::Any)
      fail("T.CALL", "label type of " + h->ins[0] + " is undetermined");
  return sigma;
}

OutEnv id_seq(IdCtx& ctx, const IdEnv& env, OutEnv om, const SP& s,
              std::vector<std::string>& eigens) {
  switch (s->k) {
    case SK::Empty:
      return om;
    case SK::Cst: {
      if (env.lookup(s->name) || om.lookup(s->name))
        fail("T.CST", s->name + " shadows an existing binding");
      IdEnv env2 = env;
      if (!s->scheme_atoms.empty()) {
        if (!s->decl_type) fail("T.CST", "scheme binding needs a declared type");
        // check the body once with the atoms opaque
        id_check_expr(ctx, env, om, s->init, s->decl_type);
        env2.vars.push_back({s->name, {s->decl_type, s->scheme_atoms, -1}});
      } else if (s->decl_type) {
        id_check_expr(ctx, env, om, s->init, s->decl_type);
        env2.bind(s->name, s->decl_type);
      } else {
        env2.bind(s->name, id_expr(ctx, env, om, s->init));
      }
      return id_seq(ctx, env2, std::move(om), s->rest, eigens);
    }
    case SK::Var: {
      if (env.lookup(s->name) || om.lookup(s->name))
        fail("T.VAR", s->name + " shadows an existing binding");
      DI ty = id_expr(ctx, env, om, s->init);
      om.extend(s->name, ty);
      OutEnv fin = id_seq(ctx, env, std::move(om), s->rest, eigens);
      fin.remove(s->name);  // y not in Omega'
      return fin;
    }
    case SK::Cmd:
      break;
  }
  const Command& c = *s->cmd;
  switch (c.k) {
    case CK::Block: {
      OutEnv inner;
      for (const auto& x : c.annot) {
        const DI* t = om.lookup(x);
        if (!t) fail("T.BLOCK", "annotation names unbound mutable " + x);
        inner.extend(x, *t);
      }
      std::vector<std::string> scope_eigens;
      OutEnv fin = id_seq(ctx, env, std::move(inner), c.body, scope_eigens);
      for (const auto& x : c.annot) {
        const DI* t = fin.lookup(x);
        if (!t) fail("T.BLOCK", "mutable " + x + " lost in block");
        for (const auto& ev : scope_eigens)
          if (contains_var(*t, ev))
            fail("T.ASSIGN", "EigenvariableEscape from block via " + x);
        om.update(x, *t);
      }
      break;
    }
    case CK::For: {
      DI bty = id_expr(ctx, env, om, c.bound);
      if (bty->k != DIK::Nat && bty->k != DIK::Any)
        fail("T.FOR", "loop bound has type " + types::show(bty));
      FoPtr bound_index = bty->k == DIK::Nat ? bty->n : arith::fo_var("$any");
      // invariant: annotated variables follow sigma(i); the rest stay fixed
      std::map<std::string, DI> inv;
      for (const auto& [x, t] : c.invariant) inv[x] = t;
      IRigidGuard guard(ctx);
      std::string iv = c.inv_var ? choose_index_i(ctx, env, om, *c.inv_var)
                                 : ctx.fresh_index();
      guard.add(iv);
      std::map<std::string, FoPtr> ren;
      if (c.inv_var && iv != *c.inv_var) ren[*c.inv_var] = arith::fo_var(iv);
      OutEnv inner;
      std::vector<DI> at_entry, at_i, at_si, at_n;
      for (const auto& x : c.annot) {
        const DI* cur = om.lookup(x);
        if (!cur) fail("T.FOR", "annotation names unbound mutable " + x);
        auto it = inv.find(x);
        if (it != inv.end()) {
          DI sigma = ren.empty() ? it->second : subst_index_many(it->second, ren);
          DI s0 = subst_index(sigma, iv, arith::fo_zero());
          if (!compat(*cur, s0))
            fail("T.FOR", x + " enters the loop at " + types::show(*cur) +
                              ", invariant needs " + types::show(s0) +
                              " (a subst hint may be needed)");
          at_i.push_back(subst_index(sigma, iv, arith::fo_var(iv)));
          at_si.push_back(subst_index(sigma, iv, arith::fo_succ(arith::fo_var(iv))));
          at_n.push_back(subst_index(sigma, iv, bound_index));
        } else {
          at_i.push_back(*cur);
          at_si.push_back(*cur);
          at_n.push_back(*cur);
        }
        at_entry.push_back(*cur);
        inner.extend(x, at_i.back());
      }
      IdEnv env2 = env;
      env2.bind(c.loop_var, di_nat(arith::fo_var(iv)));
      std::vector<std::string> scope_eigens;
      OutEnv fin = id_seq(ctx, env2, std::move(inner), c.body, scope_eigens);
      for (std::size_t i = 0; i < c.annot.size(); ++i) {
        const DI* got = fin.lookup(c.annot[i]);
        if (!got) fail("T.FOR", "mutable " + c.annot[i] + " lost in loop body");
        if (!compat(*got, at_si[i]))
          fail("T.FOR", c.annot[i] + " ends the body at " + types::show(*got) +
                            ", invariant needs " + types::show(at_si[i]) +
                            " (a subst hint may be needed)");
        om.update(c.annot[i], at_n[i]);
      }
      break;
    }
    case CK::Assign: {
      for (const auto& t : c.targets)
        if (!om.lookup(t)) fail("T.ASSIGN", "assignment to unbound mutable " + t);
      DI ty = id_expr(ctx, env, om, c.src);
      if (c.targets.size() == 1) {
        if (ty->k == DIK::Exists && !ty->ivars.empty() && ty->comps.size() == 1) {
          std::map<std::string, FoPtr> ren;
          for (const auto& j : ty->ivars) {
            std::string ej = ctx.fresh_index();
            eigens.push_back(ej);
            ren[j] = arith::fo_var(ej);
          }
          om.update(c.targets[0], subst_index_many(ty->comps[0], ren));
        } else {
          om.update(c.targets[0], ty);
        }
      } else {
        if (ty->k != DIK::Exists || ty->comps.size() != c.targets.size())
          fail("T.ASSIGN", "tuple assignment from " + types::show(ty));
        std::map<std::string, FoPtr> ren;
        for (const auto& j : ty->ivars) {
          std::string ej = ctx.fresh_index();
          eigens.push_back(ej);
          ren[j] = arith::fo_var(ej);
        }
        for (std::size_t i = 0; i < c.targets.size(); ++i)
          om.update(c.targets[i], subst_index_many(ty->comps[i], ren));
      }
      break;
    }
    case CK::Inc:
    case CK::Dec: {
      const DI* t = om.lookup(c.var);
      if (!t) fail(c.k == CK::Inc ? "T.INC" : "T.DEC", "unbound mutable " + c.var);
      if ((*t)->k == DIK::Any) break;
      if ((*t)->k != DIK::Nat)
        fail(c.k == CK::Inc ? "T.INC" : "T.DEC",
             c.var + " has type " + types::show(*t));
      om.update(c.var, di_nat(c.k == CK::Inc ? arith::fo_succ((*t)->n)
                                             : arith::fo_pred((*t)->n)));
      break;
    }
    case CK::SubstHint: {
      const arith::EqSystem& E = *ctx.E;
      if (c.hint_hole) {
        // [i | x: tau(i), ...] via (label) or evidence
        const std::string& hole = *c.hint_hole;
        std::map<std::string, FoPtr> theta;
        for (const auto& [x, pat] : c.hint_items) {
          const DI* cur = om.lookup(x);
          if (!cur) fail("T.SUBST", "hint names unbound mutable " + x);
          if (!di_type_match(pat, *cur, {hole}, theta))
            fail("T.SUBST", x + " has type " + types::show(*cur) +
                                ", which does not match " + types::show(pat));
        }
        if (!theta.count(hole))
          fail("T.SUBST", "hole variable " + hole + " is unconstrained");
        FoPtr n = theta[hole];
        FoPtr m;
        if (c.hint_label) {
          const arith::Equation* eq = E.find(*c.hint_label);
          if (!eq) fail("T.SUBST", "unknown equation (" + *c.hint_label + ")");
          auto orient = [&](const FoPtr& from, const FoPtr& to) -> FoPtr {
            std::set<std::string> pvv = arith::fo_vars(from);
            for (const auto& v : arith::fo_vars(to))
              if (!pvv.count(v)) return nullptr;
            std::map<std::string, FoPtr> th;
            if (!arith::fo_match(from, n, pvv, th)) return nullptr;
            return arith::fo_subst_many(to, th);
          };
          m = orient(eq->lhs, eq->rhs);
          if (!m) m = orient(eq->rhs, eq->lhs);
          if (!m)
            fail("T.SUBST", "equation (" + *c.hint_label + ") does not apply to " +
                                arith::fo_show(n));
        } else if (c.hint_ev) {
          DI ev = id_expr(ctx, env, om, c.hint_ev);
          if (ev->k != DIK::Equal)
            fail("T.SUBST", "evidence has type " + types::show(ev));
          if (arith::fo_equal(ev->n, n))
            m = ev->m;
          else if (arith::fo_equal(ev->m, n))
            m = ev->n;
          else
            fail("T.SUBST", "evidence " + types::show(ev) + " does not mention " +
                                arith::fo_show(n));
        } else {
          fail("T.SUBST", "hole form needs an equation label or evidence");
        }
        for (const auto& [x, pat] : c.hint_items)
          om.update(x, subst_index(pat, hole, m));
      } else {
        // target form: x: tau', ... ; one equation instance covers all diffs
        std::vector<std::pair<FoPtr, FoPtr>> all;
        for (const auto& [x, tgt] : c.hint_items) {
          const DI* cur = om.lookup(x);
          if (!cur) fail("T.SUBST", "hint names unbound mutable " + x);
          auto diffs = di_type_diff(*cur, tgt);
          if (!diffs)
            fail("T.SUBST", x + ": " + types::show(*cur) + " and " +
                                types::show(tgt) + " differ structurally");
          all.insert(all.end(), diffs->begin(), diffs->end());
        }
        if (!all.empty()) {
          auto pair = consolidate_pairs(all);
          if (!pair) fail("T.SUBST", "inconsistent rewrite positions");
          auto mi = arith::fo_match_instance(E, pair->first, pair->second);
          if (!mi.ok)
            fail("T.SUBST", arith::fo_show(pair->first) + " = " +
                                arith::fo_show(pair->second) +
                                " is not an instance of E");
        }
        for (const auto& [x, tgt] : c.hint_items) om.update(x, tgt);
      }
      break;
    }
    case CK::Call: {
      for (const auto& r : c.call_outs)
        if (!om.lookup(r)) fail("T.CALL", "unbound out target " + r);
      // callcc
      if (c.callee->k == EK::CallccConst) {
        std::vector<DI> sigma = id_check_callcc(ctx, env, om, c);
        for (std::size_t i = 0; i < c.call_outs.size(); ++i)
          om.update(c.call_outs[i], sigma[i]);
        break;
      }
      // throw / jump
      if (c.callee->k == EK::ThrowConst) {
        if (!ctx.classical) fail("T.CALL", "throw outside ID^c");
        if (c.args.empty()) fail("T.CALL", "throw needs a continuation argument");
        const EP& target = c.args[0];
        const RoBindingT<DI>* pb =
            target->k == EK::Var ? env.lookup(target->name) : nullptr;
        std::vector<EP> rest_args(c.args.begin() + 1, c.args.end());
        if (pb && pb->pending_label >= 0) {
          std::vector<DI> cand;
          bool ok = true;
          for (const auto& a : rest_args) {
            try {
              cand.push_back(id_expr(ctx, env, om, a));
            } catch (const IdError&) {
              ok = false;
              break;
            }
          }
          if (ok) ctx.labels[pb->pending_label].candidates.push_back(cand);
        } else {
          DI kty = id_expr(ctx, env, om, target);
          if (kty->k != DIK::Proc)
            fail("T.CALL", "jump target has type " + types::show(kty));
          for (const auto& o : kty->outs)
            if (o->k != DIK::Bottom && o->k != DIK::Any)
              fail("T.CALL", "jump target is not a continuation: " +
                                 types::show(kty));
          Command fake = c;
          fake.args = rest_args;
          fake.call_outs = {};
          DI as_call = di_proc(kty->ivars, kty->ins, {});
          // reuse the matcher with no outs
          if (kty->ins.size() != rest_args.size())
            fail("T.CALL", "jump argument count mismatch");
          std::set<std::string> pv(kty->ivars.begin(), kty->ivars.end());
          std::map<std::string, FoPtr> theta;
          std::vector<std::optional<DI>> synths(rest_args.size());
          for (std::size_t i = 0; i < rest_args.size(); ++i) {
            try {
              synths[i] = id_expr(ctx, env, om, rest_args[i]);
            } catch (const IdError&) {
              synths[i] = std::nullopt;
            }
            if (synths[i] && !di_type_match(kty->ins[i], *synths[i], pv, theta))
              fail("T.CALL", "jump argument " + std::to_string(i + 1) + " has type " +
                                 types::show(*synths[i]) + ", expected " +
                                 types::show(kty->ins[i]));
          }
          for (const auto& ivv : kty->ivars)
            if (!theta.count(ivv))
              fail("T.CALL", "jump instantiation for " + ivv + " unconstrained");
          for (std::size_t i = 0; i < rest_args.size(); ++i)
            if (!synths[i])
              id_check_expr(ctx, env, om, rest_args[i],
                            subst_index_many(kty->ins[i], theta));
          (void)as_call;
          (void)fake;
        }
        // control never returns: the out environment is arbitrary
        for (const auto& r : c.call_outs) om.update(r, di_any());
        break;
      }
      // scheme instantiation
      DI pty;
      const RoBindingT<DI>* b =
          c.callee->k == EK::Var ? env.lookup(c.callee->name) : nullptr;
      if (b && !b->atoms.empty()) {
        std::set<std::string> atoms(b->atoms.begin(), b->atoms.end());
        std::map<std::string, DI> inst;
        for (const auto& [a, t] : c.inst) {
          if (!atoms.count(a))
            fail("T.CALL", "unknown scheme variable " + a + " in instantiation");
          inst[a] = t;
        }
        const DI& scheme = b->type;
        if (scheme->k != DIK::Proc) fail("T.CALL", "scheme is not a procedure type");
        if (scheme->ins.size() != c.args.size())
          fail("T.CALL", "argument count mismatch for scheme " + types::show(scheme));
        for (std::size_t i = 0; i < c.args.size(); ++i) {
          if (inst.size() == atoms.size()) break;
          try {
            DI at = id_expr(ctx, env, om, c.args[i]);
            di_atom_match(subst_atoms(scheme->ins[i], inst), at, atoms, inst);
          } catch (const IdError&) {
            continue;
          }
        }
        for (const auto& a : b->atoms)
          if (!inst.count(a))
            fail("T.CALL", "scheme variable " + a +
                               " unconstrained; instantiate with " + c.callee->name +
                               "{" + a + " := ...}");
        pty = subst_atoms(scheme, inst);
      } else {
        pty = id_expr(ctx, env, om, c.callee);
      }
      auto rc = id_check_call_at(ctx, env, om, pty, c);
      for (std::size_t i = 0; i < c.call_outs.size(); ++i)
        om.update(c.call_outs[i], rc.outs[i]);
      break;
    }
    case CK::Label:
    case CK::Jump:
      fail("T.SEQ", "labels/jumps must be desugared before checking");
  }
  return id_seq(ctx, env, std::move(om), s->rest, eigens);
}

}  // namespace

ICheckResult i_check_dep(const arith::EqSystem& E, const IdEnv& gamma,
                         const OutEnv& omega, const SP& s, bool classical) {
  IdCtx ctx;
  ctx.E = &E;
  ctx.classical = classical;
  ICheckResult res;
  try {
    std::vector<std::string> eigens;
    res.out = id_seq(ctx, gamma, omega, s, eigens);
    for (const auto& [x, t] : res.out.items)
      for (const auto& ev : eigens)
        if (t && contains_var(t, ev))
          throw IdError{"TypeError(T.ASSIGN): EigenvariableEscape via " + x};
    res.ok = true;
  } catch (const IdError& e) {
    res.error = e.msg;
  } catch (const DesugarError& e) {
    res.error = e.message;
  }
  return res;
}

IdExprResult id_type_expr(const arith::EqSystem& E, const IdEnv& gamma,
                          const OutEnv& omega, const EP& e, bool classical) {
  IdCtx ctx;
  ctx.E = &E;
  ctx.classical = classical;
  try {
    return {true, id_expr(ctx, gamma, omega, e), ""};
  } catch (const IdError& err) {
    return {false, nullptr, err.msg};
  }
}

}  // namespace loopf::ilang
