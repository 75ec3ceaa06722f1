#include "loopf/icheck.hpp"

#include <functional>

// The IS checker: Fig B.1 over simple types, pseudo-dynamic Omega threading.
// Dependent annotations are consumed through kappa. Structure mirrors the ID
// side in icheck.cpp.

namespace loopf::ilang {

using namespace loopf::types;

namespace {

struct IsError {
  std::string msg;
};

[[noreturn]] void sfail(const std::string& rule, const std::string& msg) {
  throw IsError{"TypeError(" + rule + "): " + msg};
}

SI kappa_req(const DI& t, const char* rule) {
  if (!t) sfail(rule, "missing annotation");
  auto k = kappa_i(t);
  if (!k) sfail(rule, "annotation " + types::show(t) + " has no computational content");
  return *k;
}

struct LabelStateS {
  std::vector<std::vector<SI>> candidates;
};

struct IsCtx {
  bool classical = false;
  std::vector<LabelStateS> labels;
};

SI si_any_marker() { return si_atom("$any"); }
bool is_any(const SI& t) { return t->k == SIK::Atom && t->atom == "$any"; }

bool si_compat(const SI& a, const SI& b) {
  if (is_any(a) || is_any(b)) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
    case SIK::Proc: {
      if (a->ins.size() != b->ins.size() || a->outs.size() != b->outs.size())
        return false;
      for (std::size_t i = 0; i < a->ins.size(); ++i)
        if (!si_compat(a->ins[i], b->ins[i])) return false;
      for (std::size_t i = 0; i < a->outs.size(); ++i)
        if (!si_compat(a->outs[i], b->outs[i])) return false;
      return true;
    }
    case SIK::Tuple: {
      if (a->comps.size() != b->comps.size()) return false;
      for (std::size_t i = 0; i < a->comps.size(); ++i)
        if (!si_compat(a->comps[i], b->comps[i])) return false;
      return true;
    }
    case SIK::Atom:
      return a->atom == b->atom;
    default:
      return true;
  }
}

SI merge_any_s(const SI& a, const SI& b, const char* rule) {
  if (is_any(a)) return b;
  if (is_any(b)) return a;
  if (!si_compat(a, b))
    sfail(rule, "conflicting types " + types::show(a) + " vs " + types::show(b));
  return a;
}

bool si_atom_match(const SI& pattern, const SI& subject,
                   const std::set<std::string>& atoms,
                   std::map<std::string, SI>& theta) {
  if (pattern->k == SIK::Atom && atoms.count(pattern->atom)) {
    auto it = theta.find(pattern->atom);
    if (it != theta.end()) return si_compat(it->second, subject);
    theta.emplace(pattern->atom, subject);
    return true;
  }
  if (is_any(subject)) return true;
  if (pattern->k != subject->k) return false;
  switch (pattern->k) {
    case SIK::Proc: {
      if (pattern->ins.size() != subject->ins.size() ||
          pattern->outs.size() != subject->outs.size())
        return false;
      for (std::size_t i = 0; i < pattern->ins.size(); ++i)
        if (!si_atom_match(pattern->ins[i], subject->ins[i], atoms, theta))
          return false;
      for (std::size_t i = 0; i < pattern->outs.size(); ++i)
        if (!si_atom_match(pattern->outs[i], subject->outs[i], atoms, theta))
          return false;
      return true;
    }
    case SIK::Tuple: {
      if (pattern->comps.size() != subject->comps.size()) return false;
      for (std::size_t i = 0; i < pattern->comps.size(); ++i)
        if (!si_atom_match(pattern->comps[i], subject->comps[i], atoms, theta))
          return false;
      return true;
    }
    case SIK::Atom:
      return pattern->atom == subject->atom;
    default:
      return true;
  }
}

SI is_expr(IsCtx& ctx, const IsEnv& env, const OutEnvS& om, const EP& e);
OutEnvS is_seq(IsCtx& ctx, const IsEnv& env, OutEnvS om, const SP& s);

void is_check_proc(IsCtx& ctx, const IsEnv& env, const EP& p, const SI& ty) {
  if (p->k != EK::Proc || ty->k != SIK::Proc)
    sfail("T.PROC", "expected a procedure of type " + types::show(ty));
  if (p->ins.size() != ty->ins.size() || p->outs.size() != ty->outs.size())
    sfail("T.PROC", "parameter arity differs from " + types::show(ty));
  IsEnv env2 = env;
  for (std::size_t i = 0; i < p->ins.size(); ++i) env2.bind(p->ins[i], ty->ins[i]);
  OutEnvS body_env;
  for (const auto& z : p->outs) body_env.extend(z, si_unit());
  OutEnvS fin = is_seq(ctx, env2, std::move(body_env), p->body);
  for (std::size_t i = 0; i < p->outs.size(); ++i) {
    const SI* got = fin.lookup(p->outs[i]);
    if (!got) sfail("T.PROC", "out parameter " + p->outs[i] + " lost");
    if (!si_compat(*got, ty->outs[i]))
      sfail("T.PROC", "out " + p->outs[i] + " ends at " + types::show(*got) +
                          ", declared " + types::show(ty->outs[i]));
  }
}

SI is_synth_proc(IsCtx& ctx, const IsEnv& env, const EP& p) {
  if (p->in_types.size() != p->ins.size())
    sfail("T.PROC", "procedure parameters need type annotations for synthesis");
  std::vector<SI> ins;
  for (const auto& t : p->in_types) ins.push_back(kappa_req(t, "T.PROC"));
  IsEnv env2 = env;
  for (std::size_t i = 0; i < p->ins.size(); ++i) env2.bind(p->ins[i], ins[i]);
  OutEnvS body_env;
  for (const auto& z : p->outs) body_env.extend(z, si_unit());
  OutEnvS fin = is_seq(ctx, env2, std::move(body_env), p->body);
  std::vector<SI> outs;
  for (std::size_t i = 0; i < p->outs.size(); ++i) {
    const SI* got = fin.lookup(p->outs[i]);
    if (!got) sfail("T.PROC", "out parameter " + p->outs[i] + " lost");
    if (i < p->out_types.size() && p->out_types[i]) {
      SI want = kappa_req(p->out_types[i], "T.PROC");
      if (!si_compat(*got, want))
        sfail("T.PROC", "out " + p->outs[i] + " ends at " + types::show(*got) +
                            ", declared " + types::show(want));
      outs.push_back(want);
    } else {
      outs.push_back(*got);
    }
  }
  return si_proc(std::move(ins), std::move(outs));
}

SI is_expr(IsCtx& ctx, const IsEnv& env, const OutEnvS& om, const EP& e) {
  switch (e->k) {
    case EK::Var: {
      if (const auto* b = env.lookup(e->name)) {
        if (!b->atoms.empty())
          sfail("T.ENV", e->name + " is a type scheme; call it with instantiation");
        if (b->pending_label >= 0)
          sfail("T.ENV", "label " + e->name + " used as a value; annotate it");
        return b->type;
      }
      if (const SI* t = om.lookup(e->name)) return *t;
      sfail("T.ENV", "unbound variable " + e->name);
    }
    case EK::Star:
      return si_unit();
    case EK::Num:
      return si_nat();
    case EK::Tuple: {
      std::vector<SI> comps;
      for (const auto& c : e->comps) comps.push_back(is_expr(ctx, env, om, c));
      return si_tuple(std::move(comps));
    }
    case EK::Proc:
      return is_synth_proc(ctx, env, e);
    case EK::CallccConst:
    case EK::ThrowConst:
      sfail("T.ENV", "callcc/throw are schematic primitives; use them in calls");
  }
  sfail("INTERNAL", "unhandled expression");
}

void is_check_expr(IsCtx& ctx, const IsEnv& env, const OutEnvS& om, const EP& e,
                   const SI& expected) {
  if (is_any(expected)) return;
  if (e->k == EK::Proc) {
    is_check_proc(ctx, env, e, expected);
    return;
  }
  if (e->k == EK::Tuple && expected->k == SIK::Tuple &&
      expected->comps.size() == e->comps.size()) {
    for (std::size_t i = 0; i < e->comps.size(); ++i)
      is_check_expr(ctx, env, om, e->comps[i], expected->comps[i]);
    return;
  }
  SI got = is_expr(ctx, env, om, e);
  if (!si_compat(got, expected))
    sfail("T.ENV", "expected " + types::show(expected) + ", found " + types::show(got));
}

std::vector<SI> is_check_callcc(IsCtx& ctx, const IsEnv& env, const OutEnvS& om,
                                const Command& c) {
  if (!ctx.classical) sfail("T.CALL", "callcc outside the classical system");
  if (c.args.size() != 1 || c.args[0]->k != EK::Proc)
    sfail("T.CALL", "callcc expects one literal handler procedure");
  const EP& h = c.args[0];
  if (h->ins.size() != 1) sfail("T.CALL", "callcc handler takes one continuation");
  if (h->outs.size() != c.call_outs.size())
    sfail("T.CALL", "callcc handler out arity mismatch");
  if (!h->in_types.empty() && h->in_types[0]) {
    SI kty = kappa_req(h->in_types[0], "T.CALL");
    if (kty->k != SIK::Proc) sfail("T.CALL", "label annotation must be a proc type");
    IsEnv env2 = env;
    env2.bind(h->ins[0], kty);
    OutEnvS body_env;
    for (const auto& z : h->outs) body_env.extend(z, si_unit());
    OutEnvS fin = is_seq(ctx, env2, std::move(body_env), h->body);
    for (std::size_t i = 0; i < h->outs.size(); ++i) {
      const SI* got = fin.lookup(h->outs[i]);
      if (got && !si_compat(*got, kty->ins[i]))
        sfail("T.CALL", "label fall-through at " + types::show(*got) +
                            " conflicts with " + types::show(kty->ins[i]));
    }
    return kty->ins;
  }
  int id = static_cast<int>(ctx.labels.size());
  ctx.labels.push_back({});
  IsEnv env2 = env;
  env2.vars.push_back({h->ins[0], {nullptr, {}, id}});
  OutEnvS body_env;
  for (const auto& z : h->outs) body_env.extend(z, si_unit());
  OutEnvS fin = is_seq(ctx, env2, std::move(body_env), h->body);
  std::vector<SI> fall;
  bool all_any = true;
  for (const auto& z : h->outs) {
    const SI* got = fin.lookup(z);
    fall.push_back(got ? *got : si_any_marker());
    if (got && !is_any(*got)) all_any = false;
  }
  auto& cands = ctx.labels[id].candidates;
  if (!all_any) cands.push_back(fall);
  if (cands.empty())
    sfail("T.CALL", "cannot infer the label type of " + h->ins[0]);
  std::vector<SI> sigma = cands[0];
  for (std::size_t k = 1; k < cands.size(); ++k) {
    if (cands[k].size() != sigma.size())
      sfail("T.CALL", "jump arity mismatch for label " + h->ins[0]);
    for (std::size_t i = 0; i < sigma.size(); ++i)
      sigma[i] = merge_any_s(sigma[i], cands[k][i], "T.CALL");
  }
  for (const auto& t : sigma)
    if (is_any(t)) sfail("T.CALL", "label type of " + h->ins[0] + " undetermined");
  return sigma;
}

OutEnvS is_seq(IsCtx& ctx, const IsEnv& env, OutEnvS om, const SP& s) {
  switch (s->k) {
    case SK::Empty:
      return om;
    case SK::Cst: {
      if (env.lookup(s->name) || om.lookup(s->name))
        sfail("T.CST", s->name + " shadows an existing binding");
      IsEnv env2 = env;
      if (!s->scheme_atoms.empty()) {
        SI sch = kappa_req(s->decl_type, "T.CST");
        is_check_expr(ctx, env, om, s->init, sch);
        env2.vars.push_back({s->name, {sch, s->scheme_atoms, -1}});
      } else if (s->decl_type) {
        SI want = kappa_req(s->decl_type, "T.CST");
        is_check_expr(ctx, env, om, s->init, want);
        env2.bind(s->name, want);
      } else {
        env2.bind(s->name, is_expr(ctx, env, om, s->init));
      }
      return is_seq(ctx, env2, std::move(om), s->rest);
    }
    case SK::Var: {
      if (env.lookup(s->name) || om.lookup(s->name))
        sfail("T.VAR", s->name + " shadows an existing binding");
      SI ty = is_expr(ctx, env, om, s->init);
      om.extend(s->name, ty);
      OutEnvS fin = is_seq(ctx, env, std::move(om), s->rest);
      fin.remove(s->name);
      return fin;
    }
    case SK::Cmd:
      break;
  }
  const Command& c = *s->cmd;
  switch (c.k) {
    case CK::Block: {
      OutEnvS inner;
      for (const auto& x : c.annot) {
        const SI* t = om.lookup(x);
        if (!t) sfail("T.BLOCK", "annotation names unbound mutable " + x);
        inner.extend(x, *t);
      }
      OutEnvS fin = is_seq(ctx, env, std::move(inner), c.body);
      for (const auto& x : c.annot) {
        const SI* t = fin.lookup(x);
        if (!t) sfail("T.BLOCK", "mutable " + x + " lost in block");
        om.update(x, *t);
      }
      break;
    }
    case CK::For: {
      SI bty = is_expr(ctx, env, om, c.bound);
      if (bty->k != SIK::Nat && !is_any(bty))
        sfail("T.FOR", "loop bound has type " + types::show(bty));
      OutEnvS inner;
      for (const auto& x : c.annot) {
        const SI* t = om.lookup(x);
        if (!t) sfail("T.FOR", "annotation names unbound mutable " + x);
        inner.extend(x, *t);
      }
      IsEnv env2 = env;
      env2.bind(c.loop_var, si_nat());
      OutEnvS fin = is_seq(ctx, env2, std::move(inner), c.body);
      for (const auto& x : c.annot) {
        const SI* before = om.lookup(x);
        const SI* after = fin.lookup(x);
        if (!after) sfail("T.FOR", "mutable " + x + " lost in loop body");
        if (!si_compat(*before, *after))
          sfail("T.FOR", x + " must keep its type through the loop: " +
                             types::show(*before) + " vs " + types::show(*after));
      }
      break;
    }
    case CK::Assign: {
      for (const auto& t : c.targets)
        if (!om.lookup(t)) sfail("T.ASSIGN", "assignment to unbound mutable " + t);
      SI ty = is_expr(ctx, env, om, c.src);
      if (c.targets.size() == 1) {
        om.update(c.targets[0], ty);
      } else {
        if (is_any(ty)) {
          for (const auto& t : c.targets) om.update(t, si_any_marker());
        } else {
          if (ty->k != SIK::Tuple || ty->comps.size() != c.targets.size())
            sfail("T.ASSIGN", "tuple assignment from " + types::show(ty));
          for (std::size_t i = 0; i < c.targets.size(); ++i)
            om.update(c.targets[i], ty->comps[i]);
        }
      }
      break;
    }
    case CK::Inc:
    case CK::Dec: {
      const SI* t = om.lookup(c.var);
      if (!t) sfail(c.k == CK::Inc ? "T.INC" : "T.DEC", "unbound mutable " + c.var);
      if (is_any(*t)) break;
      if ((*t)->k != SIK::Nat)
        sfail(c.k == CK::Inc ? "T.INC" : "T.DEC",
              c.var + " has type " + types::show(*t));
      om.update(c.var, si_nat());
      break;
    }
    case CK::SubstHint:
      break;  // no simple-type content
    case CK::Call: {
      for (const auto& r : c.call_outs)
        if (!om.lookup(r)) sfail("T.CALL", "unbound out target " + r);
      if (c.callee->k == EK::CallccConst) {
        std::vector<SI> sigma = is_check_callcc(ctx, env, om, c);
        for (std::size_t i = 0; i < c.call_outs.size(); ++i)
          om.update(c.call_outs[i], sigma[i]);
        break;
      }
      if (c.callee->k == EK::ThrowConst) {
        if (!ctx.classical) sfail("T.CALL", "throw outside the classical system");
        if (c.args.empty()) sfail("T.CALL", "throw needs a continuation argument");
        const EP& target = c.args[0];
        const RoBindingT<SI>* pb =
            target->k == EK::Var ? env.lookup(target->name) : nullptr;
        std::vector<EP> rest_args(c.args.begin() + 1, c.args.end());
        if (pb && pb->pending_label >= 0) {
          std::vector<SI> cand;
          bool okc = true;
          for (const auto& a : rest_args) {
            try {
              cand.push_back(is_expr(ctx, env, om, a));
            } catch (const IsError&) {
              okc = false;
              break;
            }
          }
          if (okc) ctx.labels[pb->pending_label].candidates.push_back(cand);
        } else {
          SI kty = is_expr(ctx, env, om, target);
          if (kty->k != SIK::Proc)
            sfail("T.CALL", "jump target has type " + types::show(kty));
          if (kty->ins.size() != rest_args.size())
            sfail("T.CALL", "jump argument count mismatch");
          for (std::size_t i = 0; i < rest_args.size(); ++i)
            is_check_expr(ctx, env, om, rest_args[i], kty->ins[i]);
        }
        for (const auto& r : c.call_outs) om.update(r, si_any_marker());
        break;
      }
      SI pty;
      const RoBindingT<SI>* b =
          c.callee->k == EK::Var ? env.lookup(c.callee->name) : nullptr;
      if (b && !b->atoms.empty()) {
        std::set<std::string> atoms(b->atoms.begin(), b->atoms.end());
        std::map<std::string, SI> inst;
        for (const auto& [a, t] : c.inst) {
          if (atoms.count(a)) inst[a] = kappa_req(t, "T.CALL");
        }
        const SI& scheme = b->type;
        if (scheme->k != SIK::Proc || scheme->ins.size() != c.args.size())
          sfail("T.CALL", "scheme arity mismatch");
        for (std::size_t i = 0; i < c.args.size(); ++i) {
          if (inst.size() == atoms.size()) break;
          try {
            SI at = is_expr(ctx, env, om, c.args[i]);
            si_atom_match(subst_atoms(scheme->ins[i], inst), at, atoms, inst);
          } catch (const IsError&) {
            continue;
          }
        }
        for (const auto& a : b->atoms)
          if (!inst.count(a))
            sfail("T.CALL", "scheme variable " + a + " unconstrained at a call of " +
                                c.callee->name);
        pty = subst_atoms(scheme, inst);
      } else {
        pty = is_expr(ctx, env, om, c.callee);
      }
      if (pty->k != SIK::Proc)
        sfail("T.CALL", "calling a value of type " + types::show(pty));
      if (pty->ins.size() != c.args.size())
        sfail("T.CALL", "argument count mismatch");
      if (pty->outs.size() != c.call_outs.size())
        sfail("T.CALL", "out target count mismatch");
      for (std::size_t i = 0; i < c.args.size(); ++i)
        is_check_expr(ctx, env, om, c.args[i], pty->ins[i]);
      for (std::size_t i = 0; i < c.call_outs.size(); ++i)
        om.update(c.call_outs[i], pty->outs[i]);
      break;
    }
    case CK::Label:
    case CK::Jump:
      sfail("T.SEQ", "labels/jumps must be desugared before checking");
  }
  return is_seq(ctx, env, std::move(om), s->rest);
}

}  // namespace

ICheckResult i_check_simple(const IsEnv& gamma, const OutEnvS& omega, const SP& s,
                            bool classical) {
  IsCtx ctx;
  ctx.classical = classical;
  ICheckResult res;
  try {
    res.sout = is_seq(ctx, gamma, omega, s);
    res.ok = true;
  } catch (const IsError& e) {
    res.error = e.msg;
  }
  return res;
}

IsExprResult is_type_expr(const IsEnv& gamma, const OutEnvS& omega, const EP& e,
                          bool classical) {
  IsCtx ctx;
  ctx.classical = classical;
  try {
    return {true, is_expr(ctx, gamma, omega, e), ""};
  } catch (const IsError& err) {
    return {false, nullptr, err.msg};
  }
}

StateCheckResult i_check_state(const State& st, bool classical) {
  StateCheckResult res;
  OutEnvS tys;
  for (const auto& [name, val] : st.store.items) {
    if (!e_is_value(val)) {
      res.error = "store value for " + name + " is not closed";
      return res;
    }
    auto t = is_type_expr({}, {}, val, classical);
    if (!t.ok) {
      res.error = "store value for " + name + ": " + t.error;
      return res;
    }
    tys.extend(name, t.type);
  }
  auto body = i_check_simple({}, tys, st.seq, classical);
  if (!body.ok) {
    res.error = body.error;
    return res;
  }
  res.ok = true;
  res.store_types = std::move(tys);
  return res;
}

EraseCheckResult kappa_erase_check(const arith::EqSystem& E, const IdEnv& gamma,
                                   const OutEnv& omega, const SP& s, bool classical) {
  EraseCheckResult res;
  auto dep = i_check_dep(E, gamma, omega, s, classical);
  if (!dep.ok) {
    res.error = "ID check failed: " + dep.error;
    return res;
  }
  IsEnv sg;
  for (const auto& [n, b] : gamma.vars) {
    auto k = kappa_i(b.type);
    if (!k) {
      res.error = "kappa undefined on " + types::show(b.type);
      return res;
    }
    sg.vars.push_back({n, {*k, b.atoms, -1}});
  }
  OutEnvS so;
  for (const auto& [n, t] : omega.items) {
    auto k = kappa_i(t);
    if (!k) {
      res.error = "kappa undefined on " + types::show(t);
      return res;
    }
    so.extend(n, *k);
  }
  auto simple = i_check_simple(sg, so, s, classical);
  if (!simple.ok) {
    res.error = "ErasureMismatch: IS rejects the erased program: " + simple.error;
    return res;
  }
  // the simple result must be the erasure of the dependent result
  for (const auto& [n, t] : dep.out.items) {
    const SI* st = simple.sout.lookup(n);
    auto k = kappa_i(t);
    if (!st || !k || !alpha_eq(*st, *k)) {
      if (t->k == types::DIK::Any) continue;
      res.error = "ErasureMismatch on " + n;
      return res;
    }
  }
  res.ok = true;
  return res;
}

}  // namespace loopf::ilang
