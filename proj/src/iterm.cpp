#include "loopf/iterm.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace loopf::ilang {

namespace {

std::shared_ptr<Expr> mke(EK k) {
  auto e = std::make_shared<Expr>();
  e->k = k;
  return e;
}

std::shared_ptr<Command> mkc(CK k) {
  auto c = std::make_shared<Command>();
  c->k = k;
  return c;
}

std::shared_ptr<Seq> mks(SK k) {
  auto s = std::make_shared<Seq>();
  s->k = k;
  return s;
}

}  // namespace

EP e_var(const std::string& n) { auto e = mke(EK::Var); e->name = n; return e; }
EP e_star() { static EP e = mke(EK::Star); return e; }
EP e_num(const Nat& n) { auto e = mke(EK::Num); e->num = n; return e; }
EP e_callcc() { static EP e = mke(EK::CallccConst); return e; }
EP e_throw() { static EP e = mke(EK::ThrowConst); return e; }

EP e_tuple(std::vector<EP> comps) {
  if (comps.size() == 1) return comps[0];
  auto e = mke(EK::Tuple);
  e->comps = std::move(comps);
  return e;
}

EP e_proc(std::vector<std::string> ivars, std::vector<std::string> ins,
          std::vector<std::string> outs, SP body, std::vector<DI> in_types,
          std::vector<DI> out_types, std::vector<std::string> globals) {
  auto e = mke(EK::Proc);
  e->ivars = std::move(ivars);
  e->ins = std::move(ins);
  e->outs = std::move(outs);
  e->body = std::move(body);
  e->in_types = std::move(in_types);
  e->out_types = std::move(out_types);
  e->globals = std::move(globals);
  return e;
}

SP s_empty() { static SP s = mks(SK::Empty); return s; }

SP s_cmd(CP c, SP rest) {
  auto s = mks(SK::Cmd);
  s->cmd = std::move(c);
  s->rest = std::move(rest);
  return s;
}

SP s_cst(const std::string& n, EP init, SP rest, std::vector<std::string> atoms,
         DI decl) {
  auto s = mks(SK::Cst);
  s->name = n;
  s->init = std::move(init);
  s->rest = std::move(rest);
  s->scheme_atoms = std::move(atoms);
  s->decl_type = std::move(decl);
  return s;
}

SP s_var(const std::string& n, EP init, SP rest) {
  auto s = mks(SK::Var);
  s->name = n;
  s->init = std::move(init);
  s->rest = std::move(rest);
  return s;
}

CP c_block(SP body, std::vector<std::string> annot) {
  auto c = mkc(CK::Block);
  c->body = std::move(body);
  c->annot = std::move(annot);
  return c;
}

CP c_for(const std::string& var, EP bound, SP body, std::vector<std::string> annot,
         std::optional<std::string> inv_var,
         std::vector<std::pair<std::string, DI>> invariant) {
  auto c = mkc(CK::For);
  c->loop_var = var;
  c->bound = std::move(bound);
  c->body = std::move(body);
  c->annot = std::move(annot);
  c->inv_var = std::move(inv_var);
  c->invariant = std::move(invariant);
  return c;
}

CP c_assign(std::vector<std::string> targets, EP src) {
  auto c = mkc(CK::Assign);
  c->targets = std::move(targets);
  c->src = std::move(src);
  return c;
}

CP c_inc(const std::string& v) { auto c = mkc(CK::Inc); c->var = v; return c; }
CP c_dec(const std::string& v) { auto c = mkc(CK::Dec); c->var = v; return c; }

CP c_call(EP callee, std::vector<EP> args, std::vector<std::string> outs,
          std::vector<std::string> globals,
          std::vector<std::pair<std::string, DI>> inst) {
  auto c = mkc(CK::Call);
  c->callee = std::move(callee);
  c->args = std::move(args);
  c->call_outs = std::move(outs);
  c->globals = std::move(globals);
  c->inst = std::move(inst);
  return c;
}

CP c_subst_hint(std::optional<std::string> hole,
                std::vector<std::pair<std::string, DI>> items,
                std::optional<std::string> label, EP ev) {
  auto c = mkc(CK::SubstHint);
  c->hint_hole = std::move(hole);
  c->hint_items = std::move(items);
  c->hint_label = std::move(label);
  c->hint_ev = std::move(ev);
  return c;
}

CP c_label(const std::string& name, SP body, std::vector<std::string> annot,
           std::vector<std::string> ivars, std::vector<DI> tys) {
  auto c = mkc(CK::Label);
  c->label_name = name;
  c->body = std::move(body);
  c->annot = std::move(annot);
  c->label_ivars = std::move(ivars);
  c->label_types = std::move(tys);
  return c;
}

CP c_jump(EP target, std::vector<EP> args, std::vector<std::string> outs) {
  auto c = mkc(CK::Jump);
  c->jump_target = std::move(target);
  c->jump_args = std::move(args);
  c->jump_outs = std::move(outs);
  return c;
}

// -------------------------------------------------------------------- store

const EP* Store::lookup(const std::string& n) const {
  for (const auto& [k, v] : items)
    if (k == n) return &v;
  return nullptr;
}

bool Store::update(const std::string& n, EP v) {
  for (auto& [k, val] : items)
    if (k == n) {
      val = std::move(v);
      return true;
    }
  return false;
}

void Store::extend(const std::string& n, EP v) { items.emplace_back(n, std::move(v)); }

bool e_is_value(const EP& e) {
  switch (e->k) {
    case EK::Star:
    case EK::Num:
    case EK::Proc:
    case EK::CallccConst:
    case EK::ThrowConst:
      return true;
    case EK::Tuple:
      for (const auto& c : e->comps)
        if (!e_is_value(c)) return false;
      return true;
    case EK::Var:
      return false;
  }
  return false;
}

bool e_equal(const EP& a, const EP& b) {
  if (a.get() == b.get()) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
    case EK::Var: return a->name == b->name;
    case EK::Star:
    case EK::CallccConst:
    case EK::ThrowConst:
      return true;
    case EK::Num: return a->num == b->num;
    case EK::Tuple: {
      if (a->comps.size() != b->comps.size()) return false;
      for (std::size_t i = 0; i < a->comps.size(); ++i)
        if (!e_equal(a->comps[i], b->comps[i])) return false;
      return true;
    }
    case EK::Proc:
      return a->ins == b->ins && a->outs == b->outs && seq_equal(a->body, b->body);
  }
  return false;
}

bool seq_equal(const SP& a, const SP& b) {
  if (a.get() == b.get()) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
    case SK::Empty: return true;
    case SK::Cst:
    case SK::Var:
      return a->name == b->name && e_equal(a->init, b->init) &&
             seq_equal(a->rest, b->rest);
    case SK::Cmd: {
      const Command& x = *a->cmd;
      const Command& y = *b->cmd;
      if (x.k != y.k) return false;
      switch (x.k) {
        case CK::Block:
          return x.annot == y.annot && seq_equal(x.body, y.body) &&
                 seq_equal(a->rest, b->rest);
        case CK::For:
          return x.loop_var == y.loop_var && e_equal(x.bound, y.bound) &&
                 x.annot == y.annot && seq_equal(x.body, y.body) &&
                 seq_equal(a->rest, b->rest);
        case CK::Assign:
          return x.targets == y.targets && e_equal(x.src, y.src) &&
                 seq_equal(a->rest, b->rest);
        case CK::Inc:
        case CK::Dec:
          return x.var == y.var && seq_equal(a->rest, b->rest);
        case CK::Call: {
          if (!e_equal(x.callee, y.callee) || x.call_outs != y.call_outs ||
              x.args.size() != y.args.size())
            return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!e_equal(x.args[i], y.args[i])) return false;
          return seq_equal(a->rest, b->rest);
        }
        case CK::SubstHint:
          return seq_equal(a->rest, b->rest);
        default:
          return false;
      }
    }
  }
  return false;
}

EP eval_expr(const Store& mu, const EP& e) {
  switch (e->k) {
    case EK::Var: {
      const EP* v = mu.lookup(e->name);
      return v ? *v : nullptr;
    }
    case EK::Tuple: {
      std::vector<EP> comps;
      for (const auto& c : e->comps) {
        EP v = eval_expr(mu, c);
        if (!v) return nullptr;
        comps.push_back(std::move(v));
      }
      return e_tuple(std::move(comps));
    }
    default:
      return e;
  }
}

// ----------------------------------------------------------- free idents

namespace {

void fi_expr(const EP& e, std::set<std::string>& out);
void fi_seq(const SP& s, std::set<std::string>& out);

void erase_from(std::set<std::string>& s, const std::vector<std::string>& names) {
  for (const auto& n : names) s.erase(n);
}

void fi_cmd(const Command& c, std::set<std::string>& out) {
  switch (c.k) {
    case CK::Block: {
      fi_seq(c.body, out);
      for (const auto& x : c.annot) out.insert(x);
      return;
    }
    case CK::For: {
      std::set<std::string> body;
      fi_seq(c.body, body);
      body.erase(c.loop_var);
      out.insert(body.begin(), body.end());
      fi_expr(c.bound, out);
      for (const auto& x : c.annot) out.insert(x);
      return;
    }
    case CK::Assign:
      for (const auto& t : c.targets) out.insert(t);
      fi_expr(c.src, out);
      return;
    case CK::Inc:
    case CK::Dec:
      out.insert(c.var);
      return;
    case CK::Call:
      fi_expr(c.callee, out);
      for (const auto& a : c.args) fi_expr(a, out);
      for (const auto& r : c.call_outs) out.insert(r);
      for (const auto& g : c.globals) out.insert(g);
      return;
    case CK::SubstHint:
      if (c.hint_ev) fi_expr(c.hint_ev, out);
      for (const auto& [n, _] : c.hint_items) out.insert(n);
      return;
    case CK::Label: {
      std::set<std::string> body;
      fi_seq(c.body, body);
      body.erase(c.label_name);
      out.insert(body.begin(), body.end());
      for (const auto& x : c.annot) out.insert(x);
      return;
    }
    case CK::Jump:
      fi_expr(c.jump_target, out);
      for (const auto& a : c.jump_args) fi_expr(a, out);
      for (const auto& z : c.jump_outs) out.insert(z);
      return;
  }
}

void fi_expr(const EP& e, std::set<std::string>& out) {
  switch (e->k) {
    case EK::Var:
      out.insert(e->name);
      return;
    case EK::Tuple:
      for (const auto& c : e->comps) fi_expr(c, out);
      return;
    case EK::Proc: {
      std::set<std::string> body;
      fi_seq(e->body, body);
      erase_from(body, e->ins);
      erase_from(body, e->outs);
      out.insert(body.begin(), body.end());
      for (const auto& g : e->globals) out.insert(g);
      return;
    }
    default:
      return;
  }
}

void fi_seq(const SP& s, std::set<std::string>& out) {
  switch (s->k) {
    case SK::Empty:
      return;
    case SK::Cmd:
      fi_cmd(*s->cmd, out);
      fi_seq(s->rest, out);
      return;
    case SK::Cst:
    case SK::Var: {
      fi_expr(s->init, out);
      std::set<std::string> rest;
      fi_seq(s->rest, rest);
      rest.erase(s->name);
      out.insert(rest.begin(), rest.end());
      return;
    }
  }
}

void fm_seq(const SP& s, std::set<std::string>& out,
            std::vector<std::string> bound);

void fm_cmd(const Command& c, std::set<std::string>& out,
            std::vector<std::string>& bound) {
  auto add = [&](const std::string& n) {
    for (const auto& b : bound)
      if (b == n) return;
    out.insert(n);
  };
  switch (c.k) {
    case CK::Block:
      fm_seq(c.body, out, bound);
      for (const auto& x : c.annot) add(x);
      return;
    case CK::For: {
      auto b2 = bound;
      b2.push_back(c.loop_var);
      fm_seq(c.body, out, b2);
      for (const auto& x : c.annot) add(x);
      return;
    }
    case CK::Assign:
      for (const auto& t : c.targets) add(t);
      return;
    case CK::Inc:
    case CK::Dec:
      add(c.var);
      return;
    case CK::Call:
      for (const auto& r : c.call_outs) add(r);
      for (const auto& g : c.globals) add(g);
      return;
    case CK::SubstHint:
      for (const auto& [n, _] : c.hint_items) add(n);
      return;
    case CK::Label: {
      auto b2 = bound;
      b2.push_back(c.label_name);
      fm_seq(c.body, out, b2);
      for (const auto& x : c.annot) add(x);
      return;
    }
    case CK::Jump:
      for (const auto& z : c.jump_outs) add(z);
      return;
  }
}

void fm_seq(const SP& s, std::set<std::string>& out,
            std::vector<std::string> bound) {
  switch (s->k) {
    case SK::Empty:
      return;
    case SK::Cmd:
      fm_cmd(*s->cmd, out, bound);
      fm_seq(s->rest, out, bound);
      return;
    case SK::Cst:
    case SK::Var: {
      bound.push_back(s->name);
      fm_seq(s->rest, out, bound);
      return;
    }
  }
}

}  // namespace

std::set<std::string> free_idents(const SP& s) {
  std::set<std::string> out;
  fi_seq(s, out);
  return out;
}

std::set<std::string> free_idents(const EP& e) {
  std::set<std::string> out;
  fi_expr(e, out);
  return out;
}

std::set<std::string> free_mutables(const SP& s) {
  std::set<std::string> out;
  fm_seq(s, out, {});
  return out;
}

// ------------------------------------------------------------ substitution

namespace {

std::string pick_fresh_name(const std::string& base, const std::set<std::string>& taken) {
  std::string cand = base;
  int i = 0;
  while (taken.count(cand)) cand = base + "'" + (i ? std::to_string(i) : ""), ++i;
  return cand;
}

}  // namespace

EP subst_ro(const EP& e, const std::map<std::string, EP>& env) {
  if (env.empty()) return e;
  switch (e->k) {
    case EK::Var: {
      auto it = env.find(e->name);
      return it == env.end() ? e : it->second;
    }
    case EK::Tuple: {
      std::vector<EP> comps;
      for (const auto& c : e->comps) comps.push_back(subst_ro(c, env));
      return e_tuple(std::move(comps));
    }
    case EK::Proc: {
      auto env2 = env;
      for (const auto& n : e->ins) env2.erase(n);
      for (const auto& n : e->outs) env2.erase(n);
      for (const auto& n : e->globals) env2.erase(n);
      if (env2.empty()) return e;
      return e_proc(e->ivars, e->ins, e->outs, subst_ro(e->body, env2), e->in_types,
                    e->out_types, e->globals);
    }
    default:
      return e;
  }
}

SP subst_ro(const SP& s, const std::map<std::string, EP>& env) {
  if (env.empty()) return s;
  switch (s->k) {
    case SK::Empty:
      return s;
    case SK::Cst:
    case SK::Var: {
      EP init = subst_ro(s->init, env);
      auto env2 = env;
      env2.erase(s->name);
      SP rest = subst_ro(s->rest, env2);
      return s->k == SK::Cst
                 ? s_cst(s->name, init, rest, s->scheme_atoms, s->decl_type)
                 : s_var(s->name, init, rest);
    }
    case SK::Cmd: {
      const Command& c = *s->cmd;
      SP rest = subst_ro(s->rest, env);
      switch (c.k) {
        case CK::Block:
          return s_cmd(c_block(subst_ro(c.body, env), c.annot), rest);
        case CK::For: {
          auto env2 = env;
          env2.erase(c.loop_var);
          return s_cmd(c_for(c.loop_var, subst_ro(c.bound, env),
                             subst_ro(c.body, env2), c.annot, c.inv_var,
                             c.invariant),
                       rest);
        }
        case CK::Assign:
          return s_cmd(c_assign(c.targets, subst_ro(c.src, env)), rest);
        case CK::Inc:
        case CK::Dec:
          return s_cmd(s->cmd, rest);
        case CK::Call: {
          std::vector<EP> args;
          for (const auto& a : c.args) args.push_back(subst_ro(a, env));
          return s_cmd(c_call(subst_ro(c.callee, env), std::move(args), c.call_outs,
                              c.globals, c.inst),
                       rest);
        }
        case CK::SubstHint:
          return s_cmd(c_subst_hint(c.hint_hole, c.hint_items, c.hint_label,
                                    c.hint_ev ? subst_ro(c.hint_ev, env) : nullptr),
                       rest);
        case CK::Label: {
          auto env2 = env;
          env2.erase(c.label_name);
          return s_cmd(c_label(c.label_name, subst_ro(c.body, env2), c.annot,
                               c.label_ivars, c.label_types),
                       rest);
        }
        case CK::Jump: {
          std::vector<EP> args;
          for (const auto& a : c.jump_args) args.push_back(subst_ro(a, env));
          return s_cmd(c_jump(subst_ro(c.jump_target, env), std::move(args),
                              c.jump_outs),
                       rest);
        }
      }
      return s;
    }
  }
  return s;
}

namespace {

std::string ren_name(const std::map<std::string, std::string>& ren,
                     const std::string& n) {
  auto it = ren.find(n);
  return it == ren.end() ? n : it->second;
}

std::vector<std::string> ren_names(const std::map<std::string, std::string>& ren,
                                   const std::vector<std::string>& ns) {
  std::vector<std::string> out;
  out.reserve(ns.size());
  for (const auto& n : ns) out.push_back(ren_name(ren, n));
  return out;
}

EP rename_expr(const EP& e, const std::map<std::string, std::string>& ren);

// capture-avoiding binder handling: drops shadowed entries and alpha-renames
// the binder when it collides with a renaming target
template <typename K>
std::map<std::string, std::string> drop_binders(
    std::map<std::string, std::string> ren, const std::vector<std::string>& binders,
    const K& free_in_body, std::vector<std::string>& renamed_binders) {
  for (const auto& b : binders) ren.erase(b);
  std::set<std::string> range;
  for (const auto& [k, v] : ren) range.insert(v);
  renamed_binders = binders;
  for (auto& b : renamed_binders) {
    if (!range.count(b)) continue;
    std::set<std::string> taken = range;
    taken.insert(free_in_body.begin(), free_in_body.end());
    for (const auto& x : renamed_binders) taken.insert(x);
    std::string nb = pick_fresh_name(b, taken);
    ren[b] = nb;
    b = nb;
  }
  return ren;
}

SP rename_seq(const SP& s, const std::map<std::string, std::string>& ren);

CP rename_cmd(const Command& c, const std::map<std::string, std::string>& ren) {
  switch (c.k) {
    case CK::Block:
      return c_block(rename_seq(c.body, ren), ren_names(ren, c.annot));
    case CK::For: {
      std::vector<std::string> newb;
      auto ren2 = drop_binders(ren, {c.loop_var}, free_idents(c.body), newb);
      return c_for(newb[0], rename_expr(c.bound, ren), rename_seq(c.body, ren2),
                   ren_names(ren, c.annot), c.inv_var, c.invariant);
    }
    case CK::Assign:
      return c_assign(ren_names(ren, c.targets), rename_expr(c.src, ren));
    case CK::Inc:
      return c_inc(ren_name(ren, c.var));
    case CK::Dec:
      return c_dec(ren_name(ren, c.var));
    case CK::Call: {
      std::vector<EP> args;
      for (const auto& a : c.args) args.push_back(rename_expr(a, ren));
      return c_call(rename_expr(c.callee, ren), std::move(args),
                    ren_names(ren, c.call_outs), ren_names(ren, c.globals), c.inst);
    }
    case CK::SubstHint: {
      auto items = c.hint_items;
      for (auto& [n, ty] : items) n = ren_name(ren, n);
      return c_subst_hint(c.hint_hole, std::move(items), c.hint_label,
                          c.hint_ev ? rename_expr(c.hint_ev, ren) : nullptr);
    }
    case CK::Label: {
      std::vector<std::string> newb;
      auto ren2 = drop_binders(ren, {c.label_name}, free_idents(c.body), newb);
      return c_label(newb[0], rename_seq(c.body, ren2), ren_names(ren, c.annot),
                     c.label_ivars, c.label_types);
    }
    case CK::Jump: {
      std::vector<EP> args;
      for (const auto& a : c.jump_args) args.push_back(rename_expr(a, ren));
      return c_jump(rename_expr(c.jump_target, ren), std::move(args),
                    ren_names(ren, c.jump_outs));
    }
  }
  return nullptr;
}

EP rename_expr(const EP& e, const std::map<std::string, std::string>& ren) {
  if (ren.empty()) return e;
  switch (e->k) {
    case EK::Var: {
      auto it = ren.find(e->name);
      return it == ren.end() ? e : e_var(it->second);
    }
    case EK::Tuple: {
      std::vector<EP> comps;
      for (const auto& c : e->comps) comps.push_back(rename_expr(c, ren));
      return e_tuple(std::move(comps));
    }
    case EK::Proc: {
      std::vector<std::string> binders = e->ins;
      binders.insert(binders.end(), e->outs.begin(), e->outs.end());
      binders.insert(binders.end(), e->globals.begin(), e->globals.end());
      std::vector<std::string> newb;
      auto ren2 = drop_binders(ren, binders, free_idents(e->body), newb);
      std::vector<std::string> ins(newb.begin(), newb.begin() + e->ins.size());
      std::vector<std::string> outs(newb.begin() + e->ins.size(),
                                    newb.begin() + e->ins.size() + e->outs.size());
      std::vector<std::string> globals(newb.begin() + e->ins.size() + e->outs.size(),
                                       newb.end());
      return e_proc(e->ivars, std::move(ins), std::move(outs),
                    rename_seq(e->body, ren2), e->in_types, e->out_types,
                    std::move(globals));
    }
    default:
      return e;
  }
}

SP rename_seq(const SP& s, const std::map<std::string, std::string>& ren) {
  if (ren.empty()) return s;
  switch (s->k) {
    case SK::Empty:
      return s;
    case SK::Cst:
    case SK::Var: {
      EP init = rename_expr(s->init, ren);
      std::vector<std::string> newb;
      auto ren2 = drop_binders(ren, {s->name}, free_idents(s->rest), newb);
      SP rest = rename_seq(s->rest, ren2);
      return s->k == SK::Cst ? s_cst(newb[0], init, rest, s->scheme_atoms, s->decl_type)
                             : s_var(newb[0], init, rest);
    }
    case SK::Cmd:
      return s_cmd(rename_cmd(*s->cmd, ren), rename_seq(s->rest, ren));
  }
  return s;
}

}  // namespace

SP rename_mut(const SP& s, const std::map<std::string, std::string>& ren) {
  return rename_seq(s, ren);
}

// -------------------------------------------------------------- desugaring

namespace {

struct Desugarer {
  std::set<std::string> used;
  long counter = 0;

  std::string fresh(const std::string& base) {
    for (;;) {
      std::string cand = base + std::to_string(++counter);
      if (!used.count(cand)) {
        used.insert(cand);
        return cand;
      }
    }
  }

  EP expr(const EP& e) {
    switch (e->k) {
      case EK::Tuple: {
        std::vector<EP> comps;
        for (const auto& c : e->comps) comps.push_back(expr(c));
        return e_tuple(std::move(comps));
      }
      case EK::Proc: {
        // body's visible mutables are exactly its outs (Remark 2.6)
        std::vector<std::string> ins = e->ins;
        std::vector<std::string> outs = e->outs;
        std::vector<DI> in_types = e->in_types;
        std::vector<DI> out_types = e->out_types;
        SP body = e->body;
        if (!e->globals.empty()) {
          // proc(in x; out y)[z] { s } = proc(in x, z'; out y, z){ z := z'; s }
          std::vector<std::string> primes;
          for (const auto& g : e->globals) primes.push_back(fresh(g));
          SP prefixed = body;
          for (std::size_t i = e->globals.size(); i-- > 0;)
            prefixed = s_cmd(c_assign({e->globals[i]}, e_var(primes[i])), prefixed);
          ins.insert(ins.end(), primes.begin(), primes.end());
          outs.insert(outs.end(), e->globals.begin(), e->globals.end());
          if (!in_types.empty())
            in_types.resize(ins.size());  // missing annotations stay null
          if (!out_types.empty()) out_types.resize(outs.size());
          body = prefixed;
        }
        if (ins.empty()) {
          ins.push_back(fresh("u"));
          if (!in_types.empty()) in_types.resize(1);
        }
        std::vector<std::string> visible = outs;
        return e_proc(e->ivars, std::move(ins), outs, seq(body, visible),
                      std::move(in_types), std::move(out_types));
      }
      default:
        return e;
    }
  }

  std::vector<std::string> infer_annot(const SP& body,
                                       const std::vector<std::string>& visible) {
    auto fi = free_idents(body);
    std::vector<std::string> out;
    for (const auto& v : visible)
      if (fi.count(v)) out.push_back(v);
    return out;
  }

  SP seq(const SP& s, std::vector<std::string> visible) {
    switch (s->k) {
      case SK::Empty:
        return s;
      case SK::Cst: {
        EP init = expr(s->init);
        auto vis = visible;
        vis.erase(std::remove(vis.begin(), vis.end(), s->name), vis.end());
        return s_cst(s->name, init, seq(s->rest, vis), s->scheme_atoms, s->decl_type);
      }
      case SK::Var: {
        EP init = expr(s->init);
        auto vis = visible;
        if (std::find(vis.begin(), vis.end(), s->name) == vis.end())
          vis.push_back(s->name);
        return s_var(s->name, init, seq(s->rest, vis));
      }
      case SK::Cmd:
        return cmd(*s->cmd, s->rest, std::move(visible));
    }
    return s;
  }

  SP cmd(const Command& c, const SP& rest0, std::vector<std::string> visible) {
    SP rest = seq(rest0, visible);
    switch (c.k) {
      case CK::Block: {
        SP body = seq(c.body, visible);
        auto annot = c.annot.empty() ? infer_annot(body, visible) : c.annot;
        return s_cmd(c_block(body, std::move(annot)), rest);
      }
      case CK::For: {
        auto vis = visible;
        vis.erase(std::remove(vis.begin(), vis.end(), c.loop_var), vis.end());
        SP body = seq(c.body, vis);
        auto annot = c.annot.empty() ? infer_annot(body, vis) : c.annot;
        return s_cmd(c_for(c.loop_var, expr(c.bound), body, std::move(annot),
                           c.inv_var, c.invariant),
                     rest);
      }
      case CK::Assign:
        return s_cmd(c_assign(c.targets, expr(c.src)), rest);
      case CK::Inc:
      case CK::Dec:
        return s_cmd(c.k == CK::Inc ? c_inc(c.var) : c_dec(c.var), rest);
      case CK::Call: {
        std::vector<EP> args;
        for (const auto& a : c.args) args.push_back(expr(a));
        std::vector<std::string> outs = c.call_outs;
        for (const auto& g : c.globals) {
          args.push_back(e_var(g));
          outs.push_back(g);
        }
        if (args.empty()) args.push_back(e_star());
        std::set<std::string> seen;
        for (const auto& r : outs)
          if (!seen.insert(r).second)
            throw DesugarError{"duplicate out target " + r + " in a call"};
        return s_cmd(c_call(expr(c.callee), std::move(args), std::move(outs), {},
                            c.inst),
                     rest);
      }
      case CK::SubstHint:
        return s_cmd(c_subst_hint(c.hint_hole, c.hint_items, c.hint_label,
                                  c.hint_ev ? expr(c.hint_ev) : nullptr),
                     rest);
      case CK::Label: {
        // k:{s}_z = cst z' = z; callcc(proc(in k; out z){z := z'; s}; z)
        std::vector<std::string> zs =
            c.annot.empty() ? infer_annot(c.body, visible) : c.annot;
        if (zs.empty())
          throw DesugarError{"label " + c.label_name +
                             " needs at least one mutable variable"};
        std::vector<std::string> primes;
        for (const auto& z : zs) primes.push_back(fresh(z));
        SP body = seq(c.body, visible);
        SP inner = body;
        for (std::size_t i = zs.size(); i-- > 0;)
          inner = s_cmd(c_assign({zs[i]}, e_var(primes[i])), inner);
        std::vector<DI> ktype;
        if (!c.label_types.empty())
          ktype.push_back(types::di_proc(c.label_ivars, c.label_types,
                                         {types::di_bottom()}));
        EP handler = e_proc({}, {c.label_name}, zs, inner, std::move(ktype),
                            c.label_types);
        SP call = s_cmd(c_call(e_callcc(), {handler}, zs), rest);
        for (std::size_t i = zs.size(); i-- > 0;)
          call = s_cst(primes[i], e_var(zs[i]), call);
        return call;
      }
      case CK::Jump: {
        std::vector<EP> args{expr(c.jump_target)};
        for (const auto& a : c.jump_args) args.push_back(expr(a));
        return s_cmd(c_call(e_throw(), std::move(args), c.jump_outs), rest);
      }
    }
    return rest;
  }
};

void collect_names_seq(const SP& s, std::set<std::string>& out);

void collect_names_expr(const EP& e, std::set<std::string>& out) {
  if (e->k == EK::Var) out.insert(e->name);
  for (const auto& c : e->comps) collect_names_expr(c, out);
  if (e->k == EK::Proc) {
    for (const auto& n : e->ins) out.insert(n);
    for (const auto& n : e->outs) out.insert(n);
    for (const auto& n : e->globals) out.insert(n);
    collect_names_seq(e->body, out);
  }
}

void collect_names_seq(const SP& s, std::set<std::string>& out) {
  switch (s->k) {
    case SK::Empty:
      return;
    case SK::Cst:
    case SK::Var:
      out.insert(s->name);
      collect_names_expr(s->init, out);
      collect_names_seq(s->rest, out);
      return;
    case SK::Cmd: {
      const Command& c = *s->cmd;
      if (c.body) collect_names_seq(c.body, out);
      if (c.bound) collect_names_expr(c.bound, out);
      if (c.src) collect_names_expr(c.src, out);
      if (c.callee) collect_names_expr(c.callee, out);
      if (c.hint_ev) collect_names_expr(c.hint_ev, out);
      if (c.jump_target) collect_names_expr(c.jump_target, out);
      for (const auto& a : c.args) collect_names_expr(a, out);
      for (const auto& a : c.jump_args) collect_names_expr(a, out);
      for (const auto& n : c.annot) out.insert(n);
      for (const auto& n : c.targets) out.insert(n);
      for (const auto& n : c.call_outs) out.insert(n);
      for (const auto& n : c.globals) out.insert(n);
      for (const auto& n : c.jump_outs) out.insert(n);
      if (!c.var.empty()) out.insert(c.var);
      if (!c.loop_var.empty()) out.insert(c.loop_var);
      if (!c.label_name.empty()) out.insert(c.label_name);
      collect_names_seq(s->rest, out);
      return;
    }
  }
}

}  // namespace

SP i_desugar(const SP& s) {
  Desugarer d;
  collect_names_seq(s, d.used);
  return d.seq(s, {});
}

// ------------------------------------------------------------- transitions

namespace {

IStepResult stuck(const State& st, const std::string& why) {
  return {IStatus::Stuck, st, why};
}

}  // namespace

IStepResult i_step(const State& st) {
  const SP& s = st.seq;
  const Store& mu = st.store;
  switch (s->k) {
    case SK::Empty:
      return {IStatus::AtEmpty, st, ""};
    case SK::Cst: {  // S.CST
      EP w = eval_expr(mu, s->init);
      if (!w) return stuck(st, "unbound variable in cst " + s->name);
      return {IStatus::Stepped, {subst_ro(s->rest, {{s->name, w}}), mu}, ""};
    }
    case SK::Var: {
      if (s->rest->k == SK::Empty)  // S.VAR-I
        return {IStatus::Stepped, {s_empty(), mu}, ""};
      EP w = eval_expr(mu, s->init);
      if (!w) return stuck(st, "unbound variable in var " + s->name);
      Store ext = mu;
      ext.extend(s->name, w);
      auto inner = i_step({s->rest, std::move(ext)});  // S.VAR-II
      if (inner.status != IStatus::Stepped) return inner;
      Store& st2 = inner.state.store;
      if (st2.items.empty() || st2.items.back().first != s->name)
        return stuck(st, "internal: store shape under var " + s->name);
      EP w2 = st2.items.back().second;
      st2.items.pop_back();
      return {IStatus::Stepped,
              {s_var(s->name, w2, inner.state.seq), std::move(st2)},
              ""};
    }
    case SK::Cmd:
      break;
  }
  const Command& c = *s->cmd;
  switch (c.k) {
    case CK::Block: {
      if (c.body->k == SK::Empty)  // S.BLOCK-I
        return {IStatus::Stepped, {s->rest, mu}, ""};
      auto inner = i_step({c.body, mu});  // S.BLOCK-II
      if (inner.status != IStatus::Stepped) return inner;
      return {IStatus::Stepped,
              {s_cmd(c_block(inner.state.seq, c.annot), s->rest),
               std::move(inner.state.store)},
              ""};
    }
    case CK::Assign: {  // S.ASSIGN
      EP w = eval_expr(mu, c.src);
      if (!w) return stuck(st, "unbound variable in assignment");
      Store mu2 = mu;
      if (c.targets.size() == 1) {
        if (!mu2.update(c.targets[0], w))
          return stuck(st, "assignment to unbound mutable " + c.targets[0]);
      } else {
        if (w->k != EK::Tuple || w->comps.size() != c.targets.size())
          return stuck(st, "tuple assignment arity mismatch");
        for (std::size_t i = 0; i < c.targets.size(); ++i)
          if (!mu2.update(c.targets[i], w->comps[i]))
            return stuck(st, "assignment to unbound mutable " + c.targets[i]);
      }
      return {IStatus::Stepped, {s->rest, std::move(mu2)}, ""};
    }
    case CK::Inc:
    case CK::Dec: {  // S.INC / S.DEC
      const EP* v = mu.lookup(c.var);
      if (!v) return stuck(st, "unbound mutable " + c.var);
      if ((*v)->k != EK::Num)
        return stuck(st, (c.k == CK::Inc ? "inc" : "dec") + std::string(" of a non-numeral"));
      Nat q = (*v)->num;
      Nat q2 = c.k == CK::Inc ? q + 1 : (q == 0 ? Nat(0) : Nat(q - 1));
      return {IStatus::Stepped,
              {s_cmd(c_assign({c.var}, e_num(q2)), s->rest), mu},
              ""};
    }
    case CK::Call: {  // S.CALL
      EP pv = eval_expr(mu, c.callee);
      if (!pv) return stuck(st, "unbound procedure variable");
      if (pv->k == EK::CallccConst || pv->k == EK::ThrowConst)
        return stuck(st, "ClassicalPrimitive: callcc/throw have no direct semantics");
      if (pv->k != EK::Proc) return stuck(st, "calling a non-procedure");
      if (pv->ins.size() != c.args.size())
        return stuck(st, "call arity mismatch");
      if (pv->outs.size() != c.call_outs.size())
        return stuck(st, "call out-arity mismatch");
      std::map<std::string, EP> env;
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        EP w = eval_expr(mu, c.args[i]);
        if (!w) return stuck(st, "unbound variable in call argument");
        env[pv->ins[i]] = w;
      }
      std::map<std::string, std::string> ren;
      for (std::size_t i = 0; i < pv->outs.size(); ++i)
        ren[pv->outs[i]] = c.call_outs[i];
      SP body = rename_mut(subst_ro(pv->body, env), ren);
      Store mu2 = mu;
      for (const auto& r : c.call_outs)
        if (!mu2.update(r, e_star()))
          return stuck(st, "unbound out target " + r);
      return {IStatus::Stepped,
              {s_cmd(c_block(body, c.call_outs), s->rest), std::move(mu2)},
              ""};
    }
    case CK::For: {
      EP b = eval_expr(mu, c.bound);
      if (!b) return stuck(st, "unbound variable in loop bound");
      if (b->k != EK::Num) return stuck(st, "non-numeral loop bound");
      if (b->num == 0)  // S.FOR-I
        return {IStatus::Stepped, {s->rest, mu}, ""};
      // S.FOR-II: peel the last iteration
      Nat q = b->num - 1;
      SP peeled = subst_ro(c.body, {{c.loop_var, e_num(q)}});
      SP inner = s_cmd(c_for(c.loop_var, e_num(q), c.body, c.annot, c.inv_var,
                             c.invariant),
                       peeled);
      return {IStatus::Stepped,
              {s_cmd(c_block(inner, c.annot), s->rest), mu},
              ""};
    }
    case CK::SubstHint:  // no dynamic content
      return {IStatus::Stepped, {s->rest, mu}, ""};
    case CK::Label:
    case CK::Jump:
      return stuck(st, "labels/jumps must be desugared before running");
  }
  return stuck(st, "internal: unhandled command");
}

IRunResult i_run(SP s, Store mu, long long fuel) {
  State st{std::move(s), std::move(mu)};
  for (long long i = 0; i <= fuel; ++i) {
    auto r = i_step(st);
    if (r.status == IStatus::AtEmpty) return {IRunStatus::Done, st.store, st, i, ""};
    if (r.status == IStatus::Stuck)
      return {IRunStatus::Stuck, st.store, st, i, r.why};
    if (i == fuel) break;
    st = std::move(r.state);
  }
  return {IRunStatus::FuelExhausted, st.store, st, fuel, ""};
}

// ------------------------------------------------------------------- show

namespace {

void show_expr(const EP& e, std::ostringstream& os);
void show_seq(const SP& s, std::ostringstream& os);

void show_names(const std::vector<std::string>& ns, std::ostringstream& os) {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (i) os << ", ";
    os << ns[i];
  }
}

void show_annot(const std::vector<std::string>& ns, std::ostringstream& os) {
  os << "[";
  show_names(ns, os);
  os << "]";
}

void show_expr(const EP& e, std::ostringstream& os) {
  switch (e->k) {
    case EK::Var: os << e->name; return;
    case EK::Star: os << "*"; return;
    case EK::Num: os << e->num.str(); return;
    case EK::CallccConst: os << "callcc"; return;
    case EK::ThrowConst: os << "throw"; return;
    case EK::Tuple: {
      os << "(";
      for (std::size_t i = 0; i < e->comps.size(); ++i) {
        if (i) os << ", ";
        show_expr(e->comps[i], os);
      }
      os << ")";
      return;
    }
    case EK::Proc: {
      os << "proc ";
      if (!e->ivars.empty()) {
        os << "forall ";
        show_names(e->ivars, os);
        os << " ";
      }
      os << "(in ";
      for (std::size_t i = 0; i < e->ins.size(); ++i) {
        if (i) os << ", ";
        os << e->ins[i];
        if (i < e->in_types.size() && e->in_types[i])
          os << ": " << types::show(e->in_types[i]);
      }
      os << "; out ";
      for (std::size_t i = 0; i < e->outs.size(); ++i) {
        if (i) os << ", ";
        os << e->outs[i];
        if (i < e->out_types.size() && e->out_types[i])
          os << ": " << types::show(e->out_types[i]);
      }
      os << ") ";
      if (!e->globals.empty()) {
        show_annot(e->globals, os);
        os << " ";
      }
      os << "{ ";
      show_seq(e->body, os);
      os << "}";
      return;
    }
  }
}

void show_cmd(const Command& c, std::ostringstream& os) {
  switch (c.k) {
    case CK::Block:
      os << "{ ";
      show_seq(c.body, os);
      os << "}";
      show_annot(c.annot, os);
      os << ";";
      return;
    case CK::For: {
      os << "for " << c.loop_var << " := 0 until ";
      show_expr(c.bound, os);
      if (c.inv_var) {
        os << " invariant [" << *c.inv_var << " | ";
        for (std::size_t i = 0; i < c.invariant.size(); ++i) {
          if (i) os << ", ";
          os << c.invariant[i].first << ": " << types::show(c.invariant[i].second);
        }
        os << "]";
      }
      os << " { ";
      show_seq(c.body, os);
      os << "}";
      show_annot(c.annot, os);
      os << ";";
      return;
    }
    case CK::Assign:
      show_names(c.targets, os);
      os << " := ";
      show_expr(c.src, os);
      os << ";";
      return;
    case CK::Inc:
      os << "inc(" << c.var << ");";
      return;
    case CK::Dec:
      os << "dec(" << c.var << ");";
      return;
    case CK::Call: {
      show_expr(c.callee, os);
      if (!c.inst.empty()) {
        os << "{";
        for (std::size_t i = 0; i < c.inst.size(); ++i) {
          if (i) os << ", ";
          os << c.inst[i].first << " := " << types::show(c.inst[i].second);
        }
        os << "}";
      }
      os << "(";
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i) os << ", ";
        show_expr(c.args[i], os);
      }
      os << "; ";
      show_names(c.call_outs, os);
      os << ")";
      if (!c.globals.empty()) show_annot(c.globals, os);
      os << ";";
      return;
    }
    case CK::SubstHint: {
      os << "subst ";
      if (c.hint_hole) os << "[" << *c.hint_hole << " | ";
      for (std::size_t i = 0; i < c.hint_items.size(); ++i) {
        if (i) os << ", ";
        os << c.hint_items[i].first << ": " << types::show(c.hint_items[i].second);
      }
      if (c.hint_hole) os << "]";
      if (c.hint_label) os << " via (" << *c.hint_label << ")";
      else if (c.hint_ev) {
        os << " via ";
        show_expr(c.hint_ev, os);
      }
      os << ";";
      return;
    }
    case CK::Label: {
      os << c.label_name << " : ";
      if (!c.label_types.empty()) {
        os << "[";
        if (!c.label_ivars.empty()) {
          os << "forall ";
          show_names(c.label_ivars, os);
          os << ". ";
        }
        for (std::size_t i = 0; i < c.label_types.size(); ++i) {
          if (i) os << ", ";
          os << types::show(c.label_types[i]);
        }
        os << "] : ";
      }
      os << "{ ";
      show_seq(c.body, os);
      os << "}";
      show_annot(c.annot, os);
      os << ";";
      return;
    }
    case CK::Jump: {
      os << "jump(";
      show_expr(c.jump_target, os);
      for (const auto& a : c.jump_args) {
        os << ", ";
        show_expr(a, os);
      }
      os << ")";
      show_annot(c.jump_outs, os);
      os << ";";
      return;
    }
  }
}

void show_seq(const SP& s, std::ostringstream& os) {
  switch (s->k) {
    case SK::Empty:
      return;
    case SK::Cst:
      os << "cst " << s->name;
      if (!s->scheme_atoms.empty()) {
        os << " : forall ";
        show_names(s->scheme_atoms, os);
        os << ". " << types::show(s->decl_type);
      } else if (s->decl_type) {
        os << " : " << types::show(s->decl_type);
      }
      os << " = ";
      show_expr(s->init, os);
      os << "; ";
      show_seq(s->rest, os);
      return;
    case SK::Var:
      os << "var " << s->name << " := ";
      show_expr(s->init, os);
      os << "; ";
      show_seq(s->rest, os);
      return;
    case SK::Cmd:
      show_cmd(*s->cmd, os);
      os << " ";
      show_seq(s->rest, os);
      return;
  }
}

}  // namespace

std::string i_show(const SP& s) {
  std::ostringstream os;
  show_seq(s, os);
  std::string out = os.str();
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string i_show(const EP& e) {
  std::ostringstream os;
  show_expr(e, os);
  return os.str();
}

std::string show_store(const Store& mu) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < mu.items.size(); ++i) {
    if (i) os << ", ";
    os << mu.items[i].first << " = ";
    show_expr(mu.items[i].second, os);
  }
  os << "}";
  return os.str();
}

}  // namespace loopf::ilang
