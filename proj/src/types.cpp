#include "loopf/types.hpp"

#include <sstream>

namespace loopf::types {

using arith::FoKind;
using arith::FoTerm;

// ------------------------------------------------------------ constructors

namespace {
SF mk_sf(SFK k) { auto t = std::make_shared<SimpleFType>(); t->k = k; return t; }
SI mk_si(SIK k) { auto t = std::make_shared<SimpleIType>(); t->k = k; return t; }
DF mk_df(DFK k) { auto t = std::make_shared<DepFType>(); t->k = k; return t; }
DI mk_di(DIK k) { auto t = std::make_shared<DepIType>(); t->k = k; return t; }
}  // namespace

SF sf_nat() { static SF t = mk_sf(SFK::Nat); return t; }
SF sf_unit() { static SF t = mk_sf(SFK::Unit); return t; }
SF sf_bottom() { static SF t = mk_sf(SFK::Bottom); return t; }

SF sf_arrow(SF a, SF b) {
  auto t = mk_sf(SFK::Arrow);
  const_cast<SimpleFType&>(*t).a = std::move(a);
  const_cast<SimpleFType&>(*t).b = std::move(b);
  return t;
}

SF sf_product(std::vector<SF> comps) {
  if (comps.empty()) return sf_unit();
  if (comps.size() == 1) return comps[0];
  auto t = mk_sf(SFK::Product);
  const_cast<SimpleFType&>(*t).comps = std::move(comps);
  return t;
}

SF sf_atom(const std::string& name) {
  auto t = mk_sf(SFK::Atom);
  const_cast<SimpleFType&>(*t).atom = name;
  return t;
}

SI si_nat() { static SI t = mk_si(SIK::Nat); return t; }
SI si_unit() { static SI t = mk_si(SIK::Unit); return t; }
SI si_bottom() { static SI t = mk_si(SIK::Bottom); return t; }

SI si_proc(std::vector<SI> ins, std::vector<SI> outs) {
  auto t = mk_si(SIK::Proc);
  const_cast<SimpleIType&>(*t).ins = std::move(ins);
  const_cast<SimpleIType&>(*t).outs = std::move(outs);
  return t;
}

SI si_tuple(std::vector<SI> comps) {
  if (comps.empty()) return si_unit();
  if (comps.size() == 1) return comps[0];
  auto t = mk_si(SIK::Tuple);
  const_cast<SimpleIType&>(*t).comps = std::move(comps);
  return t;
}

SI si_atom(const std::string& name) {
  auto t = mk_si(SIK::Atom);
  const_cast<SimpleIType&>(*t).atom = name;
  return t;
}

SI si_not(std::vector<SI> ins) { return si_proc(std::move(ins), {si_bottom()}); }

DF df_nat(FoPtr n) {
  auto t = mk_df(DFK::Nat);
  const_cast<DepFType&>(*t).n = std::move(n);
  return t;
}

DF df_equal(FoPtr n, FoPtr m) {
  auto t = mk_df(DFK::Equal);
  const_cast<DepFType&>(*t).n = std::move(n);
  const_cast<DepFType&>(*t).m = std::move(m);
  return t;
}

DF df_top() { return df_equal(arith::fo_zero(), arith::fo_zero()); }

DF df_forall(std::vector<std::string> ivars, DF ant, DF cons) {
  auto t = mk_df(DFK::Forall);
  const_cast<DepFType&>(*t).ivars = std::move(ivars);
  const_cast<DepFType&>(*t).ant = std::move(ant);
  const_cast<DepFType&>(*t).cons = std::move(cons);
  return t;
}

DF df_exists(std::vector<std::string> ivars, std::vector<DF> comps) {
  if (ivars.empty() && comps.size() == 1) return comps[0];
  if (ivars.empty() && comps.empty()) return df_top();
  auto t = mk_df(DFK::Exists);
  const_cast<DepFType&>(*t).ivars = std::move(ivars);
  const_cast<DepFType&>(*t).comps = std::move(comps);
  return t;
}

DF df_bottom() { static DF t = mk_df(DFK::Bottom); return t; }
DF df_o() { static DF t = mk_df(DFK::O); return t; }
DF df_any() { static DF t = mk_df(DFK::Any); return t; }

DF df_atom(const std::string& name) {
  auto t = mk_df(DFK::Atom);
  const_cast<DepFType&>(*t).atom = name;
  return t;
}

DF df_not(DF a) { return df_forall({}, std::move(a), df_bottom()); }
DF df_nabla(DF a) { return df_forall({}, df_forall({}, std::move(a), df_o()), df_o()); }

DI di_nat(FoPtr n) {
  auto t = mk_di(DIK::Nat);
  const_cast<DepIType&>(*t).n = std::move(n);
  return t;
}

DI di_equal(FoPtr n, FoPtr m) {
  auto t = mk_di(DIK::Equal);
  const_cast<DepIType&>(*t).n = std::move(n);
  const_cast<DepIType&>(*t).m = std::move(m);
  return t;
}

DI di_top() { return di_equal(arith::fo_zero(), arith::fo_zero()); }

DI di_proc(std::vector<std::string> ivars, std::vector<DI> ins, std::vector<DI> outs) {
  auto t = mk_di(DIK::Proc);
  const_cast<DepIType&>(*t).ivars = std::move(ivars);
  const_cast<DepIType&>(*t).ins = std::move(ins);
  const_cast<DepIType&>(*t).outs = std::move(outs);
  return t;
}

DI di_exists(std::vector<std::string> ivars, std::vector<DI> comps) {
  if (ivars.empty() && comps.size() == 1) return comps[0];
  if (ivars.empty() && comps.empty()) return di_top();
  auto t = mk_di(DIK::Exists);
  const_cast<DepIType&>(*t).ivars = std::move(ivars);
  const_cast<DepIType&>(*t).comps = std::move(comps);
  return t;
}

DI di_bottom() { static DI t = mk_di(DIK::Bottom); return t; }
DI di_any() { static DI t = mk_di(DIK::Any); return t; }

DI di_atom(const std::string& name) {
  auto t = mk_di(DIK::Atom);
  const_cast<DepIType&>(*t).atom = name;
  return t;
}

DI di_not(std::vector<DI> ins) { return di_proc({}, std::move(ins), {di_bottom()}); }

// ----------------------------------------------------------------- equality

namespace {

// Bound-variable correspondence for alpha comparison of index binders.
struct BinderEnv {
  std::vector<std::pair<std::string, std::string>> pairs;

  void push(const std::vector<std::string>& l, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < l.size(); ++i) pairs.emplace_back(l[i], r[i]);
  }
  void pop(std::size_t n) { pairs.resize(pairs.size() - n); }

  bool vars_eq(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      if (it->first == a || it->second == b) return it->first == a && it->second == b;
    }
    return a == b;
  }
};

bool fo_eq(const FoPtr& a, const FoPtr& b, const BinderEnv& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FoKind::Var: return env.vars_eq(a->name, b->name);
    case FoKind::Zero: return true;
    case FoKind::Succ:
      return a->count == b->count && fo_eq(a->args[0], b->args[0], env);
    case FoKind::App:
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!fo_eq(a->args[i], b->args[i], env)) return false;
  return true;
}

template <typename T>
bool vec_eq(const std::vector<std::shared_ptr<const T>>& a,
            const std::vector<std::shared_ptr<const T>>& b, BinderEnv& env,
            bool any_ok);

bool eq_df(const DF& a, const DF& b, BinderEnv& env, bool any_ok) {
  if (any_ok && (a->k == DFK::Any || b->k == DFK::Any)) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
    case DFK::Nat: return fo_eq(a->n, b->n, env);
    case DFK::Equal: return fo_eq(a->n, b->n, env) && fo_eq(a->m, b->m, env);
    case DFK::Forall: {
      if (a->ivars.size() != b->ivars.size()) return false;
      env.push(a->ivars, b->ivars);
      bool r = eq_df(a->ant, b->ant, env, any_ok) && eq_df(a->cons, b->cons, env, any_ok);
      env.pop(a->ivars.size());
      return r;
    }
    case DFK::Exists: {
      if (a->ivars.size() != b->ivars.size() || a->comps.size() != b->comps.size())
        return false;
      env.push(a->ivars, b->ivars);
      bool r = true;
      for (std::size_t i = 0; r && i < a->comps.size(); ++i)
        r = eq_df(a->comps[i], b->comps[i], env, any_ok);
      env.pop(a->ivars.size());
      return r;
    }
    case DFK::Atom: return a->atom == b->atom;
    default: return true;  // Bottom, O, Any
  }
}

bool eq_di(const DI& a, const DI& b, BinderEnv& env, bool any_ok) {
  if (any_ok && (a->k == DIK::Any || b->k == DIK::Any)) return true;
  if (a->k != b->k) return false;
  switch (a->k) {
    case DIK::Nat: return fo_eq(a->n, b->n, env);
    case DIK::Equal: return fo_eq(a->n, b->n, env) && fo_eq(a->m, b->m, env);
    case DIK::Proc: {
      if (a->ivars.size() != b->ivars.size() || a->ins.size() != b->ins.size() ||
          a->outs.size() != b->outs.size())
        return false;
      env.push(a->ivars, b->ivars);
      bool r = true;
      for (std::size_t i = 0; r && i < a->ins.size(); ++i)
        r = eq_di(a->ins[i], b->ins[i], env, any_ok);
      for (std::size_t i = 0; r && i < a->outs.size(); ++i)
        r = eq_di(a->outs[i], b->outs[i], env, any_ok);
      env.pop(a->ivars.size());
      return r;
    }
    case DIK::Exists: {
      if (a->ivars.size() != b->ivars.size() || a->comps.size() != b->comps.size())
        return false;
      env.push(a->ivars, b->ivars);
      bool r = true;
      for (std::size_t i = 0; r && i < a->comps.size(); ++i)
        r = eq_di(a->comps[i], b->comps[i], env, any_ok);
      env.pop(a->ivars.size());
      return r;
    }
    case DIK::Atom: return a->atom == b->atom;
    default: return true;
  }
}

bool eq_sf(const SF& a, const SF& b) {
  if (a->k != b->k) return false;
  switch (a->k) {
    case SFK::Arrow: return eq_sf(a->a, b->a) && eq_sf(a->b, b->b);
    case SFK::Product: {
      if (a->comps.size() != b->comps.size()) return false;
      for (std::size_t i = 0; i < a->comps.size(); ++i)
        if (!eq_sf(a->comps[i], b->comps[i])) return false;
      return true;
    }
    case SFK::Atom: return a->atom == b->atom;
    default: return true;
  }
}

bool eq_si(const SI& a, const SI& b, bool any_ok) {
  if (a->k != b->k) return false;
  switch (a->k) {
    case SIK::Proc: {
      if (a->ins.size() != b->ins.size() || a->outs.size() != b->outs.size())
        return false;
      for (std::size_t i = 0; i < a->ins.size(); ++i)
        if (!eq_si(a->ins[i], b->ins[i], any_ok)) return false;
      for (std::size_t i = 0; i < a->outs.size(); ++i)
        if (!eq_si(a->outs[i], b->outs[i], any_ok)) return false;
      return true;
    }
    case SIK::Tuple: {
      if (a->comps.size() != b->comps.size()) return false;
      for (std::size_t i = 0; i < a->comps.size(); ++i)
        if (!eq_si(a->comps[i], b->comps[i], any_ok)) return false;
      return true;
    }
    case SIK::Atom: return a->atom == b->atom;
    default: return true;
  }
}

}  // namespace

bool alpha_eq(const SF& a, const SF& b) { return eq_sf(a, b); }
bool alpha_eq(const SI& a, const SI& b) { return eq_si(a, b, false); }
bool alpha_eq(const DF& a, const DF& b) { BinderEnv e; return eq_df(a, b, e, false); }
bool alpha_eq(const DI& a, const DI& b) { BinderEnv e; return eq_di(a, b, e, false); }

bool compat(const DF& a, const DF& b) { BinderEnv e; return eq_df(a, b, e, true); }
bool compat(const DI& a, const DI& b) { BinderEnv e; return eq_di(a, b, e, true); }
bool compat(const SI& a, const SI& b) { return eq_si(a, b, true); }

// ----------------------------------------------------- free vars and subst

namespace {

bool fo_contains2(const FoPtr& t, const std::string& v) {
  if (t->kind == FoKind::Var) return t->name == v;
  for (const auto& a : t->args)
    if (fo_contains2(a, v)) return true;
  return false;
}

template <typename Vec>
bool in_vec(const Vec& v, const std::string& s) {
  for (const auto& x : v)
    if (x == s) return true;
  return false;
}

}  // namespace

bool contains_var(const DF& t, const std::string& v) {
  switch (t->k) {
    case DFK::Nat: return fo_contains2(t->n, v);
    case DFK::Equal: return fo_contains2(t->n, v) || fo_contains2(t->m, v);
    case DFK::Forall:
      if (in_vec(t->ivars, v)) return false;
      return contains_var(t->ant, v) || contains_var(t->cons, v);
    case DFK::Exists: {
      if (in_vec(t->ivars, v)) return false;
      for (const auto& c : t->comps)
        if (contains_var(c, v)) return true;
      return false;
    }
    default: return false;
  }
}

bool contains_var(const DI& t, const std::string& v) {
  switch (t->k) {
    case DIK::Nat: return fo_contains2(t->n, v);
    case DIK::Equal: return fo_contains2(t->n, v) || fo_contains2(t->m, v);
    case DIK::Proc: {
      if (in_vec(t->ivars, v)) return false;
      for (const auto& c : t->ins)
        if (contains_var(c, v)) return true;
      for (const auto& c : t->outs)
        if (contains_var(c, v)) return true;
      return false;
    }
    case DIK::Exists: {
      if (in_vec(t->ivars, v)) return false;
      for (const auto& c : t->comps)
        if (contains_var(c, v)) return true;
      return false;
    }
    default: return false;
  }
}

bool contains_any(const DF& t) {
  switch (t->k) {
    case DFK::Any: return true;
    case DFK::Forall: return contains_any(t->ant) || contains_any(t->cons);
    case DFK::Exists:
      for (const auto& c : t->comps)
        if (contains_any(c)) return true;
      return false;
    default: return false;
  }
}

bool contains_any(const DI& t) {
  switch (t->k) {
    case DIK::Any: return true;
    case DIK::Proc:
      for (const auto& c : t->ins)
        if (contains_any(c)) return true;
      for (const auto& c : t->outs)
        if (contains_any(c)) return true;
      return false;
    case DIK::Exists:
      for (const auto& c : t->comps)
        if (contains_any(c)) return true;
      return false;
    default: return false;
  }
}

namespace {

// Rename binders on demand so substitution stays capture free.
std::string pick_fresh(const std::string& base,
                       const std::map<std::string, FoPtr>& env,
                       const std::vector<std::string>& taken) {
  std::string cand = base;
  auto clashes = [&](const std::string& c) {
    if (env.count(c)) return true;
    for (const auto& [k, v] : env)
      if (fo_contains2(v, c)) return true;
    return in_vec(taken, c);
  };
  int i = 0;
  while (clashes(cand)) cand = base + "'" + (i ? std::to_string(i) : ""), ++i;
  return cand;
}

template <typename T, typename Rec>
std::pair<std::vector<std::string>, std::map<std::string, FoPtr>> open_binders(
    const std::vector<std::string>& ivars, std::map<std::string, FoPtr> env,
    Rec) {
  // Remove shadowed vars; rename binders clashing with env's free vars.
  std::vector<std::string> fresh = ivars;
  for (const auto& v : ivars) env.erase(v);
  bool clash = false;
  for (const auto& v : ivars)
    for (const auto& [k, rep] : env)
      if (fo_contains2(rep, v)) clash = true;
  if (clash) {
    for (auto& v : fresh) {
      std::string nv = pick_fresh(v, env, fresh);
      if (nv != v) {
        env[v] = arith::fo_var(nv);
        v = nv;
      }
    }
  }
  return {fresh, env};
}

}  // namespace

DF subst_index_many(const DF& t, const std::map<std::string, FoPtr>& env) {
  if (env.empty()) return t;
  switch (t->k) {
    case DFK::Nat: return df_nat(arith::fo_subst_many(t->n, env));
    case DFK::Equal:
      return df_equal(arith::fo_subst_many(t->n, env), arith::fo_subst_many(t->m, env));
    case DFK::Forall: {
      auto [ivars, env2] = open_binders<DepFType>(t->ivars, env, 0);
      if (env2.empty()) return t;
      return df_forall(ivars, subst_index_many(t->ant, env2),
                       subst_index_many(t->cons, env2));
    }
    case DFK::Exists: {
      auto [ivars, env2] = open_binders<DepFType>(t->ivars, env, 0);
      if (env2.empty()) return t;
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(subst_index_many(c, env2));
      return df_exists(ivars, std::move(comps));
    }
    default:
      return t;
  }
}

DI subst_index_many(const DI& t, const std::map<std::string, FoPtr>& env) {
  if (env.empty()) return t;
  switch (t->k) {
    case DIK::Nat: return di_nat(arith::fo_subst_many(t->n, env));
    case DIK::Equal:
      return di_equal(arith::fo_subst_many(t->n, env), arith::fo_subst_many(t->m, env));
    case DIK::Proc: {
      auto [ivars, env2] = open_binders<DepIType>(t->ivars, env, 0);
      if (env2.empty()) return t;
      std::vector<DI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(subst_index_many(c, env2));
      for (const auto& c : t->outs) outs.push_back(subst_index_many(c, env2));
      return di_proc(ivars, std::move(ins), std::move(outs));
    }
    case DIK::Exists: {
      auto [ivars, env2] = open_binders<DepIType>(t->ivars, env, 0);
      if (env2.empty()) return t;
      std::vector<DI> comps;
      for (const auto& c : t->comps) comps.push_back(subst_index_many(c, env2));
      return di_exists(ivars, std::move(comps));
    }
    default:
      return t;
  }
}

DF subst_index(const DF& t, const std::string& var, const FoPtr& n) {
  return subst_index_many(t, {{var, n}});
}

DI subst_index(const DI& t, const std::string& var, const FoPtr& n) {
  return subst_index_many(t, {{var, n}});
}

DF subst_atoms(const DF& t, const std::map<std::string, DF>& env) {
  switch (t->k) {
    case DFK::Atom: {
      auto it = env.find(t->atom);
      return it == env.end() ? t : it->second;
    }
    case DFK::Forall:
      return df_forall(t->ivars, subst_atoms(t->ant, env), subst_atoms(t->cons, env));
    case DFK::Exists: {
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(subst_atoms(c, env));
      return df_exists(t->ivars, std::move(comps));
    }
    default:
      return t;
  }
}

DI subst_atoms(const DI& t, const std::map<std::string, DI>& env) {
  switch (t->k) {
    case DIK::Atom: {
      auto it = env.find(t->atom);
      return it == env.end() ? t : it->second;
    }
    case DIK::Proc: {
      std::vector<DI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(subst_atoms(c, env));
      for (const auto& c : t->outs) outs.push_back(subst_atoms(c, env));
      return di_proc(t->ivars, std::move(ins), std::move(outs));
    }
    case DIK::Exists: {
      std::vector<DI> comps;
      for (const auto& c : t->comps) comps.push_back(subst_atoms(c, env));
      return di_exists(t->ivars, std::move(comps));
    }
    default:
      return t;
  }
}

SI subst_atoms(const SI& t, const std::map<std::string, SI>& env) {
  switch (t->k) {
    case SIK::Atom: {
      auto it = env.find(t->atom);
      return it == env.end() ? t : it->second;
    }
    case SIK::Proc: {
      std::vector<SI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(subst_atoms(c, env));
      for (const auto& c : t->outs) outs.push_back(subst_atoms(c, env));
      return si_proc(std::move(ins), std::move(outs));
    }
    case SIK::Tuple: {
      std::vector<SI> comps;
      for (const auto& c : t->comps) comps.push_back(subst_atoms(c, env));
      return si_tuple(std::move(comps));
    }
    default:
      return t;
  }
}

DF subst_o(const DF& t, const DF& target) {
  switch (t->k) {
    case DFK::O: return target;
    case DFK::Forall:
      return df_forall(t->ivars, subst_o(t->ant, target), subst_o(t->cons, target));
    case DFK::Exists: {
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(subst_o(c, target));
      return df_exists(t->ivars, std::move(comps));
    }
    default:
      return t;
  }
}

// ------------------------------------------------------------ translations

std::optional<SF> kappa_f(const DF& t) {
  switch (t->k) {
    case DFK::Nat: return sf_nat();
    case DFK::Equal: return sf_unit();
    case DFK::Forall: {
      auto a = kappa_f(t->ant);
      auto b = kappa_f(t->cons);
      if (!a || !b) return std::nullopt;
      return sf_arrow(*a, *b);
    }
    case DFK::Exists: {
      std::vector<SF> comps;
      for (const auto& c : t->comps) {
        auto k = kappa_f(c);
        if (!k) return std::nullopt;
        comps.push_back(*k);
      }
      return sf_product(std::move(comps));
    }
    case DFK::Atom: return sf_atom(t->atom);
    default: return std::nullopt;  // Bottom, O, Any
  }
}

std::optional<SI> kappa_i(const DI& t) {
  switch (t->k) {
    case DIK::Nat: return si_nat();
    case DIK::Equal: return si_unit();
    case DIK::Proc: {
      std::vector<SI> ins, outs;
      for (const auto& c : t->ins) {
        auto k = c->k == DIK::Bottom ? std::optional<SI>(si_bottom()) : kappa_i(c);
        if (!k) return std::nullopt;
        ins.push_back(*k);
      }
      for (const auto& c : t->outs) {
        auto k = c->k == DIK::Bottom ? std::optional<SI>(si_bottom()) : kappa_i(c);
        if (!k) return std::nullopt;
        outs.push_back(*k);
      }
      return si_proc(std::move(ins), std::move(outs));
    }
    case DIK::Exists: {
      std::vector<SI> comps;
      for (const auto& c : t->comps) {
        auto k = kappa_i(c);
        if (!k) return std::nullopt;
        comps.push_back(*k);
      }
      return si_tuple(std::move(comps));
    }
    case DIK::Atom: return si_atom(t->atom);
    default: return std::nullopt;
  }
}

SF pack_sf(const std::vector<SF>& v) {
  return sf_product(v);
}

DF pack_df(const std::vector<DF>& v) {
  if (v.empty()) return df_top();
  if (v.size() == 1) return v[0];
  return df_exists({}, v);
}

std::vector<SF> unpack_sf(const SF& t) {
  if (t->k == SFK::Product) return t->comps;
  return {t};
}

std::vector<DF> unpack_df(const DF& t) {
  if (t->k == DFK::Exists && t->ivars.empty()) return t->comps;
  return {t};
}

SF star_type(const SI& t) {
  switch (t->k) {
    case SIK::Nat: return sf_nat();
    case SIK::Unit: return sf_unit();
    case SIK::Bottom: return sf_bottom();
    case SIK::Atom: return sf_atom(t->atom);
    case SIK::Tuple: {
      std::vector<SF> comps;
      for (const auto& c : t->comps) comps.push_back(star_type(c));
      return sf_product(std::move(comps));
    }
    case SIK::Proc: {
      std::vector<SF> ins, outs;
      for (const auto& c : t->ins) ins.push_back(star_type(c));
      for (const auto& c : t->outs) outs.push_back(star_type(c));
      return sf_arrow(pack_sf(ins), pack_sf(outs));
    }
  }
  return sf_unit();
}

DF star_type(const DI& t) {
  switch (t->k) {
    case DIK::Nat: return df_nat(t->n);
    case DIK::Equal: return df_equal(t->n, t->m);
    case DIK::Bottom: return df_bottom();
    case DIK::Atom: return df_atom(t->atom);
    case DIK::Any: return df_any();
    case DIK::Exists: {
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(star_type(c));
      return df_exists(t->ivars, std::move(comps));
    }
    case DIK::Proc: {
      std::vector<DF> ins, outs;
      for (const auto& c : t->ins) ins.push_back(star_type(c));
      for (const auto& c : t->outs) outs.push_back(star_type(c));
      return df_forall(t->ivars, pack_df(ins), pack_df(outs));
    }
  }
  return df_top();
}

SI diamond_type(const SF& t) {
  switch (t->k) {
    case SFK::Nat: return si_nat();
    case SFK::Unit: return si_unit();
    case SFK::Bottom: return si_bottom();
    case SFK::Atom: return si_atom(t->atom);
    case SFK::Product: {
      std::vector<SI> comps;
      for (const auto& c : t->comps) comps.push_back(diamond_type(c));
      return si_tuple(std::move(comps));
    }
    case SFK::Arrow: {
      std::vector<SI> ins, outs;
      for (const auto& c : unpack_sf(t->a)) ins.push_back(diamond_type(c));
      for (const auto& c : unpack_sf(t->b)) outs.push_back(diamond_type(c));
      return si_proc(std::move(ins), std::move(outs));
    }
  }
  return si_unit();
}

DI diamond_type(const DF& t) {
  switch (t->k) {
    case DFK::Nat: return di_nat(t->n);
    case DFK::Equal: return di_equal(t->n, t->m);
    case DFK::Bottom: return di_bottom();
    case DFK::Atom: return di_atom(t->atom);
    case DFK::Any: return di_any();
    case DFK::Exists: {
      std::vector<DI> comps;
      for (const auto& c : t->comps) comps.push_back(diamond_type(c));
      return di_exists(t->ivars, std::move(comps));
    }
    case DFK::Forall: {
      std::vector<DI> ins, outs;
      for (const auto& c : unpack_df(t->ant)) ins.push_back(diamond_type(c));
      for (const auto& c : unpack_df(t->cons)) outs.push_back(diamond_type(c));
      return di_proc(t->ivars, std::move(ins), std::move(outs));
    }
    case DFK::O:
      return di_atom("o");  // not expected; keeps the map total
  }
  return di_top();
}

DF cps_type(const DF& t) {
  switch (t->k) {
    case DFK::Nat:
    case DFK::Equal:
    case DFK::Atom:
      return t;
    case DFK::Bottom:
      return df_o();
    case DFK::O:
      return df_o();
    case DFK::Exists: {
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(cps_type(c));
      return df_exists(t->ivars, std::move(comps));
    }
    case DFK::Forall:
      // (not phi)^o = phi^o => o; general arrows get the nabla tail.
      if (t->ivars.empty() && t->cons->k == DFK::Bottom)
        return df_forall({}, cps_type(t->ant), df_o());
      return df_forall(t->ivars, cps_type(t->ant), df_nabla(cps_type(t->cons)));
    case DFK::Any:
      return t;
  }
  return t;
}

SF natural_type(const SF& t) {
  switch (t->k) {
    case SFK::Arrow: return sf_arrow(natural_type(t->a), natural_type(t->b));
    case SFK::Product: {
      std::vector<SF> comps;
      for (const auto& c : t->comps) comps.push_back(natural_type(c));
      return sf_product(std::move(comps));
    }
    default: return t;
  }
}

DF natural_type(const DF& t) {
  switch (t->k) {
    case DFK::Forall:
      return df_forall(t->ivars, natural_type(t->ant), natural_type(t->cons));
    case DFK::Exists: {
      std::vector<DF> comps;
      for (const auto& c : t->comps) comps.push_back(natural_type(c));
      return df_exists(t->ivars, std::move(comps));
    }
    default: return t;
  }
}

// ------------------------------------------------------------------- show

namespace {

void show_sf(const SF& t, std::ostringstream& os, bool arrow_left) {
  switch (t->k) {
    case SFK::Nat: os << "nat"; break;
    case SFK::Unit: os << "unit"; break;
    case SFK::Bottom: os << "bot"; break;
    case SFK::Atom: os << "'" << t->atom; break;
    case SFK::Product: {
      os << "(";
      for (std::size_t i = 0; i < t->comps.size(); ++i) {
        if (i) os << ", ";
        show_sf(t->comps[i], os, false);
      }
      os << ")";
      break;
    }
    case SFK::Arrow: {
      if (arrow_left) os << "(";
      show_sf(t->a, os, true);
      os << " -> ";
      show_sf(t->b, os, false);
      if (arrow_left) os << ")";
      break;
    }
  }
}

void show_df(const DF& t, std::ostringstream& os, bool nested) {
  switch (t->k) {
    case DFK::Nat: os << "nat(" << arith::fo_show(t->n) << ")"; break;
    case DFK::Equal:
      if (nested) os << "(";
      os << arith::fo_show(t->n) << " = " << arith::fo_show(t->m);
      if (nested) os << ")";
      break;
    case DFK::Bottom: os << "bot"; break;
    case DFK::O: os << "o"; break;
    case DFK::Any: os << "_"; break;
    case DFK::Atom: os << "'" << t->atom; break;
    case DFK::Exists: {
      if (!t->ivars.empty()) {
        os << "exists";
        for (std::size_t i = 0; i < t->ivars.size(); ++i)
          os << (i ? "," : " ") << t->ivars[i];
        os << ".";
      }
      os << "(";
      for (std::size_t i = 0; i < t->comps.size(); ++i) {
        if (i) os << " /\\ ";
        show_df(t->comps[i], os, true);
      }
      os << ")";
      break;
    }
    case DFK::Forall: {
      if (!t->ivars.empty()) {
        os << "forall";
        for (std::size_t i = 0; i < t->ivars.size(); ++i)
          os << (i ? "," : " ") << t->ivars[i];
        os << ".";
      }
      os << "(";
      show_df(t->ant, os, true);
      os << " => ";
      show_df(t->cons, os, true);
      os << ")";
      break;
    }
  }
}

void show_si(const SI& t, std::ostringstream& os) {
  switch (t->k) {
    case SIK::Nat: os << "nat"; break;
    case SIK::Unit: os << "unit"; break;
    case SIK::Bottom: os << "bot"; break;
    case SIK::Atom: os << "'" << t->atom; break;
    case SIK::Tuple: {
      os << "(";
      for (std::size_t i = 0; i < t->comps.size(); ++i) {
        if (i) os << ", ";
        show_si(t->comps[i], os);
      }
      os << ")";
      break;
    }
    case SIK::Proc: {
      os << "proc (in ";
      for (std::size_t i = 0; i < t->ins.size(); ++i) {
        if (i) os << ", ";
        show_si(t->ins[i], os);
      }
      os << "; out ";
      for (std::size_t i = 0; i < t->outs.size(); ++i) {
        if (i) os << ", ";
        show_si(t->outs[i], os);
      }
      os << ")";
      break;
    }
  }
}

void show_di(const DI& t, std::ostringstream& os, bool nested) {
  switch (t->k) {
    case DIK::Nat: os << "nat(" << arith::fo_show(t->n) << ")"; break;
    case DIK::Equal:
      if (t->n->kind == FoKind::Zero && t->m->kind == FoKind::Zero) {
        os << "top";
        break;
      }
      if (nested) os << "(";
      os << arith::fo_show(t->n) << " = " << arith::fo_show(t->m);
      if (nested) os << ")";
      break;
    case DIK::Bottom: os << "bot"; break;
    case DIK::Any: os << "_"; break;
    case DIK::Atom: os << "'" << t->atom; break;
    case DIK::Exists: {
      if (!t->ivars.empty()) {
        os << "exists";
        for (std::size_t i = 0; i < t->ivars.size(); ++i)
          os << (i ? "," : " ") << t->ivars[i];
        os << ".";
      }
      os << "(";
      for (std::size_t i = 0; i < t->comps.size(); ++i) {
        if (i) os << ", ";
        show_di(t->comps[i], os, true);
      }
      os << ")";
      break;
    }
    case DIK::Proc: {
      os << "proc ";
      if (!t->ivars.empty()) {
        os << "forall ";
        for (std::size_t i = 0; i < t->ivars.size(); ++i)
          os << (i ? "," : "") << t->ivars[i];
        os << " ";
      }
      os << "(in ";
      for (std::size_t i = 0; i < t->ins.size(); ++i) {
        if (i) os << ", ";
        show_di(t->ins[i], os, true);
      }
      os << "; out ";
      for (std::size_t i = 0; i < t->outs.size(); ++i) {
        if (i) os << ", ";
        show_di(t->outs[i], os, true);
      }
      os << ")";
      break;
    }
  }
}

}  // namespace

std::string show(const SF& t) { std::ostringstream os; show_sf(t, os, false); return os.str(); }
std::string show(const SI& t) { std::ostringstream os; show_si(t, os); return os.str(); }
std::string show(const DF& t) { std::ostringstream os; show_df(t, os, false); return os.str(); }
std::string show(const DI& t) { std::ostringstream os; show_di(t, os, false); return os.str(); }

// -------------------------------------------------------------- generator

std::uint64_t TypeGen::next() {
  // splitmix64
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t TypeGen::below(std::uint64_t n) { return n ? next() % n : 0; }

FoPtr TypeGen::gen_index(int depth) {
  static const char* vars[] = {"i", "j", "k", "n", "m"};
  if (depth <= 0) {
    switch (below(3)) {
      case 0: return arith::fo_zero();
      case 1: return arith::fo_num(below(4));
      default: return arith::fo_var(vars[below(5)]);
    }
  }
  switch (below(6)) {
    case 0: return arith::fo_succ(gen_index(depth - 1), 1 + below(2));
    case 1: return arith::fo_pred(gen_index(depth - 1));
    case 2: return arith::fo_add(gen_index(depth - 1), gen_index(depth - 1));
    case 3: return arith::fo_mul(gen_index(depth - 1), gen_index(depth - 1));
    default: return gen_index(0);
  }
}

SF TypeGen::gen_sf(int depth) {
  if (depth <= 0) return below(2) ? sf_nat() : sf_unit();
  switch (below(4)) {
    case 0: return sf_arrow(gen_sf(depth - 1), gen_sf(depth - 1));
    case 1: {
      std::size_t n = 2 + below(2);
      std::vector<SF> comps;
      for (std::size_t i = 0; i < n; ++i) comps.push_back(gen_sf(depth - 1));
      return sf_product(std::move(comps));
    }
    default: return gen_sf(0);
  }
}

SI TypeGen::gen_si(int depth) {
  if (depth <= 0) return below(2) ? si_nat() : si_unit();
  switch (below(4)) {
    case 0: {
      std::size_t ni = 1 + below(2), no = 1 + below(2);
      std::vector<SI> ins, outs;
      // length-1 vectors avoid tuple components so star/diamond stays a
      // bijection (see Prop 3.6)
      for (std::size_t i = 0; i < ni; ++i) {
        SI c = gen_si(depth - 1);
        if (ni == 1 && c->k == SIK::Tuple) c = si_nat();
        ins.push_back(c);
      }
      for (std::size_t i = 0; i < no; ++i) {
        SI c = gen_si(depth - 1);
        if (no == 1 && c->k == SIK::Tuple) c = si_nat();
        outs.push_back(c);
      }
      return si_proc(std::move(ins), std::move(outs));
    }
    case 1: {
      std::size_t n = 2 + below(2);
      std::vector<SI> comps;
      for (std::size_t i = 0; i < n; ++i) comps.push_back(gen_si(depth - 1));
      return si_tuple(std::move(comps));
    }
    default: return gen_si(0);
  }
}

DF TypeGen::gen_df(int depth) {
  if (depth <= 0) {
    if (below(2)) return df_nat(gen_index(1));
    return df_equal(gen_index(1), gen_index(1));
  }
  static const char* binders[] = {"i", "j", "k"};
  switch (below(4)) {
    case 0: {
      std::vector<std::string> iv;
      if (below(2)) iv.push_back(binders[below(3)]);
      return df_forall(std::move(iv), gen_df(depth - 1), gen_df(depth - 1));
    }
    case 1: {
      std::vector<std::string> iv;
      std::size_t n = 1 + below(2);
      if (below(2)) iv.push_back(binders[below(3)]);
      if (iv.empty() && n == 1) n = 2;
      std::vector<DF> comps;
      for (std::size_t i = 0; i < n; ++i) {
        DF c = gen_df(depth - 1);
        if (n == 1 && c->k == DFK::Exists && c->ivars.empty()) c = df_nat(gen_index(0));
        comps.push_back(c);
      }
      return df_exists(std::move(iv), std::move(comps));
    }
    default: return gen_df(0);
  }
}

DI TypeGen::gen_di(int depth) {
  if (depth <= 0) {
    if (below(2)) return di_nat(gen_index(1));
    return di_equal(gen_index(1), gen_index(1));
  }
  static const char* binders[] = {"i", "j", "k"};
  switch (below(4)) {
    case 0: {
      std::vector<std::string> iv;
      if (below(2)) iv.push_back(binders[below(3)]);
      std::size_t ni = 1 + below(2), no = 1 + below(2);
      std::vector<DI> ins, outs;
      auto clean = [&](std::size_t len, DI c) {
        if (len == 1 && c->k == DIK::Exists && c->ivars.empty()) return di_nat(gen_index(0));
        return c;
      };
      for (std::size_t i = 0; i < ni; ++i) ins.push_back(clean(ni, gen_di(depth - 1)));
      for (std::size_t i = 0; i < no; ++i) outs.push_back(clean(no, gen_di(depth - 1)));
      return di_proc(std::move(iv), std::move(ins), std::move(outs));
    }
    case 1: {
      std::vector<std::string> iv;
      std::size_t n = 1 + below(2);
      if (below(2)) iv.push_back(binders[below(3)]);
      if (iv.empty() && n == 1) n = 2;
      std::vector<DI> comps;
      for (std::size_t i = 0; i < n; ++i) {
        DI c = gen_di(depth - 1);
        if (n == 1 && c->k == DIK::Exists && c->ivars.empty()) c = di_nat(gen_index(0));
        comps.push_back(c);
      }
      return di_exists(std::move(iv), std::move(comps));
    }
    default: return gen_di(0);
  }
}

}  // namespace loopf::types
