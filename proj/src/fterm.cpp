#include "loopf/fterm.hpp"

#include <functional>
#include <sstream>

namespace loopf::flang {

using arith::FoKind;

namespace {

std::shared_ptr<FTerm> mk(FK k) {
  auto t = std::make_shared<FTerm>();
  t->k = k;
  t->count = 0;
  return t;
}

}  // namespace

FP f_var(const std::string& n) {
  auto t = mk(FK::Var);
  t->name = n;
  return t;
}

FP f_zero() { static FP t = mk(FK::Zero); return t; }
FP f_unit() { static FP t = mk(FK::Unit); return t; }
FP f_succ_const() { static FP t = mk(FK::SuccConst); return t; }
FP f_callcc() { static FP t = mk(FK::Callcc); return t; }
FP f_throw() { static FP t = mk(FK::Throw); return t; }

FP f_succ(FP s, const Nat& k) {
  if (k == 0) return s;
  auto t = mk(FK::Succ);
  if (s->k == FK::Succ) {
    t->count = s->count + k;
    t->sub = {s->sub[0]};
  } else if (s->k == FK::Zero) {
    t->count = k;
    t->sub = {s};
  } else {
    t->count = k;
    t->sub = {std::move(s)};
  }
  return t;
}

FP f_num(const Nat& n) { return n == 0 ? f_zero() : f_succ(f_zero(), n); }

FP f_pred(FP s) {
  auto t = mk(FK::Pred);
  t->sub = {std::move(s)};
  return t;
}

FP f_app(FP f, FP a) {
  auto t = mk(FK::App);
  t->sub = {std::move(f), std::move(a)};
  return t;
}

FP f_lam(Pattern p, FP body, DF param) {
  auto t = mk(FK::Lam);
  t->pat = std::move(p);
  t->sub = {std::move(body)};
  t->param = std::move(param);
  return t;
}

FP f_tuple(std::vector<FP> comps) {
  if (comps.empty()) return f_unit();
  if (comps.size() == 1) return comps[0];
  auto t = mk(FK::Tuple);
  t->sub = std::move(comps);
  return t;
}

FP f_let(Pattern p, FP bound, FP body) {
  auto t = mk(FK::Let);
  t->pat = std::move(p);
  t->sub = {std::move(bound), std::move(body)};
  return t;
}

FP f_rec(FP t1, FP t2, FP t3, std::optional<std::string> mv, DF motive) {
  auto t = mk(FK::Rec);
  t->sub = {std::move(t1), std::move(t2), std::move(t3)};
  t->motive_var = std::move(mv);
  t->motive = std::move(motive);
  return t;
}

FP f_pack(FP tuple, DF declared, std::vector<FoPtr> witnesses) {
  auto t = mk(FK::Pack);
  t->sub = {std::move(tuple)};
  t->anno = std::move(declared);
  t->witnesses = std::move(witnesses);
  return t;
}

FP f_subst_node(FP subject, FP evidence, std::optional<std::string> hole, DF anno,
                std::optional<std::string> label) {
  auto t = mk(FK::Subst);
  t->sub = {std::move(subject)};
  if (evidence) t->sub.push_back(std::move(evidence));
  t->subst_hole = std::move(hole);
  t->anno = std::move(anno);
  t->subst_label = std::move(label);
  return t;
}

FP f_inst(FP subject, std::vector<FoPtr> args) {
  auto t = mk(FK::Inst);
  t->sub = {std::move(subject)};
  t->witnesses = std::move(args);
  return t;
}

FP f_ascribe(FP subject, DF type) {
  auto t = mk(FK::Ascribe);
  t->sub = {std::move(subject)};
  t->anno = std::move(type);
  return t;
}

bool f_is_value(const FP& t) {
  switch (t->k) {
    case FK::Var:
    case FK::Zero:
    case FK::Unit:
    case FK::Lam:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return true;
    case FK::Succ:
      return f_is_value(t->sub[0]);
    case FK::Tuple:
      for (const auto& c : t->sub)
        if (!f_is_value(c)) return false;
      return true;
    default:
      return false;
  }
}

FP erase(const FP& t) {
  switch (t->k) {
    case FK::Pack:
    case FK::Subst:
    case FK::Inst:
    case FK::Ascribe:
      return erase(t->sub[0]);
    case FK::Var:
    case FK::Zero:
    case FK::Unit:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return t;
    case FK::Succ:
      return f_succ(erase(t->sub[0]), t->count);
    case FK::Pred:
      return f_pred(erase(t->sub[0]));
    case FK::App:
      return f_app(erase(t->sub[0]), erase(t->sub[1]));
    case FK::Lam:
      return f_lam(t->pat, erase(t->sub[0]));
    case FK::Tuple: {
      std::vector<FP> cs;
      for (const auto& c : t->sub) cs.push_back(erase(c));
      return f_tuple(std::move(cs));
    }
    case FK::Let:
      return f_let(t->pat, erase(t->sub[0]), erase(t->sub[1]));
    case FK::Rec:
      return f_rec(erase(t->sub[0]), erase(t->sub[1]), erase(t->sub[2]));
  }
  return t;
}

namespace {

void collect_vars(const FP& t, std::set<std::string>& free,
                  std::vector<std::string>& bound) {
  switch (t->k) {
    case FK::Var: {
      for (auto it = bound.rbegin(); it != bound.rend(); ++it)
        if (*it == t->name) return;
      free.insert(t->name);
      return;
    }
    case FK::Lam: {
      std::size_t n = bound.size();
      for (const auto& x : t->pat.names) bound.push_back(x);
      collect_vars(t->sub[0], free, bound);
      bound.resize(n);
      return;
    }
    case FK::Let: {
      collect_vars(t->sub[0], free, bound);
      std::size_t n = bound.size();
      for (const auto& x : t->pat.names) bound.push_back(x);
      collect_vars(t->sub[1], free, bound);
      bound.resize(n);
      return;
    }
    default:
      for (const auto& c : t->sub) collect_vars(c, free, bound);
      return;
  }
}

void collect_all_names(const FP& t, std::set<std::string>& out) {
  if (t->k == FK::Var) out.insert(t->name);
  for (const auto& x : t->pat.names) out.insert(x);
  for (const auto& c : t->sub) collect_all_names(c, out);
}

}  // namespace

std::set<std::string> f_free_vars(const FP& t) {
  std::set<std::string> free;
  std::vector<std::string> bound;
  collect_vars(t, free, bound);
  return free;
}

std::string FreshGen::fresh(const std::string& base) {
  for (;;) {
    std::string cand = base + std::to_string(++counter);
    if (!used.count(cand)) {
      used.insert(cand);
      return cand;
    }
  }
}

void FreshGen::avoid(const FP& t) { collect_all_names(t, used); }
void FreshGen::avoid(const std::set<std::string>& names) {
  used.insert(names.begin(), names.end());
}

namespace {

// Substitute under a binder pattern; renames the pattern when a replacement
// would capture one of its names.
std::pair<Pattern, std::map<std::string, FP>> open_pattern(
    const Pattern& pat, std::map<std::string, FP> env) {
  for (const auto& n : pat.names) env.erase(n);
  if (env.empty()) return {pat, env};
  bool capture = false;
  std::set<std::string> clash;
  for (const auto& [k, v] : env) {
    auto fv = f_free_vars(v);
    for (const auto& n : pat.names)
      if (fv.count(n)) {
        capture = true;
        clash.insert(fv.begin(), fv.end());
      }
  }
  if (!capture) return {pat, env};
  Pattern np = pat;
  for (auto& n : np.names) {
    if (!clash.count(n)) continue;
    std::string base = n;
    int i = 0;
    std::string cand;
    do {
      cand = base + "'" + (i ? std::to_string(i) : "");
      ++i;
    } while (clash.count(cand) || env.count(cand));
    env[n] = f_var(cand);
    n = cand;
  }
  return {np, env};
}

}  // namespace

FP f_subst(const FP& t, const std::map<std::string, FP>& env) {
  if (env.empty()) return t;
  switch (t->k) {
    case FK::Var: {
      auto it = env.find(t->name);
      return it == env.end() ? t : it->second;
    }
    case FK::Zero:
    case FK::Unit:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return t;
    case FK::Succ:
      return f_succ(f_subst(t->sub[0], env), t->count);
    case FK::Pred:
      return f_pred(f_subst(t->sub[0], env));
    case FK::App:
      return f_app(f_subst(t->sub[0], env), f_subst(t->sub[1], env));
    case FK::Tuple: {
      std::vector<FP> cs;
      for (const auto& c : t->sub) cs.push_back(f_subst(c, env));
      return f_tuple(std::move(cs));
    }
    case FK::Lam: {
      auto [pat, env2] = open_pattern(t->pat, env);
      if (env2.empty() && pat.names == t->pat.names) return t;
      auto r = f_lam(pat, f_subst(t->sub[0], env2), t->param);
      const_cast<FTerm&>(*r).param_simple = t->param_simple;
      return r;
    }
    case FK::Let: {
      FP bound = f_subst(t->sub[0], env);
      auto [pat, env2] = open_pattern(t->pat, env);
      return f_let(pat, std::move(bound), f_subst(t->sub[1], env2));
    }
    case FK::Rec:
      return f_rec(f_subst(t->sub[0], env), f_subst(t->sub[1], env),
                   f_subst(t->sub[2], env), t->motive_var, t->motive);
    case FK::Pack: {
      auto r = mk(FK::Pack);
      r->sub = {f_subst(t->sub[0], env)};
      r->anno = t->anno;
      r->witnesses = t->witnesses;
      return r;
    }
    case FK::Subst: {
      auto r = mk(FK::Subst);
      r->sub = {f_subst(t->sub[0], env)};
      if (t->sub.size() > 1) r->sub.push_back(f_subst(t->sub[1], env));
      r->anno = t->anno;
      r->subst_hole = t->subst_hole;
      r->subst_label = t->subst_label;
      return r;
    }
    case FK::Inst:
      return f_inst(f_subst(t->sub[0], env), t->witnesses);
    case FK::Ascribe: {
      auto r = f_ascribe(f_subst(t->sub[0], env), t->anno);
      const_cast<FTerm&>(*r).anno_simple = t->anno_simple;
      return r;
    }
  }
  return t;
}

bool f_equal_raw(const FP& a, const FP& b) {
  if (a.get() == b.get()) return true;
  if (a->k != b->k || a->name != b->name || a->count != b->count ||
      a->pat.k != b->pat.k || a->pat.names != b->pat.names ||
      a->sub.size() != b->sub.size())
    return false;
  for (std::size_t i = 0; i < a->sub.size(); ++i)
    if (!f_equal_raw(a->sub[i], b->sub[i])) return false;
  return true;
}

namespace {

struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> pairs;
  bool vars_eq(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it)
      if (it->first == a || it->second == b) return it->first == a && it->second == b;
    return a == b;
  }
};

bool alpha_rec(const FP& a, const FP& b, AlphaEnv& env) {
  if (a->k != b->k) return false;
  switch (a->k) {
    case FK::Var:
      return env.vars_eq(a->name, b->name);
    case FK::Zero:
    case FK::Unit:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return true;
    case FK::Succ:
      return a->count == b->count && alpha_rec(a->sub[0], b->sub[0], env);
    case FK::Lam: {
      if (a->pat.k != b->pat.k || a->pat.names.size() != b->pat.names.size())
        return false;
      std::size_t n = env.pairs.size();
      for (std::size_t i = 0; i < a->pat.names.size(); ++i)
        env.pairs.emplace_back(a->pat.names[i], b->pat.names[i]);
      bool r = alpha_rec(a->sub[0], b->sub[0], env);
      env.pairs.resize(n);
      return r;
    }
    case FK::Let: {
      if (a->pat.k != b->pat.k || a->pat.names.size() != b->pat.names.size())
        return false;
      if (!alpha_rec(a->sub[0], b->sub[0], env)) return false;
      std::size_t n = env.pairs.size();
      for (std::size_t i = 0; i < a->pat.names.size(); ++i)
        env.pairs.emplace_back(a->pat.names[i], b->pat.names[i]);
      bool r = alpha_rec(a->sub[1], b->sub[1], env);
      env.pairs.resize(n);
      return r;
    }
    default: {
      if (a->sub.size() != b->sub.size()) return false;
      for (std::size_t i = 0; i < a->sub.size(); ++i)
        if (!alpha_rec(a->sub[i], b->sub[i], env)) return false;
      return true;
    }
  }
}

}  // namespace

bool f_alpha_eq(const FP& a, const FP& b) {
  AlphaEnv env;
  return alpha_rec(a, b, env);
}

// ------------------------------------------------------------- evaluation

namespace {

// Fires the root redex of an erased term whose relevant children are values.
// Returns nullptr when the root is not a redex.
FP fire_root(const FP& t, std::string& why) {
  switch (t->k) {
    case FK::Pred: {
      const FP& v = t->sub[0];
      if (v->k == FK::Zero) return f_zero();
      if (v->k == FK::Succ)
        return t->sub[0]->count == 1 ? v->sub[0] : f_succ(v->sub[0], v->count - 1);
      why = "pred applied to a non-numeral value";
      return nullptr;
    }
    case FK::App: {
      const FP& f = t->sub[0];
      const FP& a = t->sub[1];
      switch (f->k) {
        case FK::Lam:
          if (f->pat.k == Pattern::K::Name)
            return f_subst(f->sub[0], {{f->pat.names[0], a}});
          return f_let(f->pat, a, f->sub[0]);
        case FK::SuccConst:
          return f_succ(a, 1);
        case FK::Callcc:
        case FK::Throw:
          why = "classical primitive has no direct-style semantics";
          return nullptr;
        default:
          why = "application of a non-function value";
          return nullptr;
      }
    }
    case FK::Let: {
      const FP& v = t->sub[0];
      switch (t->pat.k) {
        case Pattern::K::Name:
          return f_subst(t->sub[1], {{t->pat.names[0], v}});
        case Pattern::K::Unit:
          if (v->k != FK::Unit) {
            why = "let () bound to a non-unit value";
            return nullptr;
          }
          return t->sub[1];
        case Pattern::K::Tuple: {
          if (v->k != FK::Tuple || v->sub.size() != t->pat.names.size()) {
            why = "let tuple arity mismatch";
            return nullptr;
          }
          std::map<std::string, FP> env;
          for (std::size_t i = 0; i < v->sub.size(); ++i)
            env[t->pat.names[i]] = v->sub[i];
          return f_subst(t->sub[1], env);
        }
      }
      return nullptr;
    }
    case FK::Rec: {
      const FP& n = t->sub[0];
      if (n->k == FK::Zero) return t->sub[1];
      if (n->k == FK::Succ) {
        FP pred_n = n->count == 1 ? n->sub[0] : f_succ(n->sub[0], n->count - 1);
        return f_app(f_app(t->sub[2], pred_n), f_rec(pred_n, t->sub[1], t->sub[2]));
      }
      why = "rec on a non-numeral value";
      return nullptr;
    }
    default:
      why = "not a redex";
      return nullptr;
  }
}

}  // namespace

StepResult f_step(const FP& t) {
  if (f_is_value(t)) return {StepStatus::AtValue, t, ""};
  switch (t->k) {
    case FK::Succ: {
      auto r = f_step(t->sub[0]);
      if (r.status == StepStatus::Stepped)
        return {StepStatus::Stepped, f_succ(r.term, t->count), ""};
      return r;  // inner value contradicts !is_value; propagate stuck
    }
    case FK::Pred: {
      if (!f_is_value(t->sub[0])) {
        auto r = f_step(t->sub[0]);
        if (r.status == StepStatus::Stepped)
          return {StepStatus::Stepped, f_pred(r.term), ""};
        return r;
      }
      break;
    }
    case FK::App: {
      for (int i = 0; i < 2; ++i) {
        if (!f_is_value(t->sub[i])) {
          auto r = f_step(t->sub[i]);
          if (r.status != StepStatus::Stepped) return r;
          return {StepStatus::Stepped,
                  i == 0 ? f_app(r.term, t->sub[1]) : f_app(t->sub[0], r.term), ""};
        }
      }
      break;
    }
    case FK::Tuple: {
      std::vector<FP> cs = t->sub;
      for (auto& c : cs) {
        if (!f_is_value(c)) {
          auto r = f_step(c);
          if (r.status != StepStatus::Stepped) return r;
          c = r.term;
          return {StepStatus::Stepped, f_tuple(std::move(cs)), ""};
        }
      }
      break;
    }
    case FK::Let: {
      if (!f_is_value(t->sub[0])) {
        auto r = f_step(t->sub[0]);
        if (r.status != StepStatus::Stepped) return r;
        return {StepStatus::Stepped, f_let(t->pat, r.term, t->sub[1]), ""};
      }
      break;
    }
    case FK::Rec: {
      for (int i = 0; i < 3; ++i) {
        if (!f_is_value(t->sub[i])) {
          auto r = f_step(t->sub[i]);
          if (r.status != StepStatus::Stepped) return r;
          std::vector<FP> cs = t->sub;
          cs[i] = r.term;
          return {StepStatus::Stepped, f_rec(cs[0], cs[1], cs[2]), ""};
        }
      }
      break;
    }
    case FK::Pack:
    case FK::Subst:
    case FK::Inst:
    case FK::Ascribe:
      return {StepStatus::Stuck, t, "annotation node in an operational term"};
    default:
      break;
  }
  std::string why;
  if (FP r = fire_root(t, why)) return {StepStatus::Stepped, r, ""};
  return {StepStatus::Stuck, t, why};
}

RunResult f_eval(FP t, long long fuel) {
  for (long long i = 0; i <= fuel; ++i) {
    auto r = f_step(t);
    if (r.status == StepStatus::AtValue) return {RunStatus::Value, r.term, i, ""};
    if (r.status == StepStatus::Stuck) return {RunStatus::Stuck, r.term, i, r.why};
    if (i == fuel) break;
    t = r.term;
  }
  return {RunStatus::FuelExhausted, t, fuel, ""};
}

namespace {

// One leftmost-outermost step of the contextual closure (arbitrary
// contexts, value-restricted redexes).
FP normalize_step(const FP& t) {
  std::string why;
  switch (t->k) {
    case FK::Pred:
      if (f_is_value(t->sub[0]))
        if (FP r = fire_root(t, why)) return r;
      break;
    case FK::App:
      if (f_is_value(t->sub[0]) && f_is_value(t->sub[1]))
        if (FP r = fire_root(t, why)) return r;
      break;
    case FK::Let:
      if (f_is_value(t->sub[0]))
        if (FP r = fire_root(t, why)) return r;
      break;
    case FK::Rec:
      if (f_is_value(t->sub[0]) && f_is_value(t->sub[1]) && f_is_value(t->sub[2]))
        if (FP r = fire_root(t, why)) return r;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < t->sub.size(); ++i) {
    if (FP r = normalize_step(t->sub[i])) {
      std::vector<FP> cs = t->sub;
      cs[i] = r;
      switch (t->k) {
        case FK::Succ: return f_succ(cs[0], t->count);
        case FK::Pred: return f_pred(cs[0]);
        case FK::App: return f_app(cs[0], cs[1]);
        case FK::Lam: return f_lam(t->pat, cs[0], t->param);
        case FK::Tuple: return f_tuple(std::move(cs));
        case FK::Let: return f_let(t->pat, cs[0], cs[1]);
        case FK::Rec: return f_rec(cs[0], cs[1], cs[2], t->motive_var, t->motive);
        default: return nullptr;
      }
    }
  }
  return nullptr;
}

}  // namespace

RunResult f_normalize(FP t, long long fuel) {
  t = erase(t);
  for (long long i = 0; i <= fuel; ++i) {
    FP r = normalize_step(t);
    if (!r) return {RunStatus::Value, t, i, ""};
    if (i == fuel) break;
    t = r;
  }
  return {RunStatus::FuelExhausted, t, fuel, ""};
}

FP let_normalize(const FP& t) {
  std::vector<FP> cs;
  cs.reserve(t->sub.size());
  for (const auto& c : t->sub) cs.push_back(let_normalize(c));
  switch (t->k) {
    case FK::App:
      if (cs[0]->k == FK::Lam) return f_let(cs[0]->pat, cs[1], cs[0]->sub[0]);
      return f_app(cs[0], cs[1]);
    case FK::Succ: return f_succ(cs[0], t->count);
    case FK::Pred: return f_pred(cs[0]);
    case FK::Lam: return f_lam(t->pat, cs[0], t->param);
    case FK::Tuple: return f_tuple(std::move(cs));
    case FK::Let: return f_let(t->pat, cs[0], cs[1]);
    case FK::Rec: return f_rec(cs[0], cs[1], cs[2], t->motive_var, t->motive);
    default: return t;
  }
}

// ------------------------------------------------------- monadic language

bool in_V(const FP& t) {
  switch (t->k) {
    case FK::Var:
    case FK::Unit:
    case FK::Zero:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return true;
    case FK::Succ:
      return t->sub[0]->k == FK::Zero;  // numerals only
    case FK::Lam:
      return in_L(t->sub[0]);
    case FK::Tuple:
      for (const auto& c : t->sub)
        if (!in_V(c)) return false;
      return true;
    default:
      return false;
  }
}

bool in_L(const FP& t) {
  if (in_V(t)) return true;
  if (t->k != FK::Let) return false;
  const FP& u = t->sub[0];
  if (!in_L(t->sub[1])) return false;
  if (in_V(u)) return true;
  switch (u->k) {
    case FK::Pred:
      return in_V(u->sub[0]);
    case FK::App:
      return in_V(u->sub[0]) && in_V(u->sub[1]);
    case FK::Rec: {
      if (!in_V(u->sub[0]) || !in_V(u->sub[1])) return false;
      const FP& f = u->sub[2];
      return f->k == FK::Lam && f->pat.k == Pattern::K::Name &&
             f->sub[0]->k == FK::Lam && in_L(f->sub[0]->sub[0]);
    }
    default:
      return in_L(u);
  }
}

Monadic f_is_monadic(const FP& t) {
  if (in_V(t)) return Monadic::InV;
  if (in_L(t)) return Monadic::InL;
  return Monadic::Neither;
}

// ------------------------------------------------------------------ sharp

namespace {

FP sharp_rec(const FP& t, FreshGen& g) {
  switch (t->k) {
    case FK::Var:
    case FK::Unit:
    case FK::Zero:
    case FK::SuccConst:
    case FK::Callcc:
    case FK::Throw:
      return t;
    case FK::Succ: {
      if (t->sub[0]->k == FK::Zero) return t;  // numeral
      FP body = sharp_rec(t->sub[0], g);
      std::string x = g.fresh("x");
      FP acc = f_var(x);
      // let x = t# in let x1 = succ(x) in ... xn
      std::vector<std::string> names{x};
      for (Nat i = 0; i < t->count; ++i) names.push_back(g.fresh("x"));
      FP out = f_var(names.back());
      for (std::size_t i = names.size(); i-- > 1;)
        out = f_let(Pattern::name(names[i]),
                    f_app(f_succ_const(), f_var(names[i - 1])), out);
      return f_let(Pattern::name(x), body, out);
    }
    case FK::Pred: {
      std::string x = g.fresh("x");
      std::string y = g.fresh("x");
      return f_let(Pattern::name(x), sharp_rec(t->sub[0], g),
                   f_let(Pattern::name(y), f_pred(f_var(x)), f_var(y)));
    }
    case FK::Lam:
      return f_lam(t->pat, sharp_rec(t->sub[0], g), t->param);
    case FK::App: {
      std::string x = g.fresh("x");
      std::string y = g.fresh("y");
      std::string r = g.fresh("r");
      return f_let(Pattern::name(x), sharp_rec(t->sub[0], g),
                   f_let(Pattern::name(y), sharp_rec(t->sub[1], g),
                         f_let(Pattern::name(r), f_app(f_var(x), f_var(y)),
                               f_var(r))));
    }
    case FK::Let: {
      std::string y = g.fresh("y");
      return f_let(Pattern::name(y), sharp_rec(t->sub[0], g),
                   f_let(t->pat, f_var(y), sharp_rec(t->sub[1], g)));
    }
    case FK::Tuple: {
      std::vector<std::string> names;
      std::vector<FP> sharped;
      for (const auto& c : t->sub) {
        names.push_back(g.fresh("x"));
        sharped.push_back(sharp_rec(c, g));
      }
      std::vector<FP> vars;
      for (const auto& n : names) vars.push_back(f_var(n));
      FP out = f_tuple(std::move(vars));
      for (std::size_t i = names.size(); i-- > 0;)
        out = f_let(Pattern::name(names[i]), sharped[i], out);
      return out;
    }
    case FK::Rec: {
      std::string a = g.fresh("a");
      std::string b = g.fresh("b");
      std::string c = g.fresh("c");
      std::string z = g.fresh("z");
      std::string x = g.fresh("x");
      std::string y = g.fresh("y");
      std::string d = g.fresh("d");
      std::string e = g.fresh("e");
      // eta-expanded step so the third argument is a literal double lambda
      // with a monadic body
      FP step = f_lam(Pattern::name(x),
                      f_lam(Pattern::name(y),
                            f_let(Pattern::name(d), f_app(f_var(c), f_var(x)),
                                  f_let(Pattern::name(e), f_app(f_var(d), f_var(y)),
                                        f_var(e)))));
      FP inner = f_let(Pattern::name(z),
                       f_rec(f_var(a), f_var(b), std::move(step)), f_var(z));
      return f_let(
          Pattern::name(a), sharp_rec(t->sub[0], g),
          f_let(Pattern::name(b), sharp_rec(t->sub[1], g),
                f_let(Pattern::name(c), sharp_rec(t->sub[2], g), inner)));
    }
    default:
      return sharp_rec(erase(t), g);
  }
}

}  // namespace

FP f_sharp(const FP& t0) {
  FP t = erase(t0);
  FreshGen g;
  g.avoid(t);
  return sharp_rec(t, g);
}

// ------------------------------------------------------------------- show

namespace {

void show_term(const FP& t, std::ostringstream& os, int prec);

void show_pattern(const Pattern& p, std::ostringstream& os) {
  switch (p.k) {
    case Pattern::K::Name: os << p.names[0]; break;
    case Pattern::K::Unit: os << "()"; break;
    case Pattern::K::Tuple: {
      os << "(";
      for (std::size_t i = 0; i < p.names.size(); ++i) {
        if (i) os << ", ";
        os << p.names[i];
      }
      os << ")";
      break;
    }
  }
}

// prec: 0 = top, 1 = application argument position
void show_term(const FP& t, std::ostringstream& os, int prec) {
  switch (t->k) {
    case FK::Var: os << t->name; return;
    case FK::Zero: os << "0"; return;
    case FK::Unit: os << "()"; return;
    case FK::SuccConst: os << "succ"; return;
    case FK::Callcc: os << "callcc"; return;
    case FK::Throw: os << "throw"; return;
    case FK::Succ: {
      if (t->sub[0]->k == FK::Zero) {
        os << t->count.str();
        return;
      }
      for (Nat i = 0; i < t->count; ++i) os << "S(";
      show_term(t->sub[0], os, 0);
      for (Nat i = 0; i < t->count; ++i) os << ")";
      return;
    }
    case FK::Pred:
      os << "pred(";
      show_term(t->sub[0], os, 0);
      os << ")";
      return;
    case FK::App: {
      if (prec >= 2) os << "(";
      show_term(t->sub[0], os, 1);
      os << " ";
      show_term(t->sub[1], os, 2);
      if (prec >= 2) os << ")";
      return;
    }
    case FK::Lam: {
      if (prec >= 1) os << "(";
      os << "fn ";
      show_pattern(t->pat, os);
      if (t->param) os << " : " << types::show(t->param);
      else if (t->param_simple) os << " : " << types::show(t->param_simple);
      os << " => ";
      show_term(t->sub[0], os, 0);
      if (prec >= 1) os << ")";
      return;
    }
    case FK::Tuple: {
      os << "(";
      for (std::size_t i = 0; i < t->sub.size(); ++i) {
        if (i) os << ", ";
        show_term(t->sub[i], os, 0);
      }
      os << ")";
      return;
    }
    case FK::Let: {
      if (prec >= 1) os << "(";
      os << "let ";
      show_pattern(t->pat, os);
      os << " = ";
      show_term(t->sub[0], os, 0);
      os << " in ";
      show_term(t->sub[1], os, 0);
      if (prec >= 1) os << ")";
      return;
    }
    case FK::Rec: {
      os << "rec";
      if (t->motive) os << "[" << *t->motive_var << ". " << types::show(t->motive) << "]";
      os << "(";
      show_term(t->sub[0], os, 0);
      os << ", ";
      show_term(t->sub[1], os, 0);
      os << ", ";
      show_term(t->sub[2], os, 0);
      os << ")";
      return;
    }
    case FK::Pack: {
      os << "pack ";
      show_term(t->sub[0], os, 2);
      os << " as " << types::show(t->anno) << " with (";
      for (std::size_t i = 0; i < t->witnesses.size(); ++i) {
        if (i) os << ", ";
        os << arith::fo_show(t->witnesses[i]);
      }
      os << ")";
      return;
    }
    case FK::Subst: {
      os << "subst(";
      show_term(t->sub[0], os, 0);
      if (t->sub.size() > 1) {
        os << ", ";
        show_term(t->sub[1], os, 0);
      }
      os << ", [";
      if (t->subst_hole) os << *t->subst_hole << ". ";
      os << types::show(t->anno) << "]";
      if (t->subst_label) os << " via (" << *t->subst_label << ")";
      os << ")";
      return;
    }
    case FK::Inst: {
      show_term(t->sub[0], os, 2);
      os << "{";
      for (std::size_t i = 0; i < t->witnesses.size(); ++i) {
        if (i) os << ", ";
        os << arith::fo_show(t->witnesses[i]);
      }
      os << "}";
      return;
    }
    case FK::Ascribe: {
      os << "(";
      show_term(t->sub[0], os, 0);
      os << " : "
         << (t->anno ? types::show(t->anno) : types::show(t->anno_simple)) << ")";
      return;
    }
  }
}

}  // namespace

std::string f_show(const FP& t) {
  std::ostringstream os;
  show_term(t, os, 0);
  return os.str();
}

}  // namespace loopf::flang
