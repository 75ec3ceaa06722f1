#include "loopf/arith.hpp"

#include <sstream>
#include <stdexcept>

namespace loopf::arith {

namespace {

FoPtr mk(FoKind k, std::string name, Nat count, std::vector<FoPtr> args) {
  auto t = std::make_shared<FoTerm>();
  t->kind = k;
  t->name = std::move(name);
  t->count = std::move(count);
  t->args = std::move(args);
  return t;
}

const FoPtr& zero_singleton() {
  static const FoPtr z = mk(FoKind::Zero, "", 0, {});
  return z;
}

}  // namespace

FoPtr fo_var(const std::string& name) { return mk(FoKind::Var, name, 0, {}); }
FoPtr fo_zero() { return zero_singleton(); }

FoPtr fo_succ(FoPtr inner, const Nat& k) {
  if (k == 0) return inner;
  if (inner->kind == FoKind::Succ)
    return mk(FoKind::Succ, "", inner->count + k, {inner->args[0]});
  return mk(FoKind::Succ, "", k, {std::move(inner)});
}

FoPtr fo_pred(FoPtr t) { return mk(FoKind::Pred, "", 0, {std::move(t)}); }
FoPtr fo_add(FoPtr a, FoPtr b) { return mk(FoKind::Add, "", 0, {std::move(a), std::move(b)}); }
FoPtr fo_mul(FoPtr a, FoPtr b) { return mk(FoKind::Mul, "", 0, {std::move(a), std::move(b)}); }

FoPtr fo_app(const std::string& sym, std::vector<FoPtr> args) {
  return mk(FoKind::App, sym, 0, std::move(args));
}

FoPtr fo_num(const Nat& n) {
  if (n == 0) return fo_zero();
  return fo_succ(fo_zero(), n);
}

bool fo_equal(const FoPtr& a, const FoPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FoKind::Var: return a->name == b->name;
    case FoKind::Zero: return true;
    case FoKind::Succ:
      return a->count == b->count && fo_equal(a->args[0], b->args[0]);
    case FoKind::App:
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!fo_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool fo_is_numeral(const FoPtr& t) {
  return t->kind == FoKind::Zero ||
         (t->kind == FoKind::Succ && t->args[0]->kind == FoKind::Zero);
}

std::optional<Nat> fo_numeral_value(const FoPtr& t) {
  if (t->kind == FoKind::Zero) return Nat(0);
  if (t->kind == FoKind::Succ && t->args[0]->kind == FoKind::Zero) return t->count;
  return std::nullopt;
}

bool fo_is_ground(const FoPtr& t) {
  if (t->kind == FoKind::Var) return false;
  for (const auto& a : t->args)
    if (!fo_is_ground(a)) return false;
  return true;
}

void fo_vars(const FoPtr& t, std::set<std::string>& out) {
  if (t->kind == FoKind::Var) {
    out.insert(t->name);
    return;
  }
  for (const auto& a : t->args) fo_vars(a, out);
}

std::set<std::string> fo_vars(const FoPtr& t) {
  std::set<std::string> s;
  fo_vars(t, s);
  return s;
}

FoPtr fo_subst(const FoPtr& t, const FoPtr& replacement, const std::string& var) {
  return fo_subst_many(t, {{var, replacement}});
}

FoPtr fo_subst_many(const FoPtr& t, const std::map<std::string, FoPtr>& env) {
  switch (t->kind) {
    case FoKind::Var: {
      auto it = env.find(t->name);
      return it == env.end() ? t : it->second;
    }
    case FoKind::Zero:
      return t;
    case FoKind::Succ:
      return fo_succ(fo_subst_many(t->args[0], env), t->count);
    default: {
      std::vector<FoPtr> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        args.push_back(fo_subst_many(a, env));
        changed = changed || args.back().get() != a.get();
      }
      if (!changed) return t;
      return mk(t->kind, t->name, t->count, std::move(args));
    }
  }
}

namespace {

int prec(const FoPtr& t) {
  switch (t->kind) {
    case FoKind::Add: return 1;
    case FoKind::Mul: return 2;
    default: return 3;
  }
}

void show(const FoPtr& t, std::ostringstream& os, int outer) {
  int p = prec(t);
  bool paren = p < outer;
  switch (t->kind) {
    case FoKind::Var: os << t->name; return;
    case FoKind::Zero: os << "0"; return;
    case FoKind::Succ: {
      if (auto v = fo_numeral_value(t); v && *v <= 32) {
        os << v->str();
        return;
      }
      Nat k = t->count;
      // s applied count times; abbreviate big stacks
      if (k > 8) {
        os << "s^" << k.str() << "(";
        show(t->args[0], os, 0);
        os << ")";
        return;
      }
      for (Nat i = 0; i < k; ++i) os << "s(";
      show(t->args[0], os, 0);
      for (Nat i = 0; i < k; ++i) os << ")";
      return;
    }
    case FoKind::Pred:
      os << "p(";
      show(t->args[0], os, 0);
      os << ")";
      return;
    case FoKind::Add:
      if (paren) os << "(";
      show(t->args[0], os, 1);
      os << " + ";
      show(t->args[1], os, 2);
      if (paren) os << ")";
      return;
    case FoKind::Mul:
      if (paren) os << "(";
      show(t->args[0], os, 2);
      os << " * ";
      show(t->args[1], os, 3);
      if (paren) os << ")";
      return;
    case FoKind::App: {
      os << t->name << "(";
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ", ";
        show(t->args[i], os, 0);
      }
      os << ")";
      return;
    }
  }
}

}  // namespace

std::string fo_show(const FoPtr& t) {
  std::ostringstream os;
  show(t, os, 0);
  return os.str();
}

const Equation* EqSystem::find(const std::string& label) const {
  for (const auto& e : equations)
    if (e.label == label) return &e;
  return nullptr;
}

EqSystem peano_base() {
  EqSystem sys;
  auto x = fo_var("x");
  auto i = fo_var("i");
  sys.equations.push_back({"1", fo_add(x, fo_zero()), x, true});
  sys.equations.push_back({"2", fo_add(x, fo_succ(i)), fo_succ(fo_add(x, i)), true});
  sys.equations.push_back({"3", fo_mul(x, fo_zero()), fo_zero(), true});
  sys.equations.push_back({"4", fo_mul(x, fo_succ(i)), fo_add(fo_mul(x, i), x), true});
  sys.equations.push_back({"p1", fo_pred(fo_zero()), fo_zero(), true});
  sys.equations.push_back({"p2", fo_pred(fo_succ(x)), x, true});
  return sys;
}

bool fo_match(const FoPtr& pattern, const FoPtr& subject,
              const std::set<std::string>& pvars,
              std::map<std::string, FoPtr>& theta) {
  switch (pattern->kind) {
    case FoKind::Var: {
      if (!pvars.count(pattern->name))
        return subject->kind == FoKind::Var && subject->name == pattern->name;
      auto it = theta.find(pattern->name);
      if (it != theta.end()) return fo_equal(it->second, subject);
      theta.emplace(pattern->name, subject);
      return true;
    }
    case FoKind::Zero:
      return subject->kind == FoKind::Zero;
    case FoKind::Succ: {
      // pattern s^k(p0) against a subject with at least k successors
      if (subject->kind != FoKind::Succ || subject->count < pattern->count)
        return false;
      FoPtr rest = subject->count == pattern->count
                       ? subject->args[0]
                       : fo_succ(subject->args[0], subject->count - pattern->count);
      return fo_match(pattern->args[0], rest, pvars, theta);
    }
    case FoKind::App:
      if (subject->kind != FoKind::App || pattern->name != subject->name ||
          pattern->args.size() != subject->args.size())
        return false;
      break;
    default:
      if (subject->kind != pattern->kind) return false;
      break;
  }
  for (std::size_t i = 0; i < pattern->args.size(); ++i)
    if (!fo_match(pattern->args[i], subject->args[i], pvars, theta)) return false;
  return true;
}

MatchResult fo_match_instance(const EqSystem& sys, const FoPtr& n, const FoPtr& m) {
  MatchResult r;
  if (fo_equal(n, m)) {
    r.ok = true;
    r.reflexivity = true;
    return r;
  }
  for (const auto& eq : sys.equations) {
    std::set<std::string> pv = fo_vars(eq.lhs);
    fo_vars(eq.rhs, pv);
    {
      std::map<std::string, FoPtr> theta;
      if (fo_match(eq.lhs, n, pv, theta) && fo_match(eq.rhs, m, pv, theta)) {
        r.ok = true;
        r.label = eq.label;
        r.theta = std::move(theta);
        return r;
      }
    }
    {
      std::map<std::string, FoPtr> theta;
      if (fo_match(eq.lhs, m, pv, theta) && fo_match(eq.rhs, n, pv, theta)) {
        r.ok = true;
        r.label = eq.label;
        r.flipped = true;
        r.theta = std::move(theta);
        return r;
      }
    }
  }
  return r;
}

namespace {

// One innermost-leftmost rewrite step; nullptr when no rule applies anywhere.
FoPtr rewrite_once(const EqSystem& sys, const FoPtr& t) {
  for (std::size_t i = 0; i < t->args.size(); ++i) {
    if (auto r = rewrite_once(sys, t->args[i])) {
      std::vector<FoPtr> args = t->args;
      args[i] = r;
      if (t->kind == FoKind::Succ) return fo_succ(args[0], t->count);
      return mk(t->kind, t->name, t->count, std::move(args));
    }
  }
  switch (t->kind) {
    case FoKind::Pred:
      if (auto v = fo_numeral_value(t->args[0]))
        return fo_num(*v == 0 ? Nat(0) : Nat(*v - 1));
      break;
    case FoKind::Add: {
      auto a = fo_numeral_value(t->args[0]);
      auto b = fo_numeral_value(t->args[1]);
      if (a && b) return fo_num(*a + *b);
      break;
    }
    case FoKind::Mul: {
      auto a = fo_numeral_value(t->args[0]);
      auto b = fo_numeral_value(t->args[1]);
      if (a && b) return fo_num(*a * *b);
      break;
    }
    default:
      break;
  }
  for (const auto& eq : sys.equations) {
    if (eq.builtin) continue;  // handled above
    std::set<std::string> pv = fo_vars(eq.lhs);
    std::map<std::string, FoPtr> theta;
    if (fo_match(eq.lhs, t, pv, theta)) return fo_subst_many(eq.rhs, theta);
  }
  return nullptr;
}

}  // namespace

EvalResult fo_eval(const EqSystem& sys, FoPtr t, long long fuel) {
  EvalResult res;
  for (long long step = 0; step <= fuel; ++step) {
    if (fo_is_numeral(t)) {
      res.status = EvalStatus::Value;
      res.term = t;
      res.steps = step;
      return res;
    }
    if (step == fuel) break;
    auto next = rewrite_once(sys, t);
    if (!next) {
      res.status = EvalStatus::Stuck;
      res.term = t;
      res.steps = step;
      return res;
    }
    t = next;
  }
  res.status = EvalStatus::FuelExhausted;
  res.term = t;
  res.steps = fuel;
  return res;
}

}  // namespace loopf::arith
