#pragma once

// First-order arithmetic terms, equational systems in the Herbrand-Godel
// style, instance matching and a ground rewriting evaluator.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace loopf::arith {

using Nat = boost::multiprecision::cpp_int;

enum class FoKind { Var, Zero, Succ, Pred, Add, Mul, App };

struct FoTerm;
using FoPtr = std::shared_ptr<const FoTerm>;

// Succ nodes are kept compact: `count` stacked successors over a non-Succ
// subterm in args[0]. s^k(0) is therefore a single node; equality stays
// structural.
struct FoTerm {
  FoKind kind;
  std::string name;         // Var name / App symbol
  Nat count;                // Succ only, >= 1
  std::vector<FoPtr> args;  // Succ: 1, Pred: 1, Add/Mul: 2, App: arity
};

FoPtr fo_var(const std::string& name);
FoPtr fo_zero();
FoPtr fo_succ(FoPtr inner, const Nat& k = 1);
FoPtr fo_pred(FoPtr t);
FoPtr fo_add(FoPtr a, FoPtr b);
FoPtr fo_mul(FoPtr a, FoPtr b);
FoPtr fo_app(const std::string& sym, std::vector<FoPtr> args);
FoPtr fo_num(const Nat& n);  // s^n(0)

bool fo_equal(const FoPtr& a, const FoPtr& b);
bool fo_is_numeral(const FoPtr& t);
std::optional<Nat> fo_numeral_value(const FoPtr& t);
bool fo_is_ground(const FoPtr& t);
void fo_vars(const FoPtr& t, std::set<std::string>& out);
std::set<std::string> fo_vars(const FoPtr& t);

// Capture-free replacement; FoTerms have no binders.
FoPtr fo_subst(const FoPtr& t, const FoPtr& replacement, const std::string& var);
FoPtr fo_subst_many(const FoPtr& t, const std::map<std::string, FoPtr>& env);

std::string fo_show(const FoPtr& t);

struct Equation {
  std::string label;
  FoPtr lhs;
  FoPtr rhs;
  bool builtin = false;
};

struct EqSystem {
  std::map<std::string, std::size_t> signature;  // user symbols -> arity
  std::vector<Equation> equations;               // builtins first, then file order

  const Equation* find(const std::string& label) const;
};

// Fresh system containing the defining equations for +, x and p.
EqSystem peano_base();

// First-order matching: instantiate `pvars` occurring in `pattern` so that it
// equals `subject`; subject variables are treated as constants.
bool fo_match(const FoPtr& pattern, const FoPtr& subject,
              const std::set<std::string>& pvars,
              std::map<std::string, FoPtr>& theta);

struct MatchResult {
  bool ok = false;
  bool reflexivity = false;
  std::string label;                  // equation used
  bool flipped = false;               // matched rhs=lhs orientation
  std::map<std::string, FoPtr> theta;
};

// |-_E n = m: n and m are syntactically equal, or some equation instance
// derives the pair in either orientation.
MatchResult fo_match_instance(const EqSystem& sys, const FoPtr& n, const FoPtr& m);

enum class EvalStatus { Value, FuelExhausted, Stuck };

struct EvalResult {
  EvalStatus status = EvalStatus::Stuck;
  FoPtr term;         // numeral on success, offending term otherwise
  long long steps = 0;
};

// Ground call-by-value rewriting: innermost, left-to-right, first equation in
// declaration order wins; +, x, p are computed directly on numerals.
EvalResult fo_eval(const EqSystem& sys, FoPtr t, long long fuel = 1000000);

}  // namespace loopf::arith
