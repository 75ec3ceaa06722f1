#pragma once

// Language F: terms, call-by-value context semantics, the monadic
// sublanguage L/V and the natural translation into it.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loopf/types.hpp"

namespace loopf::flang {

using arith::FoPtr;
using arith::Nat;
using types::DF;

enum class FK {
  Var, Zero, Succ, SuccConst, Pred, App, Lam, Tuple, Unit, Let, Rec,
  Callcc, Throw,
  // erasable annotation nodes
  Pack, Subst, Inst, Ascribe
};

struct Pattern {
  enum class K { Name, Unit, Tuple } k = K::Name;
  std::vector<std::string> names;  // Name: 1, Tuple: >= 2

  static Pattern name(std::string n) { return {K::Name, {std::move(n)}}; }
  static Pattern unit() { return {K::Unit, {}}; }
  static Pattern tuple(std::vector<std::string> ns) { return {K::Tuple, std::move(ns)}; }
};

struct FTerm;
using FP = std::shared_ptr<const FTerm>;

struct FTerm {
  FK k;
  std::string name;      // Var
  Nat count;             // Succ: stacked constructors over sub[0]
  std::vector<FP> sub;   // children (see constructors)
  Pattern pat;           // Lam, Let

  // annotations
  std::optional<std::string> motive_var;  // Rec [i. T]
  DF motive;
  DF anno;                                // Pack declared type; Subst pattern/target; Ascribe type
  std::vector<FoPtr> witnesses;           // Pack witnesses; Inst arguments
  std::optional<std::string> subst_hole;  // Subst hole var (absent: target form)
  std::optional<std::string> subst_label; // Subst via equation label
  DF param;                               // Lam parameter ascription (optional)
  types::SF param_simple;                 // simple-typed variant
  types::SF anno_simple;                  // simple-typed Ascribe
};

FP f_var(const std::string& n);
FP f_zero();
FP f_succ(FP t, const Nat& k = 1);
FP f_succ_const();
FP f_pred(FP t);
FP f_app(FP f, FP a);
FP f_lam(Pattern p, FP body, DF param = nullptr);
FP f_tuple(std::vector<FP> comps);   // 0 comps -> unit, 1 -> the component
FP f_unit();
FP f_let(Pattern p, FP bound, FP body);
FP f_rec(FP t1, FP t2, FP t3, std::optional<std::string> motive_var = {}, DF motive = nullptr);
FP f_callcc();
FP f_throw();
FP f_num(const Nat& n);
FP f_pack(FP tuple, DF declared, std::vector<FoPtr> witnesses);
FP f_subst_node(FP subject, FP evidence, std::optional<std::string> hole, DF anno,
                std::optional<std::string> label = {});
FP f_inst(FP subject, std::vector<FoPtr> args);
FP f_ascribe(FP subject, DF type);

bool f_is_value(const FP& t);
bool f_equal_raw(const FP& a, const FP& b);  // structural, annotations included
bool f_alpha_eq(const FP& a, const FP& b);   // on erased shapes

FP erase(const FP& t);  // strip Pack/Subst/Inst/Ascribe and motives

std::set<std::string> f_free_vars(const FP& t);

// Deterministic fresh-name supply; seeded with the names to avoid.
struct FreshGen {
  std::set<std::string> used;
  long counter = 0;
  std::string fresh(const std::string& base);
  void avoid(const FP& t);
  void avoid(const std::set<std::string>& names);
};

// Simultaneous capture-avoiding substitution.
FP f_subst(const FP& t, const std::map<std::string, FP>& env);

enum class StepStatus { Stepped, AtValue, Stuck };

struct StepResult {
  StepStatus status;
  FP term;            // successor / the value / the offending redex
  std::string why;    // stuck diagnostics
};

StepResult f_step(const FP& t);  // erased term

enum class RunStatus { Value, FuelExhausted, Stuck };

struct RunResult {
  RunStatus status;
  FP term;
  long long steps = 0;
  std::string why;
};

RunResult f_eval(FP t, long long fuel = 1000000);

// Full normalization (the CBV redexes closed under arbitrary contexts,
// leftmost-outermost); decides conversion on terminating terms.
RunResult f_normalize(FP t, long long fuel = 100000);

// Rewrites every ((fn p => b) a) node into (let p = a in b); the two forms
// are CBV-bisimilar. Used by the simulation checker's comparisons.
FP let_normalize(const FP& t);

// Def 2.13 classification.
enum class Monadic { InV, InL, Neither };
Monadic f_is_monadic(const FP& t);
bool in_V(const FP& t);
bool in_L(const FP& t);

// Def A.1: monadic normal form translation; result is in L.
FP f_sharp(const FP& t);

std::string f_show(const FP& t);

}  // namespace loopf::flang
