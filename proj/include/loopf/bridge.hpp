#pragma once

// The translations between I and F: star (Def 2.11), diamond (Def 2.16),
// and executable checkers for the simulation (Prop 2.12), retraction
// (Props 2.19/2.20) and representation (Prop 4.3 / Cor 4.10) results.

#include "loopf/fterm.hpp"
#include "loopf/iterm.hpp"

namespace loopf::bridge {

using flang::FP;
using ilang::EP;
using ilang::SP;
using ilang::Store;

// ------------------------------------------------------------------- star

FP star_expr(const EP& e);
// (s)*_outs; dependent annotations (invariants, hints, declared proc types)
// are carried across as rec motives, subst nodes and ascriptions.
FP star_seq(const SP& s, const std::vector<std::string>& outs);

// the translated-substituted form (s)*_z [mu(x)* / x] of Thm 3.8
FP star_state(const ilang::State& st, const std::vector<std::string>& outs);

// ---------------------------------------------------------------- diamond

struct NotMonadic {
  std::string message;
};

// Optional simple-type information used to annotate the procedures the
// translation introduces (so the image is IS-synthesizable).
using SfMap = std::map<const flang::FTerm*, types::SF>;

EP diamond_value(const FP& v, flang::FreshGen& g, const SfMap* tys = nullptr);
SP diamond_term(const FP& t, const std::vector<std::string>& outs,
                flang::FreshGen& g, const SfMap* tys = nullptr);

// tuple arity of a term of L (Lemma C.6's n)
std::size_t l_arity(const FP& t);

// ------------------------------------------------------------- simulation

struct SimStep {
  std::string rule;     // printed imperative command kind
  long long f_steps;    // reduction steps consumed by this segment
};

struct SimulationReport {
  bool pass = false;
  long long total_steps = 0;
  long long max_f_steps = 0;
  std::vector<SimStep> steps;
  std::string error;
};

// Runs the imperative trace and verifies each step's translated state
// reaches the next one (alpha-equality modulo administrative
// let-normalization), within per_step_cap reductions.
SimulationReport check_simulation(SP s, Store mu, const std::vector<std::string>& outs,
                                  long long fuel = 100000,
                                  long long per_step_cap = 64);

// -------------------------------------------------------------- retraction

struct RetractionReport {
  bool pass = false;
  std::string error;
  FP normal_lhs, normal_rhs;
};

// t in L: star(diamond(t)) is convertible with t, decided on normal forms.
RetractionReport check_retraction(const FP& t, long long fuel = 100000);

// ----------------------------------------------------------- representation

struct RepresentsReport {
  bool pass = false;
  std::string error;
  long long cases = 0;
};

// For each input vector: i-run of p's call, fo-eval of f(inputs) and f-eval
// of p* applied to the translated inputs must agree exactly.
RepresentsReport check_represents(const EP& p, const std::string& fsym,
                                  const arith::EqSystem& E,
                                  const std::vector<std::vector<arith::Nat>>& inputs,
                                  long long fuel = 2000000);

}  // namespace loopf::bridge
