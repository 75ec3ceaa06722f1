#pragma once

// The pseudo-dynamic checkers for language I: IS (Fig B.1, expression rules
// of Fig 3.2) and ID / ID^c (Fig C.1, section 6.1), in the sequence-directed
// formulation with a forward-flowing mutable environment.

#include "loopf/iterm.hpp"

namespace loopf::ilang {

using types::DI;
using types::SI;

// ordered mutable environment (the Omega of the judgments)
template <typename T>
struct OutEnvT {
  std::vector<std::pair<std::string, T>> items;

  const T* lookup(const std::string& n) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
  bool update(const std::string& n, T v) {
    for (auto& [k, val] : items)
      if (k == n) {
        val = std::move(v);
        return true;
      }
    return false;
  }
  void extend(const std::string& n, T v) { items.emplace_back(n, std::move(v)); }
  void remove(const std::string& n) {
    for (auto it = items.begin(); it != items.end(); ++it)
      if (it->first == n) {
        items.erase(it);
        return;
      }
  }
};

using OutEnv = OutEnvT<DI>;
using OutEnvS = OutEnvT<SI>;

// read-only environment entry: a plain type, a type scheme (opaque atoms,
// instantiated per call site), or a continuation parameter whose type is
// still being inferred from its jump sites
template <typename T>
struct RoBindingT {
  T type;
  std::vector<std::string> atoms;  // nonempty: scheme over these type atoms
  int pending_label = -1;          // >= 0: label whose type is being inferred
};

template <typename T>
struct RoEnvT {
  std::vector<std::pair<std::string, RoBindingT<T>>> vars;
  const RoBindingT<T>* lookup(const std::string& n) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
  void bind(const std::string& n, T ty) { vars.push_back({n, {std::move(ty), {}, -1}}); }
};

using IdEnv = RoEnvT<DI>;
using IsEnv = RoEnvT<SI>;

struct ICheckResult {
  bool ok = false;
  OutEnv out;    // dependent result (full final environment)
  OutEnvS sout;  // simple result
  std::string error;
};

// Gamma; Omega |- s |> Omega' in ID (classical: ID^c). `s` must be desugared.
ICheckResult i_check_dep(const arith::EqSystem& E, const IdEnv& gamma,
                         const OutEnv& omega, const SP& s, bool classical);

// Same for IS; dependent annotations are consumed through kappa.
ICheckResult i_check_simple(const IsEnv& gamma, const OutEnvS& omega, const SP& s,
                            bool classical);

// Expression typing (synthesis); used for store values and tests.
struct IdExprResult {
  bool ok = false;
  DI type;
  std::string error;
};
IdExprResult id_type_expr(const arith::EqSystem& E, const IdEnv& gamma,
                          const OutEnv& omega, const EP& e, bool classical);

struct IsExprResult {
  bool ok = false;
  SI type;
  std::string error;
};
IsExprResult is_type_expr(const IsEnv& gamma, const OutEnvS& omega, const EP& e,
                          bool classical);

// Defs 3.2 / 3.3: store and state typing at simple types. The candidate
// store typing is synthesized from the values.
struct StateCheckResult {
  bool ok = false;
  OutEnvS store_types;
  std::string error;
};
StateCheckResult i_check_state(const State& st, bool classical);

// Prop 4.6 as an executable check: an ID-accepted sequence re-checks in IS
// under the erased environments with the erased result.
struct EraseCheckResult {
  bool ok = false;
  std::string error;
};
EraseCheckResult kappa_erase_check(const arith::EqSystem& E, const IdEnv& gamma,
                                   const OutEnv& omega, const SP& s, bool classical);

// first-order matching / diff lifted to DI types (shared with the F side)
bool di_type_match(const DI& pattern, const DI& subject,
                   const std::set<std::string>& pvars,
                   std::map<std::string, arith::FoPtr>& theta);
std::optional<std::vector<std::pair<arith::FoPtr, arith::FoPtr>>> di_type_diff(
    const DI& a, const DI& b);

}  // namespace loopf::ilang
