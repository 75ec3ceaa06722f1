#pragma once

// The FS (Fig 3.1) and FD / FD^c (Fig 4.1, section 5.1) checkers,
// implemented bidirectionally over annotated terms.

#include "loopf/fterm.hpp"

namespace loopf::flang {

using types::DF;
using types::SF;

// -------------------------------------------------------------------- FS

struct FsEnv {
  std::vector<std::pair<std::string, SF>> vars;
  const SF* lookup(const std::string& n) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
};

struct FsResult {
  bool ok = false;
  SF type;
  std::string error;
};

// expected == nullptr: synthesis mode. When `record` is given, it is filled
// with the inferred type of every subterm (used by the diamond translation
// to annotate the procedures it introduces).
FsResult f_check_simple(const FsEnv& env, const FP& t, SF expected = nullptr,
                        std::map<const FTerm*, SF>* record = nullptr);

// -------------------------------------------------------------------- FD

struct FdEnv {
  std::vector<std::pair<std::string, DF>> vars;
  const DF* lookup(const std::string& n) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      if (it->first == n) return &it->second;
    return nullptr;
  }
};

struct FdCtx {
  const arith::EqSystem* E;
  bool classical = false;
  // optional map filled with the type derived for every node; consumed by
  // the cps transform to place ascriptions
  std::map<const FTerm*, DF>* record = nullptr;
  long eigen_counter = 0;
  // index variables currently treated as rigid (opened binders)
  std::set<std::string> rigid;
  std::string fresh_index() { return "$e" + std::to_string(++eigen_counter); }
};

struct FdResult {
  bool ok = false;
  DF type;
  std::string error;
};

FdResult fd_synth(FdCtx& ctx, const FdEnv& env, const FP& t);
FdResult fd_check(FdCtx& ctx, const FdEnv& env, const FP& t, const DF& expected);

// Convenience wrapper matching the spec's f-check-dep surface.
FdResult f_check_dep(const arith::EqSystem& E, const FdEnv& env, const FP& t,
                     const DF& expected, bool classical);

// First-order matching lifted to dependent types: instantiates `pvars`
// (index variables) in `pattern` to make it alpha-equal to `subject`.
bool type_match(const DF& pattern, const DF& subject,
                const std::set<std::string>& pvars,
                std::map<std::string, arith::FoPtr>& theta);

// Collects the index-term disagreements between two structurally equal
// types; empty vector = alpha-equal. nullopt = shapes differ.
std::optional<std::vector<std::pair<arith::FoPtr, arith::FoPtr>>> type_diff(
    const DF& a, const DF& b);

}  // namespace loopf::flang
