#pragma once

// Language I: surface + core AST, the desugarings (vector declarations,
// global-variable threading, labels/jumps, named procs), and the
// transition semantics of Fig 2.2.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loopf/types.hpp"

namespace loopf::ilang {

using arith::Nat;
using types::DI;

enum class EK { Var, Star, Num, Tuple, Proc, CallccConst, ThrowConst };

struct Expr;
struct Seq;
struct Command;
using EP = std::shared_ptr<const Expr>;
using SP = std::shared_ptr<const Seq>;
using CP = std::shared_ptr<const Command>;

struct Expr {
  EK k;
  std::string name;       // Var
  Nat num;                // Num
  std::vector<EP> comps;  // Tuple
  // Proc literal
  std::vector<std::string> ivars;  // declared index quantifiers
  std::vector<std::string> ins, outs;
  std::vector<DI> in_types, out_types;  // empty or one per parameter
  std::vector<std::string> globals;     // [z...] sugar, removed by desugar
  SP body;
};

enum class CK { Block, For, Assign, Inc, Dec, Call, SubstHint, Label, Jump };

struct Command {
  CK k;
  // Block / For / Label
  SP body;
  std::vector<std::string> annot;  // {s}[x,...] mutable annotation
  // For
  std::string loop_var;
  EP bound;
  std::optional<std::string> inv_var;
  std::vector<std::pair<std::string, DI>> invariant;
  // Assign
  std::vector<std::string> targets;
  EP src;
  // Inc / Dec
  std::string var;
  // Call
  EP callee;
  std::vector<EP> args;
  std::vector<std::string> call_outs;
  std::vector<std::string> globals;               // p(e;y)[z] sugar
  std::vector<std::pair<std::string, DI>> inst;   // scheme instantiation braces
  // SubstHint: either hole form [i | x: T,...] via label/ev, or target form
  std::optional<std::string> hint_hole;
  std::vector<std::pair<std::string, DI>> hint_items;
  std::optional<std::string> hint_label;
  EP hint_ev;
  // Label
  std::string label_name;
  std::vector<std::string> label_ivars;
  std::vector<DI> label_types;
  // Jump
  EP jump_target;
  std::vector<EP> jump_args;
  std::vector<std::string> jump_outs;
};

enum class SK { Empty, Cmd, Cst, Var };

struct Seq {
  SK k;
  CP cmd;
  SP rest;
  std::string name;  // Cst / Var binder
  EP init;
  std::vector<std::string> scheme_atoms;  // cst p : forall a b. T = ...
  DI decl_type;                           // optional declared type on cst
};

// ------------------------------------------------------------ constructors

EP e_var(const std::string& n);
EP e_star();
EP e_num(const Nat& n);
EP e_tuple(std::vector<EP> comps);
EP e_proc(std::vector<std::string> ivars, std::vector<std::string> ins,
          std::vector<std::string> outs, SP body, std::vector<DI> in_types = {},
          std::vector<DI> out_types = {}, std::vector<std::string> globals = {});
EP e_callcc();
EP e_throw();

SP s_empty();
SP s_cmd(CP c, SP rest);
SP s_cst(const std::string& n, EP init, SP rest,
         std::vector<std::string> atoms = {}, DI decl = nullptr);
SP s_var(const std::string& n, EP init, SP rest);

CP c_block(SP body, std::vector<std::string> annot);
CP c_for(const std::string& var, EP bound, SP body, std::vector<std::string> annot,
         std::optional<std::string> inv_var = {},
         std::vector<std::pair<std::string, DI>> invariant = {});
CP c_assign(std::vector<std::string> targets, EP src);
CP c_inc(const std::string& v);
CP c_dec(const std::string& v);
CP c_call(EP callee, std::vector<EP> args, std::vector<std::string> outs,
          std::vector<std::string> globals = {},
          std::vector<std::pair<std::string, DI>> inst = {});
CP c_subst_hint(std::optional<std::string> hole,
                std::vector<std::pair<std::string, DI>> items,
                std::optional<std::string> label = {}, EP ev = nullptr);
CP c_label(const std::string& name, SP body, std::vector<std::string> annot,
           std::vector<std::string> ivars = {}, std::vector<DI> tys = {});
CP c_jump(EP target, std::vector<EP> args, std::vector<std::string> outs);

// ------------------------------------------------------------------ store

// Ordered store: update preserves order, extension appends (Notation 2.9).
struct Store {
  std::vector<std::pair<std::string, EP>> items;
  const EP* lookup(const std::string& n) const;
  bool update(const std::string& n, EP v);  // false if absent
  void extend(const std::string& n, EP v);
};

struct State {
  SP seq;
  Store store;
};

bool e_is_value(const EP& e);
bool e_equal(const EP& a, const EP& b);  // structural (procs compared by AST)
bool seq_equal(const SP& a, const SP& b);

// phi_mu: the trivial extension of the store to expressions (Notation 2.7).
// nullptr when an unbound variable blocks it.
EP eval_expr(const Store& mu, const EP& e);

// free identifiers (Appendix A.1)
std::set<std::string> free_idents(const SP& s);
std::set<std::string> free_idents(const EP& e);
// identifiers occurring in mutable position (assigned, inc/dec, call out, ...)
std::set<std::string> free_mutables(const SP& s);

SP subst_ro(const SP& s, const std::map<std::string, EP>& env);
EP subst_ro(const EP& e, const std::map<std::string, EP>& env);
SP rename_mut(const SP& s, const std::map<std::string, std::string>& ren);

// -------------------------------------------------------------- desugaring

struct DesugarError {
  std::string message;
};

// Expands labels/jumps, global-variable subscripts, named procs, empty in
// lists; fills missing block annotations; idempotent on core output.
// Throws DesugarError.
SP i_desugar(const SP& s);

// ------------------------------------------------------------- transitions

enum class IStatus { Stepped, AtEmpty, Stuck };

struct IStepResult {
  IStatus status;
  State state;
  std::string why;
};

IStepResult i_step(const State& st);

enum class IRunStatus { Done, FuelExhausted, Stuck };

struct IRunResult {
  IRunStatus status;
  Store store;
  State state;  // final / offending
  long long steps = 0;
  std::string why;
};

IRunResult i_run(SP s, Store mu, long long fuel = 1000000);

std::string i_show(const SP& s);
std::string i_show(const EP& e);
std::string show_store(const Store& mu);

}  // namespace loopf::ilang
