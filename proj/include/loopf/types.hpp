#pragma once

// The four type grammars (FS, IS, FD, ID), alpha-equality, the forgetful
// maps and the type-level translations (star, diamond, cps, natural).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loopf/arith.hpp"

namespace loopf::types {

using arith::FoPtr;

// ---------------------------------------------------------------- simple F

enum class SFK { Nat, Unit, Arrow, Product, Bottom, Atom };

struct SimpleFType;
using SF = std::shared_ptr<const SimpleFType>;

struct SimpleFType {
  SFK k;
  SF a, b;               // Arrow
  std::vector<SF> comps; // Product, length >= 2
  std::string atom;
};

SF sf_nat();
SF sf_unit();
SF sf_arrow(SF a, SF b);
SF sf_product(std::vector<SF> comps);  // 0 -> unit, 1 -> the component
SF sf_bottom();
SF sf_atom(const std::string& name);

// ---------------------------------------------------------------- simple I

enum class SIK { Nat, Unit, Proc, Tuple, Bottom, Atom };

struct SimpleIType;
using SI = std::shared_ptr<const SimpleIType>;

struct SimpleIType {
  SIK k;
  std::vector<SI> ins, outs;  // Proc; outs nonempty
  std::vector<SI> comps;      // Tuple, length >= 2
  std::string atom;
};

SI si_nat();
SI si_unit();
SI si_proc(std::vector<SI> ins, std::vector<SI> outs);
SI si_tuple(std::vector<SI> comps);
SI si_bottom();
SI si_atom(const std::string& name);
SI si_not(std::vector<SI> ins);  // proc(in ins; out bot)

// ------------------------------------------------------------- dependent F

enum class DFK { Nat, Equal, Forall, Exists, Bottom, O, Atom, Any };

struct DepFType;
using DF = std::shared_ptr<const DepFType>;

struct DepFType {
  DFK k;
  FoPtr n, m;                     // Nat(n), Equal(n, m)
  std::vector<std::string> ivars; // Forall / Exists binders
  DF ant, cons;                   // Forall
  std::vector<DF> comps;          // Exists conjuncts, >= 1
  std::string atom;
};

DF df_nat(FoPtr n);
DF df_equal(FoPtr n, FoPtr m);
DF df_top();  // 0 = 0
DF df_forall(std::vector<std::string> ivars, DF ant, DF cons);
DF df_exists(std::vector<std::string> ivars, std::vector<DF> comps);
DF df_bottom();
DF df_o();
DF df_atom(const std::string& name);
DF df_any();
DF df_not(DF a);                 // a => bot
DF df_nabla(DF a);               // (a => o) => o

// ------------------------------------------------------------- dependent I

enum class DIK { Nat, Equal, Proc, Exists, Bottom, Atom, Any };

struct DepIType;
using DI = std::shared_ptr<const DepIType>;

struct DepIType {
  DIK k;
  FoPtr n, m;
  std::vector<std::string> ivars;  // Proc forall / Exists binders
  std::vector<DI> ins, outs;       // Proc, outs nonempty
  std::vector<DI> comps;           // Exists, >= 1
  std::string atom;
};

DI di_nat(FoPtr n);
DI di_equal(FoPtr n, FoPtr m);
DI di_top();
DI di_proc(std::vector<std::string> ivars, std::vector<DI> ins, std::vector<DI> outs);
DI di_exists(std::vector<std::string> ivars, std::vector<DI> comps);
DI di_bottom();
DI di_atom(const std::string& name);
DI di_any();
DI di_not(std::vector<DI> ins);

// --------------------------------------------------------------- equality

bool alpha_eq(const SF& a, const SF& b);
bool alpha_eq(const SI& a, const SI& b);
bool alpha_eq(const DF& a, const DF& b);
bool alpha_eq(const DI& a, const DI& b);

// Checker-side comparison: like alpha_eq but Any matches anything.
bool compat(const DF& a, const DF& b);
bool compat(const DI& a, const DI& b);
bool compat(const SI& a, const SI& b);

bool contains_var(const DF& t, const std::string& v);  // free index var
bool contains_var(const DI& t, const std::string& v);
bool contains_any(const DI& t);
bool contains_any(const DF& t);

DF subst_index(const DF& t, const std::string& var, const FoPtr& n);
DI subst_index(const DI& t, const std::string& var, const FoPtr& n);
DF subst_index_many(const DF& t, const std::map<std::string, FoPtr>& env);
DI subst_index_many(const DI& t, const std::map<std::string, FoPtr>& env);

DF subst_atoms(const DF& t, const std::map<std::string, DF>& env);
DI subst_atoms(const DI& t, const std::map<std::string, DI>& env);
SI subst_atoms(const SI& t, const std::map<std::string, SI>& env);

DF subst_o(const DF& t, const DF& target);  // Friedman instantiation

// ------------------------------------------------------------ translations

// kappa: computational content (Defs 4.4 / 4.5); fails on bottom/o.
std::optional<SF> kappa_f(const DF& t);
std::optional<SI> kappa_i(const DI& t);

// Vector conventions: 0 -> unit/top, 1 -> the component, n -> product/conj.
SF pack_sf(const std::vector<SF>& v);
DF pack_df(const std::vector<DF>& v);
std::vector<SF> unpack_sf(const SF& t);
std::vector<DF> unpack_df(const DF& t);

SF star_type(const SI& t);
DF star_type(const DI& t);
SI diamond_type(const SF& t);
DI diamond_type(const DF& t);

DF cps_type(const DF& t);  // Def 5.1

SF natural_type(const SF& t);  // Def B.5
DF natural_type(const DF& t);  // Def C.7

// ---------------------------------------------------------------- printing

std::string show(const SF& t);
std::string show(const SI& t);
std::string show(const DF& t);
std::string show(const DI& t);

// --------------------------------------------------------------- generator

enum class TypeFamily { SimpleF, SimpleI, DepF, DepI };

struct TypeGen {
  explicit TypeGen(std::uint64_t seed) : state(seed) {}
  std::uint64_t state;
  std::uint64_t next();
  std::uint64_t below(std::uint64_t n);

  SF gen_sf(int depth);
  SI gen_si(int depth);
  DF gen_df(int depth);
  DI gen_di(int depth);
  FoPtr gen_index(int depth);
};

}  // namespace loopf::types
