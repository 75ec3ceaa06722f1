#pragma once

// Recursive-descent parsers for the three surface syntaxes: equational
// theories (.eq), F terms (.fun) and I programs (.loop), plus the shared
// type grammar. Pretty-printing lives with the ASTs; parse(print(a))
// is alpha-equal to a.

#include "loopf/fterm.hpp"
#include "loopf/iterm.hpp"

namespace loopf::parser {

struct ParseError {
  std::string message;
  int line = 0;
  int col = 0;
  std::string show() const {
    return "parse error at " + std::to_string(line) + ":" + std::to_string(col) +
           ": " + message;
  }
};

arith::EqSystem parse_theory(const std::string& text);

// a .fun unit: one term with an optional top-level ascription
struct FUnit {
  flang::FP term;
  types::DF dep_type;    // `t : T` with a dependent T
  types::SF simple_type; // `t : T` with a simple T
};
FUnit parse_funit(const std::string& text);
flang::FP parse_fterm(const std::string& text);

ilang::SP parse_iprog(const std::string& text);

types::DF parse_df(const std::string& text);
types::DI parse_di(const std::string& text);
types::SF parse_sf(const std::string& text);
types::SI parse_si(const std::string& text);
arith::FoPtr parse_foterm(const std::string& text);

}  // namespace loopf::parser
