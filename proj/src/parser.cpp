#include "loopf/parser.hpp"

#include <cctype>
#include <functional>

namespace loopf::parser {

using namespace loopf;
using arith::FoPtr;
using arith::Nat;
using types::DF;
using types::DI;
using types::SF;
using types::SI;

namespace {

// ---------------------------------------------------------------- lexer

struct Token {
  enum K { Ident, Number, Sym, End } k = End;
  std::string text;
  Nat num;
  int line = 1, col = 1;
};

struct Lexer {
  std::string src;
  std::size_t pos = 0;
  int line = 1, col = 1;
  Token tok;

  explicit Lexer(std::string s) : src(std::move(s)) { advance(); }

  [[noreturn]] void err(const std::string& m) const {
    throw ParseError{m, tok.line, tok.col};
  }

  void bump(char c) {
    ++pos;
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }

  void skip_ws() {
    for (;;) {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
        bump(src[pos]);
      if (pos + 1 < src.size() && src[pos] == '-' && src[pos + 1] == '-') {
        while (pos < src.size() && src[pos] != '\n') bump(src[pos]);
        continue;
      }
      break;
    }
  }

  void advance() {
    skip_ws();
    tok = Token{};
    tok.line = line;
    tok.col = col;
    if (pos >= src.size()) {
      tok.k = Token::End;
      return;
    }
    char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::string s;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
              src[pos] == '\'' || src[pos] == '$')) {
        s += src[pos];
        bump(src[pos]);
      }
      tok.k = Token::Ident;
      tok.text = std::move(s);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        s += src[pos];
        bump(src[pos]);
      }
      tok.k = Token::Number;
      tok.num = Nat(s);
      tok.text = std::move(s);
      return;
    }
    auto two = [&](const char* t) {
      return pos + 1 < src.size() && src[pos] == t[0] && src[pos + 1] == t[1];
    };
    static const char* twos[] = {":=", "->", "=>", "/\\"};
    for (const char* t : twos) {
      if (two(t)) {
        tok.k = Token::Sym;
        tok.text = t;
        bump(src[pos]);
        bump(src[pos]);
        return;
      }
    }
    tok.k = Token::Sym;
    tok.text = std::string(1, c);
    bump(c);
  }

  bool is_sym(const char* s) const { return tok.k == Token::Sym && tok.text == s; }
  bool is_kw(const char* s) const { return tok.k == Token::Ident && tok.text == s; }

  void expect_sym(const char* s) {
    if (!is_sym(s)) err(std::string("expected '") + s + "', found '" + tok.text + "'");
    advance();
  }

  void expect_kw(const char* s) {
    if (!is_kw(s)) err(std::string("expected '") + s + "', found '" + tok.text + "'");
    advance();
  }

  std::string expect_ident() {
    if (tok.k != Token::Ident) err("expected an identifier, found '" + tok.text + "'");
    std::string s = tok.text;
    advance();
    return s;
  }

  struct Mark {
    std::size_t pos;
    int line, col;
    Token tok;
  };
  Mark mark() const { return {pos, line, col, tok}; }
  void reset(const Mark& m) {
    pos = m.pos;
    line = m.line;
    col = m.col;
    tok = m.tok;
  }
};

// ------------------------------------------------------- first-order terms

FoPtr fo_term(Lexer& lx);

FoPtr fo_atom(Lexer& lx) {
  if (lx.tok.k == Token::Number) {
    Nat n = lx.tok.num;
    lx.advance();
    return arith::fo_num(n);
  }
  if (lx.is_sym("(")) {
    lx.advance();
    FoPtr t = fo_term(lx);
    lx.expect_sym(")");
    return t;
  }
  if (lx.tok.k == Token::Ident) {
    std::string name = lx.expect_ident();
    if (name == "s" || name == "p") {
      Nat count = 1;
      if (name == "s" && lx.is_sym("^")) {
        lx.advance();
        if (lx.tok.k != Token::Number) lx.err("expected a count after s^");
        count = lx.tok.num;
        lx.advance();
      }
      lx.expect_sym("(");
      FoPtr t = fo_term(lx);
      lx.expect_sym(")");
      return name == "s" ? arith::fo_succ(t, count) : arith::fo_pred(t);
    }
    if (lx.is_sym("(")) {
      lx.advance();
      std::vector<FoPtr> args;
      if (!lx.is_sym(")")) {
        args.push_back(fo_term(lx));
        while (lx.is_sym(",")) {
          lx.advance();
          args.push_back(fo_term(lx));
        }
      }
      lx.expect_sym(")");
      return arith::fo_app(name, std::move(args));
    }
    return arith::fo_var(name);
  }
  lx.err("expected a first-order term");
}

FoPtr fo_prod(Lexer& lx) {
  FoPtr t = fo_atom(lx);
  while (lx.is_sym("*")) {
    lx.advance();
    t = arith::fo_mul(t, fo_atom(lx));
  }
  return t;
}

FoPtr fo_term(Lexer& lx) {
  FoPtr t = fo_prod(lx);
  while (lx.is_sym("+")) {
    lx.advance();
    t = arith::fo_add(t, fo_prod(lx));
  }
  return t;
}

// ------------------------------------------------------------------- types

// neutral type syntax, lowered per family
struct TypeAst;
using TP = std::shared_ptr<TypeAst>;

struct TypeAst {
  enum K {
    Nat, NatIdx, Unit, Top, Bot, O, Atom, Tuple, Conj, Arrow, Forall, Exists,
    Proc, Equal, Not
  } k;
  FoPtr n, m;
  std::vector<TP> comps, ins, outs;
  TP a, b;
  std::vector<std::string> ivars;
  std::string atom;
};

TP mk_ty(TypeAst::K k) {
  auto t = std::make_shared<TypeAst>();
  t->k = k;
  return t;
}

TP type_expr(Lexer& lx);

bool starts_type(const Lexer& lx) {
  if (lx.tok.k != Token::Ident) return lx.is_sym("'");
  const std::string& s = lx.tok.text;
  return s == "nat" || s == "unit" || s == "top" || s == "bot" || s == "o" ||
         s == "proc" || s == "forall" || s == "exists" || s == "not";
}

TP type_primary(Lexer& lx) {
  if (lx.is_sym("'")) {
    lx.advance();
    auto t = mk_ty(TypeAst::Atom);
    t->atom = lx.expect_ident();
    return t;
  }
  if (lx.is_kw("nat")) {
    lx.advance();
    if (lx.is_sym("(")) {
      lx.advance();
      auto t = mk_ty(TypeAst::NatIdx);
      t->n = fo_term(lx);
      lx.expect_sym(")");
      return t;
    }
    return mk_ty(TypeAst::Nat);
  }
  if (lx.is_kw("unit")) { lx.advance(); return mk_ty(TypeAst::Unit); }
  if (lx.is_kw("top")) { lx.advance(); return mk_ty(TypeAst::Top); }
  if (lx.is_kw("bot")) { lx.advance(); return mk_ty(TypeAst::Bot); }
  if (lx.is_kw("o")) { lx.advance(); return mk_ty(TypeAst::O); }
  if (lx.is_kw("not")) {
    lx.advance();
    lx.expect_sym("(");
    auto t = mk_ty(TypeAst::Not);
    t->comps.push_back(type_expr(lx));
    while (lx.is_sym(",")) {
      lx.advance();
      t->comps.push_back(type_expr(lx));
    }
    lx.expect_sym(")");
    return t;
  }
  if (lx.is_kw("forall")) {
    lx.advance();
    auto t = mk_ty(TypeAst::Forall);
    t->ivars.push_back(lx.expect_ident());
    while (lx.is_sym(",")) {
      lx.advance();
      t->ivars.push_back(lx.expect_ident());
    }
    lx.expect_sym(".");
    lx.expect_sym("(");
    t->a = type_expr(lx);
    lx.expect_sym("=>");
    t->b = type_expr(lx);
    lx.expect_sym(")");
    return t;
  }
  if (lx.is_kw("exists")) {
    lx.advance();
    auto t = mk_ty(TypeAst::Exists);
    if (!lx.is_sym(".")) {
      t->ivars.push_back(lx.expect_ident());
      while (lx.is_sym(",")) {
        lx.advance();
        t->ivars.push_back(lx.expect_ident());
      }
    }
    lx.expect_sym(".");
    lx.expect_sym("(");
    t->comps.push_back(type_expr(lx));
    while (lx.is_sym(",") || lx.is_sym("/\\")) {
      lx.advance();
      t->comps.push_back(type_expr(lx));
    }
    lx.expect_sym(")");
    return t;
  }
  if (lx.is_kw("proc")) {
    lx.advance();
    auto t = mk_ty(TypeAst::Proc);
    if (lx.is_kw("forall")) {
      lx.advance();
      t->ivars.push_back(lx.expect_ident());
      while (lx.is_sym(",")) {
        lx.advance();
        t->ivars.push_back(lx.expect_ident());
      }
    }
    lx.expect_sym("(");
    lx.expect_kw("in");
    if (!lx.is_sym(";")) {
      t->ins.push_back(type_expr(lx));
      while (lx.is_sym(",")) {
        lx.advance();
        t->ins.push_back(type_expr(lx));
      }
    }
    lx.expect_sym(";");
    lx.expect_kw("out");
    t->outs.push_back(type_expr(lx));
    while (lx.is_sym(",")) {
      lx.advance();
      t->outs.push_back(type_expr(lx));
    }
    lx.expect_sym(")");
    return t;
  }
  if (lx.is_sym("(")) {
    lx.advance();
    TP first = type_expr(lx);
    if (lx.is_sym(")")) {
      lx.advance();
      return first;
    }
    if (lx.is_sym("=>")) {
      lx.advance();
      auto t = mk_ty(TypeAst::Forall);  // empty quantifier: plain implication
      t->a = first;
      t->b = type_expr(lx);
      lx.expect_sym(")");
      return t;
    }
    bool conj = lx.is_sym("/\\");
    auto t = mk_ty(conj ? TypeAst::Conj : TypeAst::Tuple);
    t->comps.push_back(first);
    while (lx.is_sym(",") || lx.is_sym("/\\")) {
      lx.advance();
      t->comps.push_back(type_expr(lx));
    }
    lx.expect_sym(")");
    return t;
  }
  // fall back to an equality between first-order terms
  FoPtr n = fo_term(lx);
  lx.expect_sym("=");
  auto t = mk_ty(TypeAst::Equal);
  t->n = n;
  t->m = fo_term(lx);
  return t;
}

TP type_expr(Lexer& lx) {
  // possibly an equality whose left side parses like a type keyword? the
  // keywords cannot start a first-order term, so order is: type first, and
  // an '=' after a non-type means equality was intended from the start.
  if (!starts_type(lx) && !lx.is_sym("(")) {
    FoPtr n = fo_term(lx);
    if (lx.is_sym("=")) {
      lx.advance();
      auto t = mk_ty(TypeAst::Equal);
      t->n = n;
      t->m = fo_term(lx);
      return t;
    }
    // a bare first-order variable is not a type
    throw ParseError{"expected a type", lx.tok.line, lx.tok.col};
  }
  auto m = lx.mark();
  try {
    TP t = type_primary(lx);
    if (lx.is_sym("->")) {
      lx.advance();
      auto a = mk_ty(TypeAst::Arrow);
      a->a = t;
      a->b = type_expr(lx);
      return a;
    }
    return t;
  } catch (const ParseError&) {
    // backtrack: '(' fo ')' shapes inside an equality
    lx.reset(m);
    FoPtr n = fo_term(lx);
    lx.expect_sym("=");
    auto t = mk_ty(TypeAst::Equal);
    t->n = n;
    t->m = fo_term(lx);
    return t;
  }
}

[[noreturn]] void family_err(const char* family, const TP&) {
  throw ParseError{std::string("type does not fit the ") + family + " grammar", 0, 0};
}

SF to_sf(const TP& t) {
  switch (t->k) {
    case TypeAst::Nat: return types::sf_nat();
    case TypeAst::Unit: return types::sf_unit();
    case TypeAst::Bot: return types::sf_bottom();
    case TypeAst::Atom: return types::sf_atom(t->atom);
    case TypeAst::Tuple:
    case TypeAst::Conj: {
      std::vector<SF> cs;
      for (const auto& c : t->comps) cs.push_back(to_sf(c));
      return types::sf_product(std::move(cs));
    }
    case TypeAst::Arrow: return types::sf_arrow(to_sf(t->a), to_sf(t->b));
    default: family_err("simple functional", t);
  }
}

SI to_si(const TP& t) {
  switch (t->k) {
    case TypeAst::Nat: return types::si_nat();
    case TypeAst::Unit: return types::si_unit();
    case TypeAst::Bot: return types::si_bottom();
    case TypeAst::Atom: return types::si_atom(t->atom);
    case TypeAst::Tuple:
    case TypeAst::Conj: {
      std::vector<SI> cs;
      for (const auto& c : t->comps) cs.push_back(to_si(c));
      return types::si_tuple(std::move(cs));
    }
    case TypeAst::Not: {
      std::vector<SI> ins;
      for (const auto& c : t->comps) ins.push_back(to_si(c));
      return types::si_not(std::move(ins));
    }
    case TypeAst::Proc: {
      if (!t->ivars.empty()) family_err("simple imperative", t);
      std::vector<SI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(to_si(c));
      for (const auto& c : t->outs) outs.push_back(to_si(c));
      return types::si_proc(std::move(ins), std::move(outs));
    }
    default: family_err("simple imperative", t);
  }
}

DF to_df(const TP& t) {
  switch (t->k) {
    case TypeAst::NatIdx: return types::df_nat(t->n);
    case TypeAst::Equal: return types::df_equal(t->n, t->m);
    case TypeAst::Top: return types::df_top();
    case TypeAst::Bot: return types::df_bottom();
    case TypeAst::O: return types::df_o();
    case TypeAst::Atom: return types::df_atom(t->atom);
    case TypeAst::Forall:
      return types::df_forall(t->ivars, to_df(t->a), to_df(t->b));
    case TypeAst::Exists: {
      std::vector<DF> cs;
      for (const auto& c : t->comps) cs.push_back(to_df(c));
      return types::df_exists(t->ivars, std::move(cs));
    }
    case TypeAst::Conj:
    case TypeAst::Tuple: {
      std::vector<DF> cs;
      for (const auto& c : t->comps) cs.push_back(to_df(c));
      return types::df_exists({}, std::move(cs));
    }
    case TypeAst::Not: {
      std::vector<DF> cs;
      for (const auto& c : t->comps) cs.push_back(to_df(c));
      return types::df_not(types::pack_df(cs));
    }
    default: family_err("dependent functional", t);
  }
}

DI to_di(const TP& t) {
  switch (t->k) {
    case TypeAst::NatIdx: return types::di_nat(t->n);
    case TypeAst::Equal: return types::di_equal(t->n, t->m);
    case TypeAst::Top: return types::di_top();
    case TypeAst::Bot: return types::di_bottom();
    case TypeAst::Atom: return types::di_atom(t->atom);
    case TypeAst::Exists: {
      std::vector<DI> cs;
      for (const auto& c : t->comps) cs.push_back(to_di(c));
      return types::di_exists(t->ivars, std::move(cs));
    }
    case TypeAst::Conj:
    case TypeAst::Tuple: {
      std::vector<DI> cs;
      for (const auto& c : t->comps) cs.push_back(to_di(c));
      return types::di_exists({}, std::move(cs));
    }
    case TypeAst::Not: {
      std::vector<DI> ins;
      for (const auto& c : t->comps) ins.push_back(to_di(c));
      return types::di_not(std::move(ins));
    }
    case TypeAst::Proc: {
      std::vector<DI> ins, outs;
      for (const auto& c : t->ins) ins.push_back(to_di(c));
      for (const auto& c : t->outs) outs.push_back(to_di(c));
      return types::di_proc(t->ivars, std::move(ins), std::move(outs));
    }
    default: family_err("dependent imperative", t);
  }
}

bool is_simple_ast(const TP& t) {
  switch (t->k) {
    case TypeAst::Nat:
    case TypeAst::Unit:
      return true;
    case TypeAst::Arrow:
      return true;
    case TypeAst::Tuple:
    case TypeAst::Conj: {
      for (const auto& c : t->comps)
        if (!is_simple_ast(c)) return false;
      return true;
    }
    default:
      return false;
  }
}

// ----------------------------------------------------------------- F terms

flang::FP f_term(Lexer& lx);

flang::Pattern f_pattern(Lexer& lx) {
  if (lx.tok.k == Token::Ident) return flang::Pattern::name(lx.expect_ident());
  lx.expect_sym("(");
  if (lx.is_sym(")")) {
    lx.advance();
    return flang::Pattern::unit();
  }
  std::vector<std::string> names{lx.expect_ident()};
  while (lx.is_sym(",")) {
    lx.advance();
    names.push_back(lx.expect_ident());
  }
  lx.expect_sym(")");
  if (names.size() == 1) return flang::Pattern::name(names[0]);
  return flang::Pattern::tuple(std::move(names));
}

flang::FP f_atom(Lexer& lx) {
  using namespace flang;
  if (lx.tok.k == Token::Number) {
    Nat n = lx.tok.num;
    lx.advance();
    return f_num(n);
  }
  if (lx.is_kw("S")) {
    lx.advance();
    lx.expect_sym("(");
    FP t = f_term(lx);
    lx.expect_sym(")");
    return f_succ(std::move(t));
  }
  if (lx.is_kw("pred")) {
    lx.advance();
    lx.expect_sym("(");
    FP t = f_term(lx);
    lx.expect_sym(")");
    return f_pred(std::move(t));
  }
  if (lx.is_kw("succ")) { lx.advance(); return f_succ_const(); }
  if (lx.is_kw("callcc")) { lx.advance(); return f_callcc(); }
  if (lx.is_kw("throw")) { lx.advance(); return f_throw(); }
  if (lx.is_kw("rec")) {
    lx.advance();
    std::optional<std::string> mv;
    DF motive;
    if (lx.is_sym("[")) {
      lx.advance();
      mv = lx.expect_ident();
      lx.expect_sym(".");
      motive = to_df(type_expr(lx));
      lx.expect_sym("]");
    }
    lx.expect_sym("(");
    FP a = f_term(lx);
    lx.expect_sym(",");
    FP b = f_term(lx);
    lx.expect_sym(",");
    FP c = f_term(lx);
    lx.expect_sym(")");
    return f_rec(std::move(a), std::move(b), std::move(c), mv, motive);
  }
  if (lx.is_kw("pack")) {
    lx.advance();
    FP body = f_atom(lx);
    lx.expect_kw("as");
    DF ty = to_df(type_expr(lx));
    lx.expect_kw("with");
    lx.expect_sym("(");
    std::vector<FoPtr> ws;
    if (!lx.is_sym(")")) {
      ws.push_back(fo_term(lx));
      while (lx.is_sym(",")) {
        lx.advance();
        ws.push_back(fo_term(lx));
      }
    }
    lx.expect_sym(")");
    return f_pack(std::move(body), std::move(ty), std::move(ws));
  }
  if (lx.is_kw("subst")) {
    lx.advance();
    lx.expect_sym("(");
    FP subj = f_term(lx);
    FP ev;
    lx.expect_sym(",");
    if (!lx.is_sym("[")) {
      ev = f_term(lx);
      lx.expect_sym(",");
    }
    lx.expect_sym("[");
    std::optional<std::string> hole;
    auto m = lx.mark();
    if (lx.tok.k == Token::Ident) {
      std::string id = lx.expect_ident();
      if (lx.is_sym(".")) {
        lx.advance();
        hole = id;
      } else {
        lx.reset(m);
      }
    }
    DF ty = to_df(type_expr(lx));
    lx.expect_sym("]");
    std::optional<std::string> label;
    if (lx.is_kw("via")) {
      lx.advance();
      lx.expect_sym("(");
      label = lx.tok.text;
      lx.advance();
      lx.expect_sym(")");
    }
    lx.expect_sym(")");
    return f_subst_node(std::move(subj), std::move(ev), hole, std::move(ty), label);
  }
  if (lx.tok.k == Token::Ident) return f_var(lx.expect_ident());
  if (lx.is_sym("(")) {
    lx.advance();
    if (lx.is_sym(")")) {
      lx.advance();
      return f_unit();
    }
    FP first = f_term(lx);
    if (lx.is_sym(":")) {
      lx.advance();
      TP ty = type_expr(lx);
      lx.expect_sym(")");
      if (is_simple_ast(ty)) {
        auto node = f_ascribe(first, nullptr);
        const_cast<FTerm&>(*node).anno_simple = to_sf(ty);
        return node;
      }
      return f_ascribe(first, to_df(ty));
    }
    if (lx.is_sym(",")) {
      std::vector<FP> comps{first};
      while (lx.is_sym(",")) {
        lx.advance();
        comps.push_back(f_term(lx));
      }
      lx.expect_sym(")");
      return f_tuple(std::move(comps));
    }
    lx.expect_sym(")");
    return first;
  }
  lx.err("expected a term");
}

bool starts_atom(const Lexer& lx) {
  if (lx.tok.k == Token::Number) return true;
  if (lx.is_sym("(")) return true;
  if (lx.tok.k != Token::Ident) return false;
  const std::string& s = lx.tok.text;
  return s != "in" && s != "fn" && s != "let" && s != "as" && s != "with" &&
         s != "via";
}

flang::FP f_app_chain(Lexer& lx) {
  using namespace flang;
  FP t = f_atom(lx);
  for (;;) {
    if (lx.is_sym("{")) {
      lx.advance();
      std::vector<FoPtr> args;
      args.push_back(fo_term(lx));
      while (lx.is_sym(",")) {
        lx.advance();
        args.push_back(fo_term(lx));
      }
      lx.expect_sym("}");
      t = f_inst(std::move(t), std::move(args));
      continue;
    }
    if (starts_atom(lx)) {
      t = f_app(std::move(t), f_atom(lx));
      continue;
    }
    return t;
  }
}

flang::FP f_term(Lexer& lx) {
  using namespace flang;
  if (lx.is_kw("fn")) {
    lx.advance();
    Pattern p = f_pattern(lx);
    DF param;
    SF param_simple;
    if (lx.is_sym(":")) {
      lx.advance();
      TP ty = type_expr(lx);
      if (is_simple_ast(ty))
        param_simple = to_sf(ty);
      else
        param = to_df(ty);
    }
    lx.expect_sym("=>");
    FP body = f_term(lx);
    auto node = f_lam(std::move(p), std::move(body), param);
    if (param_simple) const_cast<FTerm&>(*node).param_simple = param_simple;
    return node;
  }
  if (lx.is_kw("let")) {
    lx.advance();
    Pattern p = f_pattern(lx);
    lx.expect_sym("=");
    FP bound = f_term(lx);
    lx.expect_kw("in");
    FP body = f_term(lx);
    return f_let(std::move(p), std::move(bound), std::move(body));
  }
  return f_app_chain(lx);
}

// ----------------------------------------------------------------- I terms

ilang::SP i_seq(Lexer& lx, bool toplevel);

ilang::EP i_expr(Lexer& lx);

ilang::EP i_proclit(Lexer& lx) {
  using namespace ilang;
  lx.expect_kw("proc");
  std::vector<std::string> ivars;
  if (lx.is_kw("forall")) {
    lx.advance();
    ivars.push_back(lx.expect_ident());
    while (lx.is_sym(",")) {
      lx.advance();
      ivars.push_back(lx.expect_ident());
    }
  }
  lx.expect_sym("(");
  lx.expect_kw("in");
  std::vector<std::string> ins, outs;
  std::vector<DI> in_types, out_types;
  bool any_in_ty = false, any_out_ty = false;
  if (!lx.is_sym(";")) {
    for (;;) {
      ins.push_back(lx.expect_ident());
      if (lx.is_sym(":")) {
        lx.advance();
        in_types.resize(ins.size() - 1);
        in_types.push_back(to_di(type_expr(lx)));
        any_in_ty = true;
      } else if (any_in_ty) {
        in_types.push_back(nullptr);
      }
      if (!lx.is_sym(",")) break;
      lx.advance();
    }
  }
  lx.expect_sym(";");
  lx.expect_kw("out");
  for (;;) {
    outs.push_back(lx.expect_ident());
    if (lx.is_sym(":")) {
      lx.advance();
      out_types.resize(outs.size() - 1);
      out_types.push_back(to_di(type_expr(lx)));
      any_out_ty = true;
    } else if (any_out_ty) {
      out_types.push_back(nullptr);
    }
    if (!lx.is_sym(",")) break;
    lx.advance();
  }
  lx.expect_sym(")");
  std::vector<std::string> globals;
  if (lx.is_sym("[")) {
    lx.advance();
    globals.push_back(lx.expect_ident());
    while (lx.is_sym(",")) {
      lx.advance();
      globals.push_back(lx.expect_ident());
    }
    lx.expect_sym("]");
  }
  lx.expect_sym("{");
  SP body = i_seq(lx, false);
  lx.expect_sym("}");
  if (any_in_ty) in_types.resize(ins.size());
  if (any_out_ty) out_types.resize(outs.size());
  return e_proc(std::move(ivars), std::move(ins), std::move(outs), std::move(body),
                std::move(in_types), std::move(out_types), std::move(globals));
}

ilang::EP i_expr(Lexer& lx) {
  using namespace ilang;
  if (lx.is_sym("*")) {
    lx.advance();
    return e_star();
  }
  if (lx.tok.k == Token::Number) {
    Nat n = lx.tok.num;
    lx.advance();
    return e_num(n);
  }
  if (lx.is_kw("proc")) return i_proclit(lx);
  if (lx.is_kw("callcc")) { lx.advance(); return e_callcc(); }
  if (lx.is_kw("throw")) { lx.advance(); return e_throw(); }
  if (lx.tok.k == Token::Ident) return e_var(lx.expect_ident());
  if (lx.is_sym("(")) {
    lx.advance();
    std::vector<EP> comps{i_expr(lx)};
    while (lx.is_sym(",")) {
      lx.advance();
      comps.push_back(i_expr(lx));
    }
    lx.expect_sym(")");
    return e_tuple(std::move(comps));
  }
  lx.err("expected an expression");
}

std::vector<std::string> i_annot(Lexer& lx) {
  std::vector<std::string> out;
  if (!lx.is_sym("[")) return out;
  lx.advance();
  if (!lx.is_sym("]")) {
    out.push_back(lx.expect_ident());
    while (lx.is_sym(",")) {
      lx.advance();
      out.push_back(lx.expect_ident());
    }
  }
  lx.expect_sym("]");
  return out;
}

// a call command, after the callee expression has been parsed
ilang::CP i_call_tail(Lexer& lx, ilang::EP callee) {
  using namespace ilang;
  std::vector<std::pair<std::string, DI>> inst;
  if (lx.is_sym("{")) {
    lx.advance();
    for (;;) {
      std::string a = lx.expect_ident();
      lx.expect_sym(":=");
      inst.emplace_back(a, to_di(type_expr(lx)));
      if (!lx.is_sym(",")) break;
      lx.advance();
    }
    lx.expect_sym("}");
  }
  lx.expect_sym("(");
  std::vector<EP> args;
  if (!lx.is_sym(";")) {
    args.push_back(i_expr(lx));
    while (lx.is_sym(",")) {
      lx.advance();
      args.push_back(i_expr(lx));
    }
  }
  lx.expect_sym(";");
  std::vector<std::string> outs{lx.expect_ident()};
  while (lx.is_sym(",")) {
    lx.advance();
    outs.push_back(lx.expect_ident());
  }
  lx.expect_sym(")");
  std::vector<std::string> globals = i_annot(lx);
  lx.expect_sym(";");
  return c_call(std::move(callee), std::move(args), std::move(outs),
                std::move(globals), std::move(inst));
}

ilang::SP i_seq(Lexer& lx, bool toplevel) {
  using namespace ilang;
  if (lx.tok.k == Token::End || lx.is_sym("}")) return s_empty();

  // declarations
  if (lx.is_kw("cst")) {
    lx.advance();
    std::string name = lx.expect_ident();
    std::vector<std::string> atoms;
    DI decl;
    if (lx.is_sym(":")) {
      lx.advance();
      if (lx.is_kw("forall")) {
        // scheme binding: cst p : forall a b. T = ...
        auto m = lx.mark();
        lx.advance();
        std::vector<std::string> ids{lx.expect_ident()};
        while (lx.tok.k == Token::Ident) ids.push_back(lx.expect_ident());
        if (lx.is_sym(".")) {
          lx.advance();
          atoms = ids;
          decl = to_di(type_expr(lx));
        } else {
          lx.reset(m);
          decl = to_di(type_expr(lx));
        }
      } else {
        decl = to_di(type_expr(lx));
      }
    }
    lx.expect_sym("=");
    EP init = i_expr(lx);
    lx.expect_sym(";");
    return s_cst(name, std::move(init), i_seq(lx, toplevel), std::move(atoms), decl);
  }
  if (lx.is_kw("var")) {
    lx.advance();
    std::vector<std::pair<std::string, EP>> decls;
    for (;;) {
      std::string name = lx.expect_ident();
      EP init = e_star();
      if (lx.is_sym(":=")) {
        lx.advance();
        init = i_expr(lx);
      }
      decls.emplace_back(name, std::move(init));
      if (!lx.is_sym(",")) break;
      lx.advance();
    }
    lx.expect_sym(";");
    SP rest = i_seq(lx, toplevel);
    for (std::size_t i = decls.size(); i-- > 0;)
      rest = s_var(decls[i].first, decls[i].second, rest);
    return rest;
  }
  if (lx.is_kw("proc")) {
    // named procedure declaration: proc q (...) [g] { ... }
    auto m = lx.mark();
    lx.advance();
    if (lx.tok.k == Token::Ident && lx.tok.text != "forall") {
      std::string name = lx.expect_ident();
      lx.reset(m);
      // reparse as a literal with the name dropped in
      lx.advance();          // proc
      lx.advance();          // name
      Lexer* plx = &lx;      // continue from the signature
      // build by delegating to i_proclit-like parsing: emulate by
      // reconstructing a fresh literal parser on the remaining text
      // (simplest: parse signature inline)
      // -- reuse i_proclit by faking the 'proc' keyword is not possible,
      //    so inline the call:
      (void)plx;
      // signature
      std::vector<std::string> ivars;
      if (lx.is_kw("forall")) {
        lx.advance();
        ivars.push_back(lx.expect_ident());
        while (lx.is_sym(",")) {
          lx.advance();
          ivars.push_back(lx.expect_ident());
        }
      }
      lx.expect_sym("(");
      lx.expect_kw("in");
      std::vector<std::string> ins, outs;
      std::vector<DI> in_types, out_types;
      bool any_in_ty = false, any_out_ty = false;
      if (!lx.is_sym(";")) {
        for (;;) {
          ins.push_back(lx.expect_ident());
          if (lx.is_sym(":")) {
            lx.advance();
            in_types.resize(ins.size() - 1);
            in_types.push_back(to_di(type_expr(lx)));
            any_in_ty = true;
          } else if (any_in_ty) {
            in_types.push_back(nullptr);
          }
          if (!lx.is_sym(",")) break;
          lx.advance();
        }
      }
      lx.expect_sym(";");
      lx.expect_kw("out");
      for (;;) {
        outs.push_back(lx.expect_ident());
        if (lx.is_sym(":")) {
          lx.advance();
          out_types.resize(outs.size() - 1);
          out_types.push_back(to_di(type_expr(lx)));
          any_out_ty = true;
        } else if (any_out_ty) {
          out_types.push_back(nullptr);
        }
        if (!lx.is_sym(",")) break;
        lx.advance();
      }
      lx.expect_sym(")");
      std::vector<std::string> globals = i_annot(lx);
      lx.expect_sym("{");
      SP body = i_seq(lx, false);
      lx.expect_sym("}");
      if (lx.is_sym(";")) lx.advance();
      if (any_in_ty) in_types.resize(ins.size());
      if (any_out_ty) out_types.resize(outs.size());
      EP lit = e_proc(std::move(ivars), ins, outs, std::move(body),
                      std::move(in_types), std::move(out_types), std::move(globals));
      return s_cst(name, std::move(lit), i_seq(lx, toplevel));
    }
    lx.reset(m);
    // a literal used as a callee
    EP callee = i_proclit(lx);
    return s_cmd(i_call_tail(lx, std::move(callee)), i_seq(lx, toplevel));
  }

  // commands
  if (lx.is_sym("{")) {
    lx.advance();
    SP body = i_seq(lx, false);
    lx.expect_sym("}");
    std::vector<std::string> annot = i_annot(lx);
    lx.expect_sym(";");
    return s_cmd(c_block(std::move(body), std::move(annot)), i_seq(lx, toplevel));
  }
  if (lx.is_kw("for")) {
    lx.advance();
    std::string var = lx.expect_ident();
    lx.expect_sym(":=");
    if (lx.tok.k != Token::Number || lx.tok.num != 0) lx.err("for loops start at 0");
    lx.advance();
    lx.expect_kw("until");
    EP bound = i_expr(lx);
    std::optional<std::string> iv;
    std::vector<std::pair<std::string, DI>> inv;
    if (lx.is_kw("invariant")) {
      lx.advance();
      lx.expect_sym("[");
      iv = lx.expect_ident();
      lx.expect_sym("|");
      for (;;) {
        std::string x = lx.expect_ident();
        lx.expect_sym(":");
        inv.emplace_back(x, to_di(type_expr(lx)));
        if (!lx.is_sym(",")) break;
        lx.advance();
      }
      lx.expect_sym("]");
    }
    lx.expect_sym("{");
    SP body = i_seq(lx, false);
    lx.expect_sym("}");
    std::vector<std::string> annot = i_annot(lx);
    lx.expect_sym(";");
    return s_cmd(c_for(var, std::move(bound), std::move(body), std::move(annot), iv,
                       std::move(inv)),
                 i_seq(lx, toplevel));
  }
  if (lx.is_kw("inc") || lx.is_kw("dec")) {
    bool inc = lx.is_kw("inc");
    lx.advance();
    lx.expect_sym("(");
    std::string v = lx.expect_ident();
    lx.expect_sym(")");
    lx.expect_sym(";");
    return s_cmd(inc ? c_inc(v) : c_dec(v), i_seq(lx, toplevel));
  }
  if (lx.is_kw("subst")) {
    lx.advance();
    std::optional<std::string> hole;
    std::vector<std::pair<std::string, DI>> items;
    if (lx.is_sym("[")) {
      lx.advance();
      hole = lx.expect_ident();
      lx.expect_sym("|");
      for (;;) {
        std::string x = lx.expect_ident();
        lx.expect_sym(":");
        items.emplace_back(x, to_di(type_expr(lx)));
        if (!lx.is_sym(",")) break;
        lx.advance();
      }
      lx.expect_sym("]");
    } else {
      for (;;) {
        std::string x = lx.expect_ident();
        lx.expect_sym(":");
        items.emplace_back(x, to_di(type_expr(lx)));
        if (!lx.is_sym(",")) break;
        lx.advance();
      }
    }
    std::optional<std::string> label;
    ilang::EP ev;
    if (lx.is_kw("via")) {
      lx.advance();
      if (lx.is_sym("(")) {
        lx.advance();
        label = lx.tok.text;
        lx.advance();
        lx.expect_sym(")");
      } else {
        ev = i_expr(lx);
      }
    }
    lx.expect_sym(";");
    return s_cmd(c_subst_hint(hole, std::move(items), label, std::move(ev)),
                 i_seq(lx, toplevel));
  }
  if (lx.is_kw("jump")) {
    lx.advance();
    lx.expect_sym("(");
    EP target = i_expr(lx);
    std::vector<EP> args;
    while (lx.is_sym(",")) {
      lx.advance();
      args.push_back(i_expr(lx));
    }
    lx.expect_sym(")");
    std::vector<std::string> outs = i_annot(lx);
    lx.expect_sym(";");
    return s_cmd(c_jump(std::move(target), std::move(args), std::move(outs)),
                 i_seq(lx, toplevel));
  }
  if (lx.is_kw("callcc") || lx.is_kw("throw")) {
    EP callee = lx.is_kw("callcc") ? e_callcc() : e_throw();
    lx.advance();
    return s_cmd(i_call_tail(lx, std::move(callee)), i_seq(lx, toplevel));
  }

  if (lx.tok.k == Token::Ident) {
    std::string first = lx.expect_ident();
    // label:  k : { ... }  or  k : [types] : { ... }
    if (lx.is_sym(":")) {
      lx.advance();
      std::vector<std::string> livars;
      std::vector<DI> ltys;
      if (lx.is_sym("[")) {
        lx.advance();
        if (lx.is_kw("forall")) {
          lx.advance();
          livars.push_back(lx.expect_ident());
          while (lx.is_sym(",")) {
            lx.advance();
            livars.push_back(lx.expect_ident());
          }
          lx.expect_sym(".");
        }
        ltys.push_back(to_di(type_expr(lx)));
        while (lx.is_sym(",")) {
          lx.advance();
          ltys.push_back(to_di(type_expr(lx)));
        }
        lx.expect_sym("]");
        lx.expect_sym(":");
      }
      lx.expect_sym("{");
      SP body = i_seq(lx, false);
      lx.expect_sym("}");
      std::vector<std::string> annot = i_annot(lx);
      lx.expect_sym(";");
      return s_cmd(c_label(first, std::move(body), std::move(annot),
                           std::move(livars), std::move(ltys)),
                   i_seq(lx, toplevel));
    }
    // assignment: x, y := e
    if (lx.is_sym(",") || lx.is_sym(":=")) {
      std::vector<std::string> targets{first};
      while (lx.is_sym(",")) {
        lx.advance();
        targets.push_back(lx.expect_ident());
      }
      lx.expect_sym(":=");
      EP src = i_expr(lx);
      lx.expect_sym(";");
      return s_cmd(c_assign(std::move(targets), std::move(src)), i_seq(lx, toplevel));
    }
    // call: p(args; outs) or p{inst}(args; outs)
    if (lx.is_sym("(") || lx.is_sym("{")) {
      return s_cmd(i_call_tail(lx, e_var(first)), i_seq(lx, toplevel));
    }
    lx.err("expected ':=', ':', or a call after '" + first + "'");
  }
  lx.err("expected a command or declaration");
}

}  // namespace

// ---------------------------------------------------------------- entries

arith::EqSystem parse_theory(const std::string& text) {
  Lexer lx(text);
  arith::EqSystem sys = arith::peano_base();
  while (lx.tok.k != Token::End) {
    if (lx.is_kw("fun")) {
      lx.advance();
      std::string name = lx.expect_ident();
      if (lx.tok.k != Token::Number) lx.err("expected an arity");
      sys.signature[name] = static_cast<std::size_t>(lx.tok.num);
      lx.advance();
      lx.expect_sym(";");
      continue;
    }
    if (lx.is_kw("eq")) {
      lx.advance();
      lx.expect_sym("(");
      std::string label = lx.tok.text;
      lx.advance();
      lx.expect_sym(")");
      lx.expect_sym(":");
      FoPtr lhs = fo_term(lx);
      lx.expect_sym("=");
      FoPtr rhs = fo_term(lx);
      lx.expect_sym(";");
      // builtin equations may be restated verbatim
      if (const arith::Equation* e = sys.find(label)) {
        if (!arith::fo_equal(e->lhs, lhs) || !arith::fo_equal(e->rhs, rhs))
          lx.err("equation (" + label + ") conflicts with an existing one");
        continue;
      }
      sys.equations.push_back({label, std::move(lhs), std::move(rhs), false});
      continue;
    }
    lx.err("expected 'fun' or 'eq'");
  }
  return sys;
}

FUnit parse_funit(const std::string& text) {
  Lexer lx(text);
  FUnit u;
  u.term = f_term(lx);
  if (lx.is_sym(":")) {
    lx.advance();
    TP ty = type_expr(lx);
    if (is_simple_ast(ty))
      u.simple_type = to_sf(ty);
    else
      u.dep_type = to_df(ty);
  }
  if (lx.tok.k != Token::End) lx.err("trailing input after the term");
  return u;
}

flang::FP parse_fterm(const std::string& text) { return parse_funit(text).term; }

ilang::SP parse_iprog(const std::string& text) {
  Lexer lx(text);
  ilang::SP s = i_seq(lx, true);
  if (lx.tok.k != Token::End) lx.err("trailing input after the program");
  return s;
}

types::DF parse_df(const std::string& text) {
  Lexer lx(text);
  return to_df(type_expr(lx));
}

types::DI parse_di(const std::string& text) {
  Lexer lx(text);
  return to_di(type_expr(lx));
}

types::SF parse_sf(const std::string& text) {
  Lexer lx(text);
  return to_sf(type_expr(lx));
}

types::SI parse_si(const std::string& text) {
  Lexer lx(text);
  return to_si(type_expr(lx));
}

arith::FoPtr parse_foterm(const std::string& text) {
  Lexer lx(text);
  return fo_term(lx);
}

}  // namespace loopf::parser
