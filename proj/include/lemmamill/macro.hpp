#pragma once

// The fixed function core, and expansion of surface macros down to it.
// Core functions: if, equal, binary-+, binary-*, unary--, <, not, implies,
// cons, car, cdr, and the recognizers zp, natp, integerp, acl2-numberp,
// consp, symbolp, endp. Recognizers stay first-class (never expanded); the
// surface macros +, -, *, 1+, and, or, <= rewrite away.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lemmamill/errors.hpp"
#include "lemmamill/symbol.hpp"
#include "lemmamill/term.hpp"

namespace lemmamill {

// Arity of each core function; nullopt for non-core names.
inline std::optional<std::size_t> coreArity(const Symbol& s) {
  static const std::map<std::string, std::size_t> table = {
      {"IF", 3},       {"EQUAL", 2},        {"BINARY-+", 2},
      {"BINARY-*", 2}, {"UNARY--", 1},      {"<", 2},
      {"NOT", 1},      {"IMPLIES", 2},      {"ZP", 1},
      {"NATP", 1},     {"INTEGERP", 1},     {"ACL2-NUMBERP", 1},
      {"CONSP", 1},    {"SYMBOLP", 1},      {"CAR", 1},
      {"CDR", 1},      {"CONS", 2},         {"ENDP", 1},
  };
  auto it = table.find(s.text);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline bool isCoreFunction(const Symbol& s) { return coreArity(s).has_value(); }

// Boolean-valued core heads (used to keep synthesized argument terms
// value-like rather than propositional).
inline bool isPredicateHead(const Symbol& s) {
  static const std::map<std::string, int> preds = {
      {"EQUAL", 0}, {"<", 0},        {"NOT", 0},      {"IMPLIES", 0},
      {"ZP", 0},    {"NATP", 0},     {"INTEGERP", 0}, {"ACL2-NUMBERP", 0},
      {"CONSP", 0}, {"SYMBOLP", 0},  {"ENDP", 0},
  };
  return preds.count(s.text) > 0;
}

inline bool isMacroHead(const Symbol& s) {
  static const std::map<std::string, int> macros = {
      {"+", 0}, {"-", 0}, {"*", 0}, {"1+", 0}, {"AND", 0}, {"OR", 0}, {"<=", 0},
  };
  return macros.count(s.text) > 0;
}

namespace detail {

inline Term foldPlus(std::vector<Term> args) {
  if (args.empty()) return Term::integer(0);
  if (args.size() == 1)
    return Term::app(symBinaryPlus(), {std::move(args[0]), Term::integer(0)});
  if (args.size() == 2)
    return Term::app(symBinaryPlus(), {std::move(args[0]), std::move(args[1])});
  Term rest = foldPlus(std::vector<Term>(args.begin() + 1, args.end()));
  return Term::app(symBinaryPlus(), {std::move(args[0]), std::move(rest)});
}

inline Term foldStar(std::vector<Term> args) {
  if (args.empty()) return Term::integer(1);
  if (args.size() == 1)
    return Term::app(symBinaryStar(), {std::move(args[0]), Term::integer(1)});
  if (args.size() == 2)
    return Term::app(symBinaryStar(), {std::move(args[0]), std::move(args[1])});
  Term rest = foldStar(std::vector<Term>(args.begin() + 1, args.end()));
  return Term::app(symBinaryStar(), {std::move(args[0]), std::move(rest)});
}

// (- a b) folds a literal subtrahend into a negative constant, so (- n 1)
// becomes (binary-+ n -1).
inline Term minusTerm(Term a, Term b) {
  if (b.kind == TermKind::Num)
    return Term::app(symBinaryPlus(), {std::move(a), Term::integer(-b.num)});
  return Term::app(symBinaryPlus(),
                   {std::move(a), Term::app(symUnaryMinus(), {std::move(b)})});
}

inline Term foldAnd(const std::vector<Term>& args, std::size_t from) {
  if (from == args.size()) return Term::truth();
  if (from + 1 == args.size()) return args[from];
  return Term::app(Symbol("if"), {args[from], foldAnd(args, from + 1), Term::nil()});
}

inline Term foldOr(const std::vector<Term>& args, std::size_t from) {
  if (from == args.size()) return Term::nil();
  if (from + 1 == args.size()) return args[from];
  return Term::app(Symbol("if"), {args[from], args[from], foldOr(args, from + 1)});
}

}  // namespace detail

// Rewrites every macro application in the term to core form, innermost
// first. Idempotent: terms already in core form pass through unchanged.
// Unknown heads are left untouched (the corpus loader flags them later).
inline Term expandMacros(const Term& t) {
  if (t.kind != TermKind::App) return t;
  std::vector<Term> args;
  args.reserve(t.args.size());
  for (const Term& a : t.args) args.push_back(expandMacros(a));

  const std::string& h = t.sym.text;
  if (h == "+") return detail::foldPlus(std::move(args));
  if (h == "*") return detail::foldStar(std::move(args));
  if (h == "-") {
    if (args.empty())
      throw SyntaxError("- needs at least one argument");
    if (args.size() == 1)
      return Term::app(detail::symUnaryMinus(), {std::move(args[0])});
    if (args.size() == 2)
      return detail::minusTerm(std::move(args[0]), std::move(args[1]));
    Term rest = detail::foldPlus(std::vector<Term>(args.begin() + 1, args.end()));
    return Term::app(detail::symBinaryPlus(),
                     {std::move(args[0]),
                      Term::app(detail::symUnaryMinus(), {std::move(rest)})});
  }
  if (h == "1+") {
    if (args.size() != 1) throw SyntaxError("1+ takes exactly one argument");
    return Term::app(detail::symBinaryPlus(), {std::move(args[0]), Term::integer(1)});
  }
  if (h == "AND") return detail::foldAnd(args, 0);
  if (h == "OR") return detail::foldOr(args, 0);
  if (h == "<=") {
    if (args.size() != 2) throw SyntaxError("<= takes exactly two arguments");
    return Term::app(Symbol("not"),
                     {Term::app(Symbol("<"), {std::move(args[1]), std::move(args[0])})});
  }
  Term out = Term::app(t.sym, std::move(args));
  return out;
}

}  // namespace lemmamill
