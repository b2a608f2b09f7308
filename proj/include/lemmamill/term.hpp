#pragma once

// First-order terms over the fixed core language: variables, integer
// constants, the constants nil and t, and function applications. Terms are
// plain values; all algorithms below are pure.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lemmamill/symbol.hpp"

namespace lemmamill {

enum class TermKind { Var, Num, Nil, True, App };

struct Term {
  TermKind kind = TermKind::Nil;
  Symbol sym;               // Var name or App head
  std::int64_t num = 0;     // Num payload
  std::vector<Term> args;   // App arguments

  static Term var(Symbol s) {
    Term t;
    t.kind = TermKind::Var;
    t.sym = std::move(s);
    return t;
  }
  static Term integer(std::int64_t n) {
    Term t;
    t.kind = TermKind::Num;
    t.num = n;
    return t;
  }
  static Term nil() { return Term{}; }
  static Term truth() {
    Term t;
    t.kind = TermKind::True;
    return t;
  }
  static Term app(Symbol head, std::vector<Term> as = {}) {
    Term t;
    t.kind = TermKind::App;
    t.sym = std::move(head);
    t.args = std::move(as);
    return t;
  }

  bool isApp(const Symbol& head) const {
    return kind == TermKind::App && sym == head;
  }
  bool operator==(const Term& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case TermKind::Var: return sym == o.sym;
      case TermKind::Num: return num == o.num;
      case TermKind::Nil:
      case TermKind::True: return true;
      case TermKind::App: return sym == o.sym && args == o.args;
    }
    return false;
  }
};

// Total order on terms, used wherever a deterministic tie-break is needed.
inline int compareTerms(const Term& a, const Term& b) {
  if (a.kind != b.kind) return int(a.kind) < int(b.kind) ? -1 : 1;
  switch (a.kind) {
    case TermKind::Nil:
    case TermKind::True: return 0;
    case TermKind::Num: return a.num < b.num ? -1 : a.num > b.num ? 1 : 0;
    case TermKind::Var:
      return a.sym < b.sym ? -1 : b.sym < a.sym ? 1 : 0;
    case TermKind::App: {
      if (a.sym != b.sym) return a.sym < b.sym ? -1 : 1;
      if (a.args.size() != b.args.size())
        return a.args.size() < b.args.size() ? -1 : 1;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (int c = compareTerms(a.args[i], b.args[i])) return c;
      return 0;
    }
  }
  return 0;
}

inline bool termLess(const Term& a, const Term& b) { return compareTerms(a, b) < 0; }

// Depth in levels: a leaf is 1, an application is 1 + deepest argument.
inline int termDepth(const Term& t) {
  if (t.kind != TermKind::App) return 1;
  int best = 0;
  for (const Term& a : t.args) best = std::max(best, termDepth(a));
  return 1 + best;
}

inline std::size_t nodeCount(const Term& t) {
  std::size_t n = 1;
  for (const Term& a : t.args) n += nodeCount(a);
  return n;
}

// Pre-order visitor; fn receives each subterm and its depth (root 0).
inline void forEachSubterm(const Term& t,
                           const std::function<void(const Term&, int)>& fn,
                           int depth = 0) {
  fn(t, depth);
  for (const Term& a : t.args) forEachSubterm(a, fn, depth + 1);
}

// Variables in order of first occurrence (pre-order, left to right).
inline void collectVars(const Term& t, std::vector<Symbol>& out) {
  if (t.kind == TermKind::Var) {
    if (std::find(out.begin(), out.end(), t.sym) == out.end()) out.push_back(t.sym);
    return;
  }
  for (const Term& a : t.args) collectVars(a, out);
}

inline std::vector<Symbol> varsInOrder(const Term& t) {
  std::vector<Symbol> out;
  collectVars(t, out);
  return out;
}

inline std::set<Symbol> freeVars(const Term& t) {
  std::vector<Symbol> v = varsInOrder(t);
  return std::set<Symbol>(v.begin(), v.end());
}

inline bool mentionsVar(const Term& t, const Symbol& v) {
  if (t.kind == TermKind::Var) return t.sym == v;
  for (const Term& a : t.args)
    if (mentionsVar(a, v)) return true;
  return false;
}

// Simultaneous substitution of variables; unmapped variables stay put.
inline Term substitute(const Term& t, const std::map<Symbol, Term>& env) {
  if (t.kind == TermKind::Var) {
    auto it = env.find(t.sym);
    return it == env.end() ? t : it->second;
  }
  if (t.kind != TermKind::App) return t;
  Term out = Term::app(t.sym);
  out.args.reserve(t.args.size());
  for (const Term& a : t.args) out.args.push_back(substitute(a, env));
  return out;
}

// Canonical renaming: variables become reserved names in order of first
// occurrence, so two terms are alpha-equivalent iff their canonical forms
// are structurally equal. The reserved names start with a control character
// no source text can lex, so capture is impossible.
inline Term alphaCanonical(const Term& t) {
  std::map<Symbol, Term> env;
  std::vector<Symbol> vars = varsInOrder(t);
  for (std::size_t i = 0; i < vars.size(); ++i)
    env[vars[i]] = Term::var(Symbol(std::string("\x01v") + std::to_string(i + 1)));
  return substitute(t, env);
}

inline bool alphaEquivalent(const Term& a, const Term& b) {
  return alphaCanonical(a) == alphaCanonical(b);
}

// Canonical printing: core heads appear literally.
inline std::string printCanonical(const Term& t) {
  switch (t.kind) {
    case TermKind::Var: return t.sym.display();
    case TermKind::Num: return std::to_string(t.num);
    case TermKind::Nil: return "nil";
    case TermKind::True: return "t";
    case TermKind::App: {
      std::string out = "(" + t.sym.display();
      for (const Term& a : t.args) out += " " + printCanonical(a);
      out += ")";
      return out;
    }
  }
  return "";
}

namespace detail {
inline const Symbol& symBinaryPlus() {
  static const Symbol s("binary-+");
  return s;
}
inline const Symbol& symBinaryStar() {
  static const Symbol s("binary-*");
  return s;
}
inline const Symbol& symUnaryMinus() {
  static const Symbol s("unary--");
  return s;
}
}  // namespace detail

// Display printing: the three arithmetic core names are sugared back to
// their surface spellings, and for + and * an integer-constant argument is
// printed first, matching the conventional untranslated form (so the core
// term (binary-+ n -1) displays as (+ -1 n)).
inline std::string displaySurface(const Term& t) {
  if (t.kind != TermKind::App) return printCanonical(t);
  Symbol head = t.sym;
  std::vector<const Term*> as;
  for (const Term& a : t.args) as.push_back(&a);
  if (head == detail::symBinaryPlus() || head == detail::symBinaryStar()) {
    if (as.size() == 2 && as[1]->kind == TermKind::Num &&
        as[0]->kind != TermKind::Num)
      std::swap(as[0], as[1]);
    head = Symbol(head == detail::symBinaryPlus() ? "+" : "*");
  } else if (head == detail::symUnaryMinus()) {
    head = Symbol("-");
  }
  std::string out = "(" + head.display();
  for (const Term* a : as) out += " " + displaySurface(*a);
  out += ")";
  return out;
}

// Commutative canonical form for comparisons: arguments of binary-+ and
// binary-* are put in a fixed order (integer constants first, then the
// deterministic term order). Used by tests that compare conjectures modulo
// the commutativity of printing.
inline Term canonicalizeCommutative(const Term& t) {
  if (t.kind != TermKind::App) return t;
  Term out = Term::app(t.sym);
  out.args.reserve(t.args.size());
  for (const Term& a : t.args) out.args.push_back(canonicalizeCommutative(a));
  if ((t.sym == detail::symBinaryPlus() || t.sym == detail::symBinaryStar()) &&
      out.args.size() == 2) {
    const bool n0 = out.args[0].kind == TermKind::Num;
    const bool n1 = out.args[1].kind == TermKind::Num;
    if ((n1 && !n0) || (n0 == n1 && termLess(out.args[1], out.args[0])))
      std::swap(out.args[0], out.args[1]);
  }
  return out;
}

}  // namespace lemmamill
