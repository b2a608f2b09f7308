#pragma once

// Guard inference and precondition generation.
//
// A guard restricts a function to its intended argument domain. Built-in
// operators carry fixed guards (ordering needs numbers, list accessors need
// a cons or nil, ...). The guard of a user definition is inferred bottom-up:
// for every application (g a1 ... an) in the macro-expanded body, g's guard
// is instantiated with the actual arguments and conjoined; recursive calls
// (direct or mutual) contribute T; the conjunction is simplified and
// memoised. A guard declared on the definition short-circuits inference and
// is returned verbatim.
//
// Preconditions of a conjecture conjoin the instantiated guards of every
// application node in the expanded statement, in traversal order, then
// simplify. A nil result means the collected constraints force some value
// into two disjoint kinds (say, a number that must also be a cons): the
// conjecture is unsatisfiable as stated, and ContradictionInfo names a
// conflicting pair. After contradiction checking, surviving list-or-nil
// clauses (or (consp u) (equal u nil)) are dropped from precondition
// output — they admit nil and carry no proof-relevant content — while
// guards themselves keep them.
//
// Conjunctions are represented structurally with a variadic `and` head
// (`or` for disjunctive clauses); they expand to `if` nests only when a
// guard is evaluated.
//
// The simplifier goes beyond constant folding in two ways, both needed so
// inferred guards match what a careful human would write down. First,
// recognizer applications fold not just on literals but on any term whose
// head provably returns a number: the arithmetic cores always do, and so
// does any definition whose every if-leaf is a number literal, an
// arithmetic application, or a call to another such definition (greatest
// fixpoint over the call graph). Second, contradiction detection models
// each recognizer as a set of value kinds {integer, nil, t, symbol, cons}
// and intersects the sets accumulated per subject term; an empty
// intersection — including via (equal u <literal>) conjuncts, negated
// recognizers, or an `or` clause whose every disjunct is individually
// impossible — collapses the guard to nil.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "errors.hpp"
#include "macro.hpp"
#include "sexpr.hpp"
#include "symbol.hpp"
#include "term.hpp"

namespace lemmamill {

// The pair of constraints found to conflict when a guard simplifies to nil.
struct ContradictionInfo {
  Term first;
  Term second;
};

// Per-corpus guard state: memoised guards plus the lazily computed set of
// definitions that provably return numbers. One writer per analysis run;
// concurrent runs use independent tables.
struct GuardTable {
  std::map<Symbol, Term> memo;
  std::optional<std::set<Symbol>> numericDefs;
};

namespace detail {

inline const Symbol& symAnd() {
  static const Symbol s("and");
  return s;
}
inline const Symbol& symOr() {
  static const Symbol s("or");
  return s;
}
inline const Symbol& symNot() {
  static const Symbol s("not");
  return s;
}
inline const Symbol& symEqual() {
  static const Symbol s("equal");
  return s;
}
inline const Symbol& symLess() {
  static const Symbol s("<");
  return s;
}
inline const Symbol& symIf() {
  static const Symbol s("if");
  return s;
}
inline const Symbol& symNatp() {
  static const Symbol s("natp");
  return s;
}
inline const Symbol& symIntegerp() {
  static const Symbol s("integerp");
  return s;
}
inline const Symbol& symNumberp() {
  static const Symbol s("acl2-numberp");
  return s;
}
inline const Symbol& symConsp() {
  static const Symbol s("consp");
  return s;
}
inline const Symbol& symLessOrEqual() {
  static const Symbol s("<=");
  return s;
}

inline const std::map<Symbol, Term>& builtinGuardTable() {
  static const std::map<Symbol, Term> table = [] {
    std::map<Symbol, Term> t;
    auto put = [&t](const char* name, const char* guard) {
      t.emplace(Symbol(name), parseTermString(guard));
    };
    put("zp", "(and (integerp x) (not (< x 0)))");
    put("binary-+", "(and (acl2-numberp x) (acl2-numberp y))");
    put("binary-*", "(and (acl2-numberp x) (acl2-numberp y))");
    put("unary--", "(acl2-numberp x)");
    put("<", "(and (acl2-numberp x) (acl2-numberp y))");
    put("car", "(or (consp x) (equal x nil))");
    put("cdr", "(or (consp x) (equal x nil))");
    put("endp", "(or (consp x) (equal x nil))");
    return t;
  }();
  return table;
}

inline std::vector<Symbol> builtinFormals(std::size_t arity) {
  static const Symbol names[3] = {Symbol("x"), Symbol("y"), Symbol("z")};
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < arity && i < 3; ++i) out.push_back(names[i]);
  return out;
}

inline void flattenConjuncts(const Term& g, std::vector<Term>& out) {
  if (g.kind == TermKind::App && g.sym == symAnd()) {
    for (const Term& a : g.args) flattenConjuncts(a, out);
    return;
  }
  out.push_back(g);
}

inline Term makeConjunction(std::vector<Term> cs) {
  if (cs.empty()) return Term::truth();
  if (cs.size() == 1) return std::move(cs[0]);
  return Term::app(symAnd(), std::move(cs));
}

// Macro-expand a guard while keeping and/or structure intact.
inline Term expandGuardMacros(const Term& t) {
  if (t.kind == TermKind::App && (t.sym == symAnd() || t.sym == symOr())) {
    Term out = Term::app(t.sym);
    out.args.reserve(t.args.size());
    for (const Term& a : t.args) out.args.push_back(expandGuardMacros(a));
    return out;
  }
  return expandMacros(t);
}

// Definitions whose every if-leaf is a number literal, an arithmetic core
// application, or a call to another function still in the set (greatest
// fixpoint): such a function returns a number whenever it returns at all.
inline std::set<Symbol> computeNumericDefs(const Corpus& corpus) {
  std::set<Symbol> numeric;
  for (const Event& e : corpus.events)
    if (e.kind == EventKind::Definition) numeric.insert(e.name);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Event& e : corpus.events) {
      if (e.kind != EventKind::Definition || numeric.count(e.name) == 0)
        continue;
      bool ok = true;
      std::vector<const Term*> leaves{&e.body};
      while (ok && !leaves.empty()) {
        const Term* t = leaves.back();
        leaves.pop_back();
        if (t->kind == TermKind::App && t->sym == symIf() &&
            t->args.size() == 3) {
          leaves.push_back(&t->args[1]);
          leaves.push_back(&t->args[2]);
          continue;
        }
        if (t->kind == TermKind::Num) continue;
        if (t->kind == TermKind::App &&
            (t->sym == symBinaryPlus() || t->sym == symBinaryStar() ||
             t->sym == symUnaryMinus() || numeric.count(t->sym) != 0))
          continue;
        ok = false;
      }
      if (!ok) {
        numeric.erase(e.name);
        changed = true;
      }
    }
  }
  return numeric;
}

// Value-kind bitmask: the evaluator universe has exactly these five kinds.
enum : unsigned {
  kKindInt = 1u,
  kKindNil = 2u,
  kKindTrue = 4u,
  kKindSym = 8u,
  kKindCons = 16u,
  kKindAll = 31u,
};

inline std::optional<unsigned> recognizerKinds(const Symbol& s) {
  static const std::map<Symbol, unsigned> table = {
      {Symbol("integerp"), kKindInt},
      {Symbol("acl2-numberp"), kKindInt},
      {Symbol("natp"), kKindInt},
      {Symbol("consp"), kKindCons},
      {Symbol("symbolp"), kKindNil | kKindTrue | kKindSym},
      {Symbol("endp"), kKindAll & ~kKindCons},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline std::optional<unsigned> literalKind(const Term& t) {
  switch (t.kind) {
    case TermKind::Num:
      return kKindInt;
    case TermKind::Nil:
      return kKindNil;
    case TermKind::True:
      return kKindTrue;
    default:
      return std::nullopt;
  }
}

inline bool numericHeaded(const Term& t, const std::set<Symbol>& numericDefs) {
  return t.kind == TermKind::App &&
         (t.sym == symBinaryPlus() || t.sym == symBinaryStar() ||
          t.sym == symUnaryMinus() || numericDefs.count(t.sym) != 0);
}

// Kind constraint a truthy conjunct places on a subject term, if any:
// recognizer applications, their negations, and equalities with a literal.
// `exact` marks constraints whose truth is precisely kind membership;
// inexact ones (natp, equality with a number) still bound the kind when
// truthy but say nothing when negated, so only exact constraints invert.
struct TypedConstraint {
  Term subject;
  unsigned kinds;
  bool exact;
};

inline std::optional<TypedConstraint> typedConstraint(const Term& c) {
  if (c.kind != TermKind::App) return std::nullopt;
  if (c.sym == symNot() && c.args.size() == 1) {
    auto inner = typedConstraint(c.args[0]);
    if (!inner || !inner->exact) return std::nullopt;
    return TypedConstraint{inner->subject, kKindAll & ~inner->kinds, true};
  }
  if (c.args.size() == 1) {
    auto k = recognizerKinds(c.sym);
    if (k && !literalKind(c.args[0]))
      return TypedConstraint{c.args[0], *k, c.sym != symNatp()};
    return std::nullopt;
  }
  if (c.sym == symEqual() && c.args.size() == 2) {
    auto ka = literalKind(c.args[0]);
    auto kb = literalKind(c.args[1]);
    if (kb && !ka)
      return TypedConstraint{c.args[0], *kb,
                             c.args[1].kind != TermKind::Num};
    if (ka && !kb)
      return TypedConstraint{c.args[1], *ka,
                             c.args[0].kind != TermKind::Num};
  }
  return std::nullopt;
}

// Constant and kind folding of a single predicate term. Every rewrite here
// preserves truthiness in the evaluator universe.
inline Term foldPredicate(const Term& c, const std::set<Symbol>& numericDefs) {
  if (c.kind != TermKind::App) return c;
  if (c.sym == symNot() && c.args.size() == 1) {
    Term inner = foldPredicate(c.args[0], numericDefs);
    if (inner.kind == TermKind::Nil) return Term::truth();
    if (inner.kind == TermKind::True || inner.kind == TermKind::Num)
      return Term::nil();
    if (numericHeaded(inner, numericDefs)) return Term::nil();
    if (inner.kind == TermKind::App && inner.sym == symNot() &&
        inner.args.size() == 1)
      return inner.args[0];
    return Term::app(symNot(), {std::move(inner)});
  }
  if (c.sym == symLess() && c.args.size() == 2) {
    if (c.args[0].kind == TermKind::Num && c.args[1].kind == TermKind::Num)
      return c.args[0].num < c.args[1].num ? Term::truth() : Term::nil();
    return c;
  }
  if (c.sym == symEqual() && c.args.size() == 2) {
    const Term& a = c.args[0];
    const Term& b = c.args[1];
    auto ka = literalKind(a);
    auto kb = literalKind(b);
    if (ka && kb) return a == b ? Term::truth() : Term::nil();
    if (ka && *ka != kKindInt && numericHeaded(b, numericDefs))
      return Term::nil();
    if (kb && *kb != kKindInt && numericHeaded(a, numericDefs))
      return Term::nil();
    return c;
  }
  if (c.args.size() == 1 && recognizerKinds(c.sym)) {
    const Term& u = c.args[0];
    const unsigned rk = *recognizerKinds(c.sym);
    if (auto lk = literalKind(u)) {
      if (c.sym == symNatp() && u.kind == TermKind::Num)
        return u.num >= 0 ? Term::truth() : Term::nil();
      return (*lk & rk) != 0 ? Term::truth() : Term::nil();
    }
    if (numericHeaded(u, numericDefs)) {
      if (c.sym == symNatp()) return c;  // the sign is not decidable here
      return (rk & kKindInt) != 0 ? Term::truth() : Term::nil();
    }
    return c;
  }
  if (c.sym == symOr()) {
    std::vector<Term> ds;
    for (const Term& d : c.args) {
      Term f = foldPredicate(d, numericDefs);
      if (f.kind == TermKind::True || f.kind == TermKind::Num)
        return Term::truth();
      if (f.kind == TermKind::Nil) continue;
      ds.push_back(std::move(f));
    }
    if (ds.empty()) return Term::nil();
    if (ds.size() == 1) return std::move(ds[0]);
    return Term::app(symOr(), std::move(ds));
  }
  if (c.sym == symAnd()) {
    std::vector<Term> ms;
    for (const Term& d : c.args) {
      Term f = foldPredicate(d, numericDefs);
      if (f.kind == TermKind::True || f.kind == TermKind::Num) continue;
      if (f.kind == TermKind::Nil) return Term::nil();
      ms.push_back(std::move(f));
    }
    return makeConjunction(std::move(ms));
  }
  return c;
}

// Conjunct-level normalization: natp splits into integer + non-negative,
// <= rewrites to its not-< form.
inline void normalizeConjunct(const Term& c, std::vector<Term>& out) {
  if (c.kind == TermKind::App && c.sym == symNatp() && c.args.size() == 1) {
    out.push_back(Term::app(symIntegerp(), {c.args[0]}));
    out.push_back(Term::app(
        symNot(), {Term::app(symLess(), {c.args[0], Term::integer(0)})}));
    return;
  }
  if (c.kind == TermKind::App && c.sym == symLessOrEqual() &&
      c.args.size() == 2) {
    out.push_back(Term::app(
        symNot(), {Term::app(symLess(), {c.args[1], c.args[0]})}));
    return;
  }
  out.push_back(c);
}

inline Term simplifyPass(const Term& g, const std::set<Symbol>& numericDefs,
                         ContradictionInfo* why) {
  std::vector<Term> flat;
  flattenConjuncts(g, flat);
  std::vector<Term> normalized;
  for (const Term& c : flat) normalizeConjunct(c, normalized);

  // Fold; a conjunct folding to nil is already a contradiction.
  std::vector<Term> kept;
  for (const Term& c : normalized) {
    Term f = foldPredicate(c, numericDefs);
    if (f.kind == TermKind::True || f.kind == TermKind::Num) continue;
    if (f.kind == TermKind::Nil) {
      if (why) *why = {c, Term::nil()};
      return Term::nil();
    }
    kept.push_back(std::move(f));
  }

  // Deduplicate, keeping first occurrence.
  std::vector<Term> uniq;
  std::set<std::string> seen;
  for (Term& c : kept)
    if (seen.insert(printCanonical(c)).second) uniq.push_back(std::move(c));

  // Subsumption: a known integer is a fortiori a number.
  std::set<std::string> integerSubjects;
  for (const Term& c : uniq)
    if (c.kind == TermKind::App && c.sym == symIntegerp() &&
        c.args.size() == 1)
      integerSubjects.insert(printCanonical(c.args[0]));
  std::vector<Term> subs;
  for (Term& c : uniq) {
    if (c.kind == TermKind::App && c.sym == symNumberp() &&
        c.args.size() == 1 &&
        integerSubjects.count(printCanonical(c.args[0])) != 0)
      continue;
    subs.push_back(std::move(c));
  }

  // Accumulate kind constraints per subject; an empty intersection is a
  // contradiction.
  std::map<std::string, std::pair<unsigned, const Term*>> kinds;
  for (const Term& c : subs) {
    auto tc = typedConstraint(c);
    if (!tc) continue;
    auto [it, fresh] =
        kinds.try_emplace(printCanonical(tc->subject), tc->kinds, &c);
    if (!fresh) {
      const unsigned merged = it->second.first & tc->kinds;
      if (merged == 0) {
        if (why) *why = {*it->second.second, c};
        return Term::nil();
      }
      it->second.first = merged;
    }
  }

  // A conjunct alongside its exact negation.
  std::set<std::string> canon;
  for (const Term& c : subs) canon.insert(printCanonical(c));
  for (const Term& c : subs) {
    if (c.kind == TermKind::App && c.sym == symNot() && c.args.size() == 1 &&
        canon.count(printCanonical(c.args[0])) != 0) {
      if (why) *why = {c.args[0], c};
      return Term::nil();
    }
  }

  // An or-clause whose every disjunct conflicts with the accumulated kinds.
  for (const Term& c : subs) {
    if (!(c.kind == TermKind::App && c.sym == symOr()) || c.args.empty())
      continue;
    bool allDead = true;
    const Term* blocker = nullptr;
    for (const Term& d : c.args) {
      bool dead = false;
      if (auto tc = typedConstraint(d)) {
        auto it = kinds.find(printCanonical(tc->subject));
        if (it != kinds.end() && (it->second.first & tc->kinds) == 0) {
          dead = true;
          if (!blocker) blocker = it->second.second;
        }
      }
      if (!dead) {
        allDead = false;
        break;
      }
    }
    if (allDead) {
      if (why) *why = {blocker ? *blocker : Term::truth(), c};
      return Term::nil();
    }
  }

  return makeConjunction(std::move(subs));
}

inline Term simplifyCore(const Term& g, const std::set<Symbol>& numericDefs,
                         ContradictionInfo* why) {
  Term cur = g;
  std::string key = printCanonical(cur);
  for (int round = 0; round < 8; ++round) {
    Term next = simplifyPass(cur, numericDefs, why);
    if (next.kind == TermKind::Nil) return next;  // terminal; keep `why` intact
    std::string nextKey = printCanonical(next);
    if (nextKey == key) return next;
    cur = std::move(next);
    key = std::move(nextKey);
  }
  return cur;
}

inline const std::set<Symbol>& numericDefsFor(const Corpus& corpus,
                                              GuardTable& table) {
  if (!table.numericDefs) table.numericDefs = computeNumericDefs(corpus);
  return *table.numericDefs;
}

inline bool isWeakListClause(const Term& c) {
  if (!(c.kind == TermKind::App && c.sym == symOr()) || c.args.size() != 2)
    return false;
  const Term& a = c.args[0];
  const Term& b = c.args[1];
  return a.kind == TermKind::App && a.sym == symConsp() &&
         a.args.size() == 1 && b.kind == TermKind::App &&
         b.sym == symEqual() && b.args.size() == 2 &&
         b.args[1].kind == TermKind::Nil && a.args[0] == b.args[0];
}

}  // namespace detail

// Fixed guard of a core operator; T unless the table lists one.
inline Term builtinGuard(const Symbol& f) {
  const auto& table = detail::builtinGuardTable();
  auto it = table.find(f);
  return it == table.end() ? Term::truth() : it->second;
}

// Simplify a guard term. With a corpus, recognizer folding also covers calls
// to definitions that provably return numbers. A nil result means the guard
// is unsatisfiable; `why` (when given) receives a conflicting pair.
inline Term simplifyGuard(const Term& g, const Corpus* corpus = nullptr,
                          ContradictionInfo* why = nullptr) {
  std::set<Symbol> numeric;
  if (corpus) numeric = detail::computeNumericDefs(*corpus);
  return detail::simplifyCore(g, numeric, why);
}

inline bool checkContradiction(const Term& g, const Corpus* corpus = nullptr) {
  return simplifyGuard(g, corpus).kind == TermKind::Nil;
}

namespace detail {

inline Term guardOfRec(const Symbol& f, const Corpus& corpus,
                       GuardTable& table, std::set<Symbol>& inFlight);

// Guard of the callee f instantiated with the actual arguments.
inline Term calleeGuard(const Symbol& f, const std::vector<Term>& actuals,
                        const Corpus& corpus, GuardTable& table,
                        std::set<Symbol>& inFlight) {
  std::vector<Symbol> formals;
  Term g = Term::truth();
  if (isCoreFunction(f)) {
    const std::size_t arity = *coreArity(f);
    if (actuals.size() != arity)
      throw ArityError(f.display() + " expects " + std::to_string(arity) +
                       " arguments, got " + std::to_string(actuals.size()));
    g = builtinGuard(f);
    formals = builtinFormals(arity);
  } else {
    const Event* ev = corpus.find(f);
    if (!ev || ev->kind != EventKind::Definition)
      throw UnknownFunctionError("unknown function " + f.display());
    if (actuals.size() != ev->formals.size())
      throw ArityError(f.display() + " expects " +
                       std::to_string(ev->formals.size()) +
                       " arguments, got " + std::to_string(actuals.size()));
    formals = ev->formals;
    if (auto it = table.memo.find(f); it != table.memo.end())
      g = it->second;
    else if (inFlight.count(f) != 0)
      g = Term::truth();
    else
      g = guardOfRec(f, corpus, table, inFlight);
  }
  if (g.kind == TermKind::True) return g;
  std::map<Symbol, Term> env;
  for (std::size_t i = 0; i < formals.size() && i < actuals.size(); ++i)
    env[formals[i]] = actuals[i];
  return expandGuardMacros(substitute(g, env));
}

inline Term guardOfRec(const Symbol& f, const Corpus& corpus,
                       GuardTable& table, std::set<Symbol>& inFlight) {
  if (isCoreFunction(f)) return builtinGuard(f);
  if (auto it = table.memo.find(f); it != table.memo.end()) return it->second;
  const Event* ev = corpus.find(f);
  if (!ev || ev->kind != EventKind::Definition)
    throw UnknownFunctionError("unknown function " + f.display());
  if (ev->declaredGuard && ev->declaredGuard->kind != TermKind::True) {
    table.memo.emplace(f, *ev->declaredGuard);
    return *ev->declaredGuard;
  }
  inFlight.insert(f);
  std::vector<Term> conjuncts;
  forEachSubterm(ev->body, [&](const Term& t, int) {
    if (t.kind != TermKind::App) return;
    Term g = calleeGuard(t.sym, t.args, corpus, table, inFlight);
    if (g.kind != TermKind::True) conjuncts.push_back(std::move(g));
  });
  inFlight.erase(f);
  Term result = simplifyCore(makeConjunction(std::move(conjuncts)),
                             numericDefsFor(corpus, table), nullptr);
  table.memo.emplace(f, result);
  return result;
}

}  // namespace detail

// Guard of a function: the fixed guard for core operators, the declared
// guard verbatim when one exists, otherwise the simplified conjunction of
// all instantiated callee guards in the body.
inline Term guardOf(const Symbol& f, const Corpus& corpus, GuardTable& table) {
  std::set<Symbol> inFlight;
  return detail::guardOfRec(f, corpus, table, inFlight);
}

// Preconditions of a conjecture conclusion: the simplified conjunction of
// the instantiated guard of every application in the expanded statement.
// nil means the constraints contradict (see `why`); surviving list-or-nil
// clauses are dropped afterwards.
inline Term generatePreconditions(const Term& conclusion, const Corpus& corpus,
                                  GuardTable& table,
                                  ContradictionInfo* why = nullptr) {
  const Term expanded = expandMacros(conclusion);
  std::set<Symbol> inFlight;
  std::vector<Term> conjuncts;
  forEachSubterm(expanded, [&](const Term& t, int) {
    if (t.kind != TermKind::App) return;
    Term g = detail::calleeGuard(t.sym, t.args, corpus, table, inFlight);
    if (g.kind != TermKind::True) conjuncts.push_back(std::move(g));
  });
  Term simplified =
      detail::simplifyCore(detail::makeConjunction(std::move(conjuncts)),
                           detail::numericDefsFor(corpus, table), why);
  if (simplified.kind == TermKind::Nil) return simplified;
  std::vector<Term> flat;
  detail::flattenConjuncts(simplified, flat);
  std::vector<Term> keptClauses;
  for (Term& c : flat)
    if (!detail::isWeakListClause(c)) keptClauses.push_back(std::move(c));
  return detail::makeConjunction(std::move(keptClauses));
}

}  // namespace lemmamill
