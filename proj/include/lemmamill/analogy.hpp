#pragma once

// Analogy-driven lemma synthesis.
//
// Given a target theorem (TT) and a statistically similar, already-proven
// source theorem (ST) whose proof needed auxiliary source lemmas (SLs), this
// module manufactures candidate lemmas for the target by mutating the source
// lemmas, in three increasingly aggressive stages:
//
//   level 1 — tree reconstruction: rewrite each SL through a symbol-to-symbol
//     analogy map (mult↦expt, helper-mult↦helper-expt, +↦*, ...), repairing
//     arity mismatches by inserting fresh variables or dropping surplus
//     arguments;
//   level 2 — node expansion: replace one variable of a candidate's
//     conclusion with a small synthesized term (variables in scope, the
//     constants 0/1/-1, applications of functions from the target's
//     dependency closure and the arithmetic operators), smallest terms first;
//   level 3 — term-tree expansion: graft new structure on top of a
//     conclusion's equation sides — arithmetic or closure-function wraps
//     whose arguments come from scope variables, subterms harvested from the
//     bodies of the functions mentioned (instantiated at their actual call
//     arguments), and products of the two.
//
// The analogy map itself is assembled by voting: the two theorem statements
// are aligned top-down, positions whose heads are equal or reliably
// co-clustered contribute head↦head votes (variables vote likewise), and the
// bodies of every function pair discovered this way are aligned in turn
// until no new pair appears. Conflicting votes fork the map — every maximal
// consistent resolution is returned, best-supported choices first. Functions
// a source lemma needs that the source theorem never mentions (the
// accumulator helpers) are mapped through their unique co-cluster sibling
// inside the target's dependency closure.
//
// Each stage's candidates are screened: statements already in the corpus and
// syntactically reflexive equations are dropped, and the rest face random
// counterexample testing twice — first under the mapped source hypotheses,
// then under mechanically inferred guard preconditions. Survivors are
// returned with their provenance; a stage with survivors ends the run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clustering.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "guards.hpp"
#include "macro.hpp"
#include "symbol.hpp"
#include "term.hpp"
#include "testing.hpp"

namespace lemmamill {

struct AnalogyMap {
  std::map<Symbol, Symbol> pairs;  // source symbol -> target symbol

  Term apply(const Term& t) const {
    switch (t.kind) {
      case TermKind::Var: {
        auto it = pairs.find(t.sym);
        return it == pairs.end() ? t : Term::var(it->second);
      }
      case TermKind::App: {
        auto it = pairs.find(t.sym);
        std::vector<Term> args;
        args.reserve(t.args.size());
        for (const Term& a : t.args) args.push_back(apply(a));
        return Term::app(it == pairs.end() ? t.sym : it->second,
                         std::move(args));
      }
      default:
        return t;
    }
  }
};

struct LevelBudgets {
  int l1 = 50;
  int l2 = 500;
  int l3 = 2000;

  void validate() const {
    if (l1 < 1 || l2 < 1 || l3 < 1)
      throw Error("ConfigError", "level budgets must be positive");
  }
};

struct Provenance {
  int level = 1;
  Symbol sourceLemma;
};

struct CandidateLemma {
  Term conclusion;
  Term preconditions;  // conjunction, possibly T
  Provenance provenance;
  TestVerdict verdict;

  Term statement() const {
    if (preconditions.kind == TermKind::True) return conclusion;
    return Term::app(Symbol("implies"), {preconditions, conclusion});
  }
};

struct AnalogyProblem {
  Symbol targetTheorem;
  Symbol sourceTheorem;
  std::vector<Symbol> sourceLemmas;
};

namespace detail {

inline const Symbol& symImplies() {
  static const Symbol s("implies");
  return s;
}

inline std::size_t termSize(const Term& t) {
  std::size_t n = 0;
  forEachSubterm(t, [&](const Term&, int) { ++n; });
  return n;
}

inline std::string alphaKey(const Term& t) {
  return printCanonical(alphaCanonical(t));
}

// (implies H C) -> {H, C}; anything else -> {T, t}.
inline std::pair<Term, Term> splitImplies(const Term& t) {
  if (t.isApp(symImplies()) && t.args.size() == 2)
    return {t.args[0], t.args[1]};
  return {Term::truth(), t};
}

// Macro expansion turns a conjunction into a right-nested (if a b nil)
// chain. Rebuilding the structural conjunction (truthiness-identical) lets
// the counterexample tester slice hypotheses per variable.
inline void collectIfConjuncts(const Term& t, std::vector<Term>& out) {
  if (t.isApp(Symbol("if")) && t.args.size() == 3 &&
      t.args[2].kind == TermKind::Nil) {
    out.push_back(t.args[0]);
    collectIfConjuncts(t.args[1], out);
    return;
  }
  flattenConjuncts(t, out);
}

inline Term conjunctionForm(const Term& hyps) {
  std::vector<Term> cs;
  collectIfConjuncts(hyps, cs);
  return makeConjunction(std::move(cs));
}

inline Term makeImplication(const Term& hyps, const Term& concl) {
  if (hyps.kind == TermKind::True) return concl;
  return Term::app(symImplies(), {hyps, concl});
}

// Corpus-defined functions mentioned by a term, in first-occurrence order.
inline std::vector<Symbol> definedFns(const Term& t, const Corpus& corpus) {
  std::vector<Symbol> out;
  std::set<Symbol> seen;
  forEachSubterm(t, [&](const Term& s, int) {
    if (s.kind == TermKind::App && corpus.isDefinition(s.sym) &&
        seen.insert(s.sym).second)
      out.push_back(s.sym);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Analogy map construction
// ---------------------------------------------------------------------------

struct VoteState {
  std::map<Symbol, std::map<Symbol, int>> votes;
  std::vector<std::pair<Symbol, Symbol>> queue;  // definition pairs to align
  std::set<std::pair<Symbol, Symbol>> queued;
  bool rootIncompatible = false;
};

inline void voteAlign(const Term& src, const Term& tgt, const Corpus& corpus,
                      const Clustering& defClusters, VoteState& vs,
                      bool atRoot) {
  if (src.kind == TermKind::Var && tgt.kind == TermKind::Var) {
    ++vs.votes[src.sym][tgt.sym];
    return;
  }
  if (src.kind == TermKind::App && tgt.kind == TermKind::App) {
    const bool bothCore = isCoreFunction(src.sym) && isCoreFunction(tgt.sym);
    const bool bothUser =
        corpus.isDefinition(src.sym) && corpus.isDefinition(tgt.sym);
    // Anywhere below the root, equal heads, same-arity core heads, and
    // co-clustered user heads may align; the root itself demands an equal
    // head, so an equation never aligns with an implication.
    const bool compatible =
        atRoot ? src.sym == tgt.sym
               : (src.sym == tgt.sym ||
                  (bothCore && src.args.size() == tgt.args.size()) ||
                  (bothUser && defClusters.coClustered(src.sym, tgt.sym)));
    if (!compatible) {
      if (atRoot) vs.rootIncompatible = true;
      return;
    }
    ++vs.votes[src.sym][tgt.sym];
    if (bothUser && vs.queued.insert({src.sym, tgt.sym}).second)
      vs.queue.emplace_back(src.sym, tgt.sym);
    if (src.args.size() == tgt.args.size())
      for (std::size_t i = 0; i < src.args.size(); ++i)
        voteAlign(src.args[i], tgt.args[i], corpus, defClusters, vs, false);
    return;
  }
  if (atRoot && src.kind != tgt.kind) vs.rootIncompatible = true;
}

// Resolve the vote table into maximal consistent maps: each symbol takes one
// target; conflicted symbols fork the map, better-supported targets first.
inline std::vector<std::map<Symbol, Symbol>> resolveVotes(
    const std::map<Symbol, std::map<Symbol, int>>& votes,
    std::size_t maxMaps) {
  std::vector<std::map<Symbol, Symbol>> maps = {{}};
  for (const auto& [src, tally] : votes) {
    std::vector<std::pair<Symbol, int>> ordered(tally.begin(), tally.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) {
                       if (a.second != b.second) return a.second > b.second;
                       return a.first < b.first;
                     });
    // Every map takes the best-supported target; a runner-up forks extra
    // maps only while there is room, so no map is ever left without a pair.
    std::vector<std::map<Symbol, Symbol>> next;
    for (const auto& m : maps) {
      std::map<Symbol, Symbol> grown = m;
      grown.emplace(src, ordered[0].first);
      next.push_back(std::move(grown));
    }
    if (ordered.size() >= 2)
      for (const auto& m : maps) {
        if (next.size() >= maxMaps) break;
        std::map<Symbol, Symbol> grown = m;
        grown.emplace(src, ordered[1].first);
        next.push_back(std::move(grown));
      }
    maps = std::move(next);
  }
  return maps;
}

// Map still-unmapped definitions through their unique co-cluster sibling
// inside the target theorem's dependency closure, skipping siblings that are
// already images of the map (the analogy should not reuse a counterpart).
inline void addSiblingPairs(std::map<Symbol, Symbol>& pairs,
                            const std::set<Symbol>& stMentioned,
                            const std::set<Symbol>& ttClosure,
                            const Corpus& corpus,
                            const Clustering& defClusters) {
  std::set<Symbol> images;
  for (const auto& [from, to] : pairs)
    if (corpus.isDefinition(to)) images.insert(to);
  for (const Symbol& f : corpus.definitionsInOrder()) {
    if (pairs.count(f) || stMentioned.count(f)) continue;
    std::vector<Symbol> candidates;
    for (const Symbol& g : siblingsIn(defClusters, f))
      if (ttClosure.count(g) && !images.count(g) && corpus.isDefinition(g))
        candidates.push_back(g);
    if (candidates.size() == 1) {
      pairs.emplace(f, candidates[0]);
      images.insert(candidates[0]);
    }
  }
}

}  // namespace detail

// Align the source and target theorem statements (and, transitively, the
// bodies of every function pair the alignment discovers) into symbol maps.
// Returns all maximal consistent maps, best-supported first; empty when the
// statements are structurally incompatible at the root.
inline std::vector<AnalogyMap> buildAnalogyMap(const Symbol& targetTheorem,
                                               const Symbol& sourceTheorem,
                                               const Corpus& corpus,
                                               const Clustering& defClusters) {
  const Event& tt = corpus.at(targetTheorem);
  const Event& st = corpus.at(sourceTheorem);
  if (tt.kind != EventKind::Theorem || st.kind != EventKind::Theorem)
    throw UnknownNameError("analogy endpoints must be theorems");

  detail::VoteState vs;
  detail::voteAlign(st.body, tt.body, corpus, defClusters, vs, true);
  if (vs.rootIncompatible) return {};
  std::set<std::pair<Symbol, Symbol>> aligned;
  while (!vs.queue.empty()) {
    auto [f, g] = vs.queue.front();
    vs.queue.erase(vs.queue.begin());
    if (!aligned.insert({f, g}).second) continue;
    detail::voteAlign(corpus.at(f).body, corpus.at(g).body, corpus,
                      defClusters, vs, false);
  }

  std::vector<std::map<Symbol, Symbol>> resolved =
      detail::resolveVotes(vs.votes, 8);

  std::set<Symbol> stMentioned;
  for (const Symbol& f : detail::definedFns(st.body, corpus))
    stMentioned.insert(f);
  std::set<Symbol> ttClosure = corpus.dependencyClosure(targetTheorem);

  std::vector<AnalogyMap> out;
  std::set<std::string> seen;
  for (auto& pairs : resolved) {
    detail::addSiblingPairs(pairs, stMentioned, ttClosure, corpus,
                            defClusters);
    std::string key;
    for (const auto& [a, b] : pairs) key += a.text + ">" + b.text + ";";
    if (seen.insert(key).second) out.push_back(AnalogyMap{std::move(pairs)});
  }
  return out;
}

namespace detail {

// ---------------------------------------------------------------------------
// Level 1: map application and arity repair
// ---------------------------------------------------------------------------

inline Symbol freshVar(const std::set<std::string>& used, int& counter) {
  for (;;) {
    std::string name = "v" + std::to_string(++counter);
    Symbol s(name);
    if (!used.count(s.text)) return s;
  }
}

// Rewrites the first application (pre-order) whose argument count disagrees
// with the called definition's arity. A one-argument gap tries the fresh
// variable at every position; larger gaps append at the end. A surplus of
// one tries dropping each position; larger surpluses truncate.
inline bool repairFirstSite(const Term& t, const Corpus& corpus,
                            const std::set<std::string>& usedVars,
                            int& freshCounter, std::vector<Term>& variants) {
  if (t.kind != TermKind::App) return false;
  const Event* e = corpus.find(t.sym);
  if (e && e->kind == EventKind::Definition &&
      e->formals.size() != t.args.size()) {
    const int gap = int(e->formals.size()) - int(t.args.size());
    if (gap == 1) {
      Symbol v = freshVar(usedVars, freshCounter);
      for (std::size_t pos = 0; pos <= t.args.size(); ++pos) {
        std::vector<Term> args = t.args;
        args.insert(args.begin() + long(pos), Term::var(v));
        variants.push_back(Term::app(t.sym, std::move(args)));
      }
    } else if (gap > 1) {
      std::vector<Term> args = t.args;
      for (int i = 0; i < gap; ++i)
        args.push_back(Term::var(freshVar(usedVars, freshCounter)));
      variants.push_back(Term::app(t.sym, std::move(args)));
    } else if (gap == -1) {
      for (std::size_t pos = 0; pos < t.args.size(); ++pos) {
        std::vector<Term> args = t.args;
        args.erase(args.begin() + long(pos));
        variants.push_back(Term::app(t.sym, std::move(args)));
      }
    } else {
      std::vector<Term> args(t.args.begin(),
                             t.args.begin() + long(e->formals.size()));
      variants.push_back(Term::app(t.sym, std::move(args)));
    }
    return true;
  }
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    std::vector<Term> sub;
    if (repairFirstSite(t.args[i], corpus, usedVars, freshCounter, sub)) {
      for (Term& s : sub) {
        std::vector<Term> args = t.args;
        args[i] = std::move(s);
        variants.push_back(Term::app(t.sym, std::move(args)));
      }
      return true;
    }
  }
  return false;
}

inline std::vector<Term> arityRepair(const Term& stmt, const Corpus& corpus,
                                     std::size_t budget) {
  std::set<std::string> usedVars;
  for (const Symbol& v : varsInOrder(stmt)) usedVars.insert(v.text);
  std::vector<Term> done;
  std::deque<Term> work{stmt};
  while (!work.empty() && done.size() < budget) {
    Term t = std::move(work.front());
    work.pop_front();
    int freshCounter = 0;
    std::vector<Term> variants;
    if (repairFirstSite(t, corpus, usedVars, freshCounter, variants)) {
      for (Term& v : variants)
        if (work.size() + done.size() < 4 * budget) work.push_back(std::move(v));
    } else {
      done.push_back(std::move(t));
    }
  }
  return done;
}

// ---------------------------------------------------------------------------
// Synthesis pool shared by levels 2 and 3
// ---------------------------------------------------------------------------

struct HeadInfo {
  Symbol sym;
  std::size_t arity;
};

// Functions usable as synthesis heads: the dependency closures of the given
// roots in definition order, then the arithmetic operators.
inline std::vector<HeadInfo> closureHeads(const std::vector<Symbol>& roots,
                                          const Corpus& corpus) {
  std::set<Symbol> cls;
  for (const Symbol& r : roots) {
    if (corpus.isDefinition(r)) cls.insert(r);
    for (const Symbol& d : corpus.dependencyClosure(r)) cls.insert(d);
  }
  std::vector<HeadInfo> heads;
  for (const Symbol& d : corpus.definitionsInOrder())
    if (cls.count(d)) heads.push_back({d, corpus.at(d).formals.size()});
  heads.push_back({Symbol("binary-+"), 2});
  heads.push_back({Symbol("binary-*"), 2});
  heads.push_back({Symbol("unary--"), 1});
  return heads;
}

inline std::vector<Term> poolAtoms(const std::vector<Symbol>& scopeVars) {
  std::vector<Term> atoms;
  for (const Symbol& v : scopeVars) atoms.push_back(Term::var(v));
  atoms.push_back(Term::integer(0));
  atoms.push_back(Term::integer(1));
  atoms.push_back(Term::integer(-1));
  return atoms;
}

// Enumerate argument tuples lexicographically (odometer over a base set).
template <typename Fn>
inline void forEachTuple(std::size_t arity, std::size_t base, Fn&& fn,
                         std::size_t cap) {
  std::vector<std::size_t> idx(arity, 0);
  std::size_t count = 0;
  for (;;) {
    fn(idx);
    if (++count >= cap) return;
    std::size_t p = arity;
    while (p > 0) {
      if (++idx[p - 1] < base) break;
      idx[p - 1] = 0;
      --p;
    }
    if (p == 0) return;
  }
}

struct SynthPool {
  std::vector<Term> terms;                    // sorted smallest-first
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> buckets;

  void finalize() {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term& a, const Term& b) {
                       return termSize(a) < termSize(b);
                     });
    for (std::size_t i = 0; i < terms.size(); ++i) {
      std::size_t s = termSize(terms[i]);
      auto it = buckets.find(s);
      if (it == buckets.end())
        buckets.emplace(s, std::make_pair(i, i + 1));
      else
        it->second.second = i + 1;
    }
  }
};

// Pool of synthesized terms: atoms, applications over atoms, and
// applications with exactly one single-application argument (two structure
// levels). Deterministic; globally capped for safety on huge closures.
inline SynthPool buildSynthPool(const std::vector<Symbol>& scopeVars,
                                const std::vector<HeadInfo>& heads) {
  constexpr std::size_t kTupleCap = 4096;
  constexpr std::size_t kPoolCap = 20000;
  // Generate everything (bounded by kGenCap), then keep the kPoolCap
  // smallest terms: a hard cap applied during generation would starve small
  // terms built from heads that happen to enumerate late.
  constexpr std::size_t kGenCap = 200000;
  SynthPool pool;
  const std::vector<Term> atoms = poolAtoms(scopeVars);
  pool.terms = atoms;
  std::vector<Term> single;
  for (const HeadInfo& h : heads) {
    if (h.arity == 0 || single.size() >= kGenCap) continue;
    forEachTuple(h.arity, atoms.size(),
                 [&](const std::vector<std::size_t>& idx) {
                   std::vector<Term> args;
                   args.reserve(h.arity);
                   for (std::size_t i : idx) args.push_back(atoms[i]);
                   single.push_back(Term::app(h.sym, std::move(args)));
                 },
                 kTupleCap);
  }
  for (const Term& s : single) {
    pool.terms.push_back(s);
    if (pool.terms.size() >= kGenCap) break;
  }
  for (const HeadInfo& h : heads) {
    if (h.arity == 0 || pool.terms.size() >= kGenCap) continue;
    for (std::size_t nestedPos = 0;
         nestedPos < h.arity && pool.terms.size() < kGenCap; ++nestedPos) {
      for (const Term& inner : single) {
        if (pool.terms.size() >= kGenCap) break;
        if (h.arity == 1) {
          pool.terms.push_back(Term::app(h.sym, {inner}));
          continue;
        }
        forEachTuple(h.arity - 1, atoms.size(),
                     [&](const std::vector<std::size_t>& idx) {
                       if (pool.terms.size() >= kGenCap) return;
                       std::vector<Term> args;
                       args.reserve(h.arity);
                       std::size_t ai = 0;
                       for (std::size_t pos = 0; pos < h.arity; ++pos)
                         args.push_back(pos == nestedPos ? inner
                                                         : atoms[idx[ai++]]);
                       pool.terms.push_back(Term::app(h.sym, std::move(args)));
                     },
                     kTupleCap);
      }
    }
  }
  if (pool.terms.size() > kPoolCap) {
    std::stable_sort(pool.terms.begin(), pool.terms.end(),
                     [](const Term& a, const Term& b) {
                       return termSize(a) < termSize(b);
                     });
    pool.terms.resize(kPoolCap);
  }
  pool.finalize();
  return pool;
}

// ---------------------------------------------------------------------------
// Candidate pipeline: pendings carry their originating source lemma
// ---------------------------------------------------------------------------

struct Pending {
  Term stmt;
  Symbol source;
};

// Substitute `replacement` for the n-th variable occurrence (pre-order).
inline Term substAtVar(const Term& t, std::size_t target, std::size_t& counter,
                       const Term& replacement) {
  if (t.kind == TermKind::Var) {
    if (counter++ == target) return replacement;
    return t;
  }
  if (t.kind != TermKind::App) return t;
  std::vector<Term> args;
  args.reserve(t.args.size());
  for (const Term& a : t.args)
    args.push_back(substAtVar(a, target, counter, replacement));
  return Term::app(t.sym, std::move(args));
}

inline const Term* varAt(const Term& t, std::size_t target,
                         std::size_t& counter) {
  if (t.kind == TermKind::Var) {
    if (counter++ == target) return &t;
    return nullptr;
  }
  if (t.kind != TermKind::App) return nullptr;
  for (const Term& a : t.args)
    if (const Term* hit = varAt(a, target, counter)) return hit;
  return nullptr;
}

class Emitter {
 public:
  explicit Emitter(std::size_t budget) : budget_(budget) {}

  bool emit(std::vector<Pending>& out, Term stmt, const Symbol& source) {
    if (out.size() >= budget_) return false;
    if (seen_.insert(alphaKey(stmt)).second)
      out.push_back({std::move(stmt), source});
    return out.size() < budget_;
  }

 private:
  std::size_t budget_;
  std::set<std::string> seen_;
};

// Level 2 over pendings: smallest synthesized terms first, interleaved
// across candidates and variable positions so small rewrites of every
// candidate precede large rewrites of any.
inline std::vector<Pending> level2Pendings(const std::vector<Pending>& in,
                                           const Corpus& corpus,
                                           const std::vector<Symbol>& roots,
                                           std::size_t budget) {
  std::vector<Pending> out;
  Emitter em(budget);
  for (const Pending& p : in)
    if (!em.emit(out, p.stmt, p.source)) return out;

  const std::vector<HeadInfo> heads = closureHeads(roots, corpus);
  struct Item {
    Term hyps, concl;
    Symbol source;
    std::size_t nvars;
    const SynthPool* pool;
  };
  // Pools depend only on the variables in scope; candidates overwhelmingly
  // share scopes, so cache by scope signature.
  std::map<std::string, SynthPool> poolCache;
  std::vector<Item> items;
  std::set<std::size_t> sizes;
  for (const Pending& p : in) {
    auto [h, c] = splitImplies(p.stmt);
    std::vector<Symbol> scope = varsInOrder(c);
    std::string sig;
    for (const Symbol& v : scope) sig += v.text + ",";
    auto cached = poolCache.find(sig);
    if (cached == poolCache.end())
      cached = poolCache.emplace(sig, buildSynthPool(scope, heads)).first;
    Item it{h, c, p.source, 0, &cached->second};
    std::size_t n = 0;
    forEachSubterm(c, [&](const Term& s, int) {
      if (s.kind == TermKind::Var) ++n;
    });
    it.nvars = n;
    for (const auto& [s, _] : it.pool->buckets) sizes.insert(s);
    items.push_back(std::move(it));
  }
  for (std::size_t s : sizes) {
    for (const Item& it : items) {
      auto bucket = it.pool->buckets.find(s);
      if (bucket == it.pool->buckets.end()) continue;
      for (std::size_t pos = 0; pos < it.nvars; ++pos) {
        std::size_t c0 = 0;
        const Term* cur = varAt(it.concl, pos, c0);
        for (std::size_t i = bucket->second.first; i < bucket->second.second;
             ++i) {
          const Term& t = it.pool->terms[i];
          if (cur && t == *cur) continue;  // no-op substitution
          std::size_t c1 = 0;
          Term concl = substAtVar(it.concl, pos, c1, t);
          if (!em.emit(out, makeImplication(it.hyps, std::move(concl)),
                       it.source))
            return out;
        }
      }
    }
  }
  return out;
}

// Subterms of the bodies of the functions a conclusion calls, instantiated
// at the call's actual arguments; only closed-over-scope, non-predicate,
// small terms are kept.
inline std::vector<Term> harvestSubterms(const Term& concl,
                                         const Corpus& corpus,
                                         const std::set<Symbol>& scope) {
  std::vector<Term> out;
  std::set<std::string> seen;
  std::set<Symbol> visited;
  forEachSubterm(concl, [&](const Term& site, int) {
    if (site.kind != TermKind::App) return;
    const Event* e = corpus.find(site.sym);
    if (!e || e->kind != EventKind::Definition) return;
    if (e->formals.size() != site.args.size()) return;
    if (!visited.insert(site.sym).second) return;  // first call site only
    std::map<Symbol, Term> binding;
    for (std::size_t i = 0; i < e->formals.size(); ++i)
      binding.emplace(e->formals[i], site.args[i]);
    forEachSubterm(e->body, [&](const Term& u, int) {
      if (u.kind != TermKind::App || isPredicateHead(u.sym)) return;
      if (u.sym == Symbol("if")) return;
      Term inst = substitute(u, binding);
      if (termSize(inst) > 6) return;
      for (const Symbol& v : varsInOrder(inst))
        if (!scope.count(v)) return;
      if (seen.insert(printCanonical(inst)).second)
        out.push_back(std::move(inst));
    });
  });
  std::stable_sort(out.begin(), out.end(), [](const Term& a, const Term& b) {
    return termSize(a) < termSize(b);
  });
  return out;
}

// Level 3 over pendings: wrap the sides of each conclusion's equation with
// arithmetic or unary closure-function applications; wrap arguments come
// from scope variables, constants, harvested subterms, and products of a
// harvested subterm with a scope variable. The right-hand side may be
// wrapped twice (an inner combination under an outer one).
inline std::vector<Pending> level3Pendings(const std::vector<Pending>& in,
                                           const Corpus& corpus,
                                           const std::vector<Symbol>& roots,
                                           std::size_t budget) {
  static const Symbol kEqual("equal");
  static const Symbol kPlus("binary-+");
  static const Symbol kTimes("binary-*");
  std::vector<Pending> out;
  Emitter em(budget);
  for (const Pending& p : in)
    if (!em.emit(out, p.stmt, p.source)) return out;

  const std::vector<HeadInfo> heads = closureHeads(roots, corpus);
  std::vector<Symbol> unaryFns;
  for (const HeadInfo& h : heads)
    if (h.arity == 1 && corpus.isDefinition(h.sym)) unaryFns.push_back(h.sym);

  for (const Pending& p : in) {
    auto [hyps, concl] = splitImplies(p.stmt);
    const bool isEq = concl.isApp(kEqual) && concl.args.size() == 2;
    const std::vector<Symbol> scopeOrder = varsInOrder(concl);
    const std::set<Symbol> scope(scopeOrder.begin(), scopeOrder.end());

    std::vector<Term> pool = poolAtoms(scopeOrder);
    const std::vector<Term> harvested = harvestSubterms(concl, corpus, scope);
    pool.insert(pool.end(), harvested.begin(), harvested.end());
    for (const Symbol& op : {kTimes, kPlus})
      for (const Term& h : harvested)
        for (const Symbol& v : scopeOrder)
          pool.push_back(Term::app(op, {h, Term::var(v)}));

    auto wrapsOf = [&](const Term& side) {
      std::vector<Term> ws;
      for (const Symbol& op : {kPlus, kTimes}) {
        for (const Term& a : pool) ws.push_back(Term::app(op, {a, side}));
        for (const Term& a : pool) ws.push_back(Term::app(op, {side, a}));
      }
      for (const Symbol& f : unaryFns) ws.push_back(Term::app(f, {side}));
      return ws;
    };
    auto rebuild = [&](std::size_t argIdx, Term repl) {
      if (!isEq) return makeImplication(hyps, std::move(repl));
      std::vector<Term> args = concl.args;
      args[argIdx] = std::move(repl);
      return makeImplication(hyps, Term::app(kEqual, std::move(args)));
    };

    const Term& right = isEq ? concl.args[1] : concl;
    const std::vector<Term> w1r = wrapsOf(right);
    for (const Term& w : w1r)
      if (!em.emit(out, rebuild(1, w), p.source)) return out;
    if (isEq)
      for (const Term& w : wrapsOf(concl.args[0]))
        if (!em.emit(out, rebuild(0, w), p.source)) return out;
    for (const Term& w : w1r)
      for (const Term& w2 : wrapsOf(w))
        if (!em.emit(out, rebuild(1, w2), p.source)) return out;
  }
  return out;
}

}  // namespace detail

// Level 1, tree reconstruction: the source lemma's statement rewritten
// through the analogy map, with arity repairs; α-deduplicated.
inline std::vector<Term> mutateLevel1(const Event& sourceLemma,
                                      const AnalogyMap& map,
                                      const Corpus& corpus, int budget = 50) {
  if (budget < 1) throw Error("ConfigError", "budget must be positive");
  std::vector<Term> repaired = detail::arityRepair(
      map.apply(sourceLemma.body), corpus, std::size_t(budget));
  std::vector<Term> out;
  std::set<std::string> seen;
  for (Term& t : repaired)
    if (seen.insert(detail::alphaKey(t)).second) out.push_back(std::move(t));
  return out;
}

// Level 2, node expansion. `closureRoots` names the events whose dependency
// closure supplies synthesis heads (typically the target theorem).
inline std::vector<Term> mutateLevel2(const std::vector<Term>& candidates,
                                      const Corpus& corpus,
                                      const std::vector<Symbol>& closureRoots,
                                      int budget = 500) {
  if (budget < 1) throw Error("ConfigError", "budget must be positive");
  std::vector<detail::Pending> in;
  for (const Term& t : candidates) in.push_back({t, Symbol("anonymous")});
  std::vector<detail::Pending> grown =
      detail::level2Pendings(in, corpus, closureRoots, std::size_t(budget));
  std::vector<Term> out;
  for (detail::Pending& p : grown) out.push_back(std::move(p.stmt));
  return out;
}

// Level 3, term-tree expansion on top of conclusions.
inline std::vector<Term> mutateLevel3(const std::vector<Term>& candidates,
                                      const Corpus& corpus,
                                      const std::vector<Symbol>& closureRoots,
                                      int budget = 2000) {
  if (budget < 1) throw Error("ConfigError", "budget must be positive");
  std::vector<detail::Pending> in;
  for (const Term& t : candidates) in.push_back({t, Symbol("anonymous")});
  std::vector<detail::Pending> grown =
      detail::level3Pendings(in, corpus, closureRoots, std::size_t(budget));
  std::vector<Term> out;
  for (detail::Pending& p : grown) out.push_back(std::move(p.stmt));
  return out;
}

// Source lemma discovery: corpus theorems mentioning a function equal or
// co-clustered to one of the source theorem's functions, ordered by how many
// functions they share with the source theorem, then by corpus order.
inline std::vector<Symbol> discoverSourceLemmas(const Symbol& sourceTheorem,
                                                const Symbol& targetTheorem,
                                                const Corpus& corpus,
                                                const Clustering& defClusters) {
  const Event& st = corpus.at(sourceTheorem);
  std::vector<Symbol> stFns = detail::definedFns(st.body, corpus);
  struct Scored {
    Symbol name;
    int shared;
    std::size_t ordinal;
  };
  std::vector<Scored> scored;
  for (const Symbol& thm : corpus.theoremsInOrder()) {
    if (thm == sourceTheorem || thm == targetTheorem) continue;
    const Event& e = corpus.at(thm);
    std::vector<Symbol> fns = detail::definedFns(e.body, corpus);
    bool related = false;
    int shared = 0;
    for (const Symbol& f : fns)
      for (const Symbol& g : stFns) {
        if (f == g) {
          ++shared;
          related = true;
          break;
        }
        if (defClusters.coClustered(f, g)) related = true;
      }
    if (related) scored.push_back({thm, shared, e.ordinal});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     if (a.shared != b.shared) return a.shared > b.shared;
                     return a.ordinal < b.ordinal;
                   });
  std::vector<Symbol> out;
  for (Scored& s : scored) out.push_back(s.name);
  return out;
}

// The statistically nearest reliable theorem sibling of the target, if any.
inline std::optional<Symbol> chooseSourceTheorem(const Symbol& targetTheorem,
                                                 const Corpus& corpus,
                                                 const ValueMap& values,
                                                 const ClusterConfig& cfg) {
  Clustering rel = reliableTheoremClusters(corpus, values, cfg);
  std::vector<Symbol> sibs = siblingsIn(rel, targetTheorem);
  if (sibs.empty()) return std::nullopt;
  std::map<Symbol, FeatureVector> vectors = theoremVectors(corpus, values);
  const FeatureVector& target = vectors.at(targetTheorem);
  std::optional<Symbol> best;
  double bestDist = 0;
  std::size_t bestOrdinal = 0;
  for (const Symbol& s : sibs) {
    double d2 = 0;
    const FeatureVector& v = vectors.at(s);
    for (std::size_t i = 0; i < v.size(); ++i) {
      double d = v[i] - target[i];
      d2 += d * d;
    }
    std::size_t ord = corpus.at(s).ordinal;
    if (!best || d2 < bestDist || (d2 == bestDist && ord < bestOrdinal)) {
      best = s;
      bestDist = d2;
      bestOrdinal = ord;
    }
  }
  return best;
}

// The staged pipeline: mutate, screen, test; stop at the first level with
// survivors. Candidates are tested under the mapped source hypotheses first
// and under inferred guard preconditions second; statements the corpus
// already contains and reflexive equations are screened out.
inline std::vector<CandidateLemma> suggestLemmas(const AnalogyProblem& problem,
                                                 const Corpus& corpus,
                                                 const Clustering& defClusters,
                                                 const TestConfig& testCfg = {},
                                                 const LevelBudgets& budgets = {}) {
  budgets.validate();
  testCfg.validate();
  if (problem.sourceLemmas.empty()) return {};
  if (problem.targetTheorem == problem.sourceTheorem) return {};

  std::vector<AnalogyMap> maps = buildAnalogyMap(
      problem.targetTheorem, problem.sourceTheorem, corpus, defClusters);
  if (maps.empty()) return {};

  std::set<std::string> knownStmts;
  for (const Symbol& thm : corpus.theoremsInOrder())
    knownStmts.insert(detail::alphaKey(corpus.at(thm).body));

  GuardTable guards;
  std::set<std::string> tested;
  std::set<std::string> returnedKeys;

  auto testBatch = [&](const std::vector<detail::Pending>& batch, int level) {
    std::vector<CandidateLemma> survivors;
    for (const detail::Pending& p : batch) {
      if (!tested.insert(detail::alphaKey(p.stmt)).second) continue;
      auto [rawHyps, concl] = detail::splitImplies(p.stmt);
      const Term hyps = detail::conjunctionForm(rawHyps);
      if (concl.isApp(Symbol("equal")) && concl.args.size() == 2 &&
          concl.args[0] == concl.args[1])
        continue;  // reflexive equation: vacuously true, useless
      if (knownStmts.count(detail::alphaKey(p.stmt))) continue;

      TestVerdict va = testConjecture(hyps, concl, corpus, testCfg);
      if (va.kind == VerdictKind::Survived) {
        CandidateLemma c{concl, hyps, {level, p.source}, va};
        if (returnedKeys.insert(detail::alphaKey(c.statement())).second)
          survivors.push_back(std::move(c));
        continue;
      }
      Term pre;
      try {
        pre = generatePreconditions(concl, corpus, guards);
      } catch (const Error&) {
        continue;  // guard inference failed: reject the candidate
      }
      if (pre.kind == TermKind::Nil) continue;
      TestVerdict vb = testConjecture(pre, concl, corpus, testCfg);
      if (vb.kind == VerdictKind::Survived) {
        CandidateLemma c{concl, pre, {level, p.source}, vb};
        if (returnedKeys.insert(detail::alphaKey(c.statement())).second)
          survivors.push_back(std::move(c));
      }
    }
    return survivors;
  };

  std::vector<detail::Pending> level1;
  {
    detail::Emitter em(std::size_t(budgets.l1));
    for (const Symbol& slName : problem.sourceLemmas) {
      const Event& sl = corpus.at(slName);
      for (const AnalogyMap& map : maps)
        for (Term& t : mutateLevel1(sl, map, corpus, budgets.l1))
          if (!em.emit(level1, std::move(t), slName)) goto l1done;
    }
  l1done:;
  }
  std::vector<CandidateLemma> survivors = testBatch(level1, 1);
  if (!survivors.empty()) return survivors;

  const std::vector<Symbol> roots = {problem.targetTheorem};
  std::vector<detail::Pending> level2 = detail::level2Pendings(
      level1, corpus, roots, std::size_t(budgets.l2));
  survivors = testBatch(level2, 2);
  if (!survivors.empty()) return survivors;

  std::vector<detail::Pending> level3 = detail::level3Pendings(
      level2, corpus, roots, std::size_t(budgets.l3));
  return testBatch(level3, 3);
}

}  // namespace lemmamill
