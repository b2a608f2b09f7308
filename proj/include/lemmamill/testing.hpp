#pragma once

// Random counterexample testing of conjectures.
//
// A conjecture is tested by drawing sample assignments for its free
// variables, discarding assignments that fail the preconditions, and
// evaluating the conclusion on the rest. Any satisfying assignment whose
// conclusion evaluates to nil falsifies the conjecture and is reported as a
// replayable witness; enough satisfying, non-falsifying samples mean the
// conjecture survives; too few satisfying samples is an explicitly
// inconclusive verdict so callers can treat starved preconditions as
// rejection rather than success.
//
// Value generation is type-directed: the precondition slice of a variable
// (the conjuncts mentioning only that variable) is analyzed into a set of
// admissible value kinds — integer constraints narrow to integers, consp to
// proper lists, equalities pin a literal — and draws are steered to those
// kinds. When the slice is built purely from core operators, each draw is
// additionally verified against the slice and retried, so that every value
// the generator emits genuinely satisfies its predicate. A slice whose kind
// set is empty (say a number that must also be a cons) is unsatisfiable and
// signals instead of looping.
//
// Sampling is deterministic: sample s of variable i draws from an
// independent stream seeded by mixing the configured seed with s and i, so
// verdicts and witnesses are reproducible and samples could be drawn in
// parallel without changing results. Evaluation traps (depth or step budget
// exhaustion, unknown functions in foreign predicates) count as discards.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "guards.hpp"
#include "rng.hpp"
#include "symbol.hpp"
#include "term.hpp"

namespace lemmamill {

struct TestConfig {
  int samples = 100;
  int minSatisfying = 30;
  long long maxRecursionDepth = 5000;
  int intLo = -20;
  int intHi = 20;
  int maxListLen = 6;
  std::uint64_t seed = 0;

  void validate() const {
    if (samples < 1) throw Error("ConfigError", "samples must be positive");
    if (minSatisfying < 1 || minSatisfying > samples)
      throw Error("ConfigError",
                  "minSatisfying must be in 1.." + std::to_string(samples));
    if (maxRecursionDepth < 1)
      throw Error("ConfigError", "maxRecursionDepth must be positive");
    if (intLo > intHi)
      throw Error("ConfigError", "empty integer range");
    if (maxListLen < 1)
      throw Error("ConfigError", "maxListLen must be positive");
  }
};

enum class VerdictKind { Falsified, Survived, Inconclusive };
enum class InconclusiveReason { TooFewSatisfying, AllEvalsTrapped };

using Witness = std::vector<std::pair<Symbol, Value>>;

struct TestVerdict {
  VerdictKind kind;
  Witness witness;                     // Falsified only
  int satisfyingCount = 0;             // Survived only
  InconclusiveReason reason = InconclusiveReason::TooFewSatisfying;

  static TestVerdict falsified(Witness w) {
    TestVerdict v;
    v.kind = VerdictKind::Falsified;
    v.witness = std::move(w);
    return v;
  }
  static TestVerdict survived(int count) {
    TestVerdict v;
    v.kind = VerdictKind::Survived;
    v.satisfyingCount = count;
    return v;
  }
  static TestVerdict inconclusive(InconclusiveReason r) {
    TestVerdict v;
    v.kind = VerdictKind::Inconclusive;
    v.reason = r;
    return v;
  }
};

// Witnesses print as s-expression bindings: ((n 3) (j 0) (k 1)).
inline std::string printWitness(const Witness& w) {
  std::string out = "(";
  bool first = true;
  for (const auto& [name, value] : w) {
    if (!first) out += " ";
    first = false;
    out += "(" + name.display() + " " + value.print() + ")";
  }
  out += ")";
  return out;
}

namespace detail {

// Steering information extracted from a single-variable predicate slice.
struct SliceShape {
  unsigned kinds = kKindAll;
  bool nonNegative = false;
  std::optional<Term> pinned;  // literal from an equality conjunct
  bool coreOnly = true;        // slice evaluable without user functions
};

inline bool termUsesUserFunctions(const Term& t) {
  bool user = false;
  forEachSubterm(t, [&](const Term& s, int) {
    if (s.kind == TermKind::App && !isCoreFunction(s.sym) &&
        !(s.sym == symAnd() || s.sym == symOr()) && !isMacroHead(s.sym))
      user = true;
  });
  return user;
}

inline SliceShape analyzeSlice(const Term& pred, const Symbol& var) {
  SliceShape shape;
  shape.coreOnly = !termUsesUserFunctions(pred);
  const Term varTerm = Term::var(var);
  std::vector<Term> conjuncts;
  flattenConjuncts(pred, conjuncts);
  for (const Term& c : conjuncts) {
    if (c.kind == TermKind::True) continue;
    if (c.kind == TermKind::App && c.sym == symNatp() && c.args.size() == 1 &&
        c.args[0] == varTerm) {
      shape.kinds &= kKindInt;
      shape.nonNegative = true;
      continue;
    }
    // (not (< x 0)) — the non-negativity idiom produced by guard inference.
    if (c.kind == TermKind::App && c.sym == symNot() && c.args.size() == 1 &&
        c.args[0].isApp(symLess()) && c.args[0].args.size() == 2 &&
        c.args[0].args[0] == varTerm &&
        c.args[0].args[1] == Term::integer(0)) {
      shape.nonNegative = true;
      continue;
    }
    if (c.kind == TermKind::App && c.sym == symEqual() &&
        c.args.size() == 2) {
      if (c.args[0] == varTerm && literalKind(c.args[1]))
        shape.pinned = c.args[1];
      else if (c.args[1] == varTerm && literalKind(c.args[0]))
        shape.pinned = c.args[0];
    }
    if (auto tc = typedConstraint(c); tc && tc->subject == varTerm) {
      shape.kinds &= tc->kinds;
      continue;
    }
    // An or-clause narrows to the union of its disjuncts' kinds when every
    // disjunct is a kind constraint on this variable.
    if (c.kind == TermKind::App && c.sym == symOr() && !c.args.empty()) {
      unsigned unionKinds = 0;
      bool allTyped = true;
      for (const Term& d : c.args) {
        auto tc = typedConstraint(d);
        if (tc && tc->subject == varTerm)
          unionKinds |= tc->kinds;
        else
          allTyped = false;
      }
      if (allTyped) shape.kinds &= unionKinds;
    }
    // Anything else is left to the verify-and-retry loop.
  }
  return shape;
}

inline Value valueOfLiteral(const Term& t) {
  switch (t.kind) {
    case TermKind::Num:
      return Value::integer(t.num);
    case TermKind::True:
      return Value::truth();
    default:
      return Value::nil();
  }
}

inline unsigned kindOfValue(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int:
      return kKindInt;
    case Value::Kind::Nil:
      return kKindNil;
    case Value::Kind::True:
      return kKindTrue;
    case Value::Kind::Sym:
      return kKindSym;
    default:
      return kKindCons;
  }
}

inline Value drawOfKinds(const SliceShape& shape, const TestConfig& cfg,
                         Rng& rng) {
  if (shape.pinned) {
    Value v = valueOfLiteral(*shape.pinned);
    if ((kindOfValue(v) & shape.kinds) == 0)
      throw UnsatisfiableError("pinned value conflicts with its kind");
    return v;
  }
  std::vector<unsigned> options;
  for (unsigned k : {kKindInt, kKindNil, kKindTrue, kKindSym, kKindCons})
    if ((shape.kinds & k) != 0) options.push_back(k);
  if (options.empty())
    throw UnsatisfiableError("no value kind admitted by the predicate");
  switch (options[rng.below(options.size())]) {
    case kKindInt: {
      const int lo = shape.nonNegative ? std::max(0, cfg.intLo) : cfg.intLo;
      if (lo > cfg.intHi)
        throw UnsatisfiableError("empty integer range after constraints");
      return Value::integer(rng.intIn(lo, cfg.intHi));
    }
    case kKindNil:
      return Value::nil();
    case kKindTrue:
      return Value::truth();
    case kKindSym: {
      static const Symbol pool[3] = {Symbol("foo"), Symbol("bar"),
                                     Symbol("baz")};
      return Value::symbol(pool[rng.below(3)]);
    }
    default: {
      const std::size_t len = 1 + rng.below(static_cast<std::uint64_t>(
                                      cfg.maxListLen));
      Value list = Value::nil();
      for (std::size_t i = 0; i < len; ++i)
        list = Value::cons(Value::integer(rng.intIn(cfg.intLo, cfg.intHi)),
                           std::move(list));
      return list;
    }
  }
}

inline const Corpus& emptyCorpus() {
  static const Corpus c{};
  return c;
}

}  // namespace detail

// Draw one value satisfying a single-variable predicate slice (or T).
// Draws are steered by the slice's kind analysis; when the slice uses only
// core operators each draw is verified against it and retried, so every
// returned value satisfies the predicate. Unsatisfiable slices signal.
inline Value generateValue(const Term& pred, const TestConfig& cfg, Rng& rng) {
  cfg.validate();
  if (pred.kind == TermKind::True) {
    detail::SliceShape any;
    return detail::drawOfKinds(any, cfg, rng);
  }
  const std::vector<Symbol> vars = varsInOrder(pred);
  const Symbol var = vars.empty() ? Symbol("x") : vars[0];
  const detail::SliceShape shape = detail::analyzeSlice(pred, var);
  Evaluator ev(detail::emptyCorpus(),
               EvalConfig{cfg.maxRecursionDepth, 5'000'000});
  for (int attempt = 0; attempt < 200; ++attempt) {
    Value v = detail::drawOfKinds(shape, cfg, rng);
    if (!shape.coreOnly) return v;
    try {
      if (ev.eval(pred, Env{{var, v}}).truthy()) return v;
    } catch (const Error&) {
      // fall through to retry
    }
  }
  throw UnsatisfiableError("no satisfying value found for " +
                           displaySurface(pred));
}

// Replay a witness: true iff the preconditions hold and the conclusion
// evaluates (without trapping) to nil under the witness bindings.
inline bool witnessViolates(const Term& preconditions, const Term& conclusion,
                            const Witness& witness, const Corpus& corpus,
                            const TestConfig& cfg = {}) {
  Env env;
  for (const auto& [name, value] : witness) env[name] = value;
  Evaluator ev(corpus, EvalConfig{cfg.maxRecursionDepth, 5'000'000});
  try {
    if (!ev.eval(preconditions, env).truthy()) return false;
    return !ev.eval(conclusion, env).truthy();
  } catch (const Error&) {
    return false;
  }
}

// Test a conjecture by random sampling. See the header comment for the
// sampling discipline; the verdict encodes every outcome.
inline TestVerdict testConjecture(const Term& preconditions,
                                  const Term& conclusion, const Corpus& corpus,
                                  const TestConfig& cfg = {}) {
  cfg.validate();

  // Free variables, preconditions first, in first-occurrence order; this is
  // also the witness display order.
  std::vector<Symbol> vars = varsInOrder(preconditions);
  for (const Symbol& v : varsInOrder(conclusion))
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      vars.push_back(v);

  // Precondition slice per variable: the conjuncts mentioning only it.
  std::vector<Term> conjuncts;
  detail::flattenConjuncts(preconditions, conjuncts);
  std::vector<Term> slices;
  for (const Symbol& v : vars) {
    std::vector<Term> mine;
    for (const Term& c : conjuncts) {
      if (c.kind == TermKind::True) continue;
      const std::set<Symbol> fv = freeVars(c);
      if (fv.size() == 1 && *fv.begin() == v) mine.push_back(c);
    }
    slices.push_back(detail::makeConjunction(std::move(mine)));
  }

  Evaluator ev(corpus, EvalConfig{cfg.maxRecursionDepth, 5'000'000});
  int satisfying = 0;
  int trapped = 0;
  for (int s = 0; s < cfg.samples; ++s) {
    Witness sample;
    bool drawn = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      Rng stream(Rng::mix(Rng::mix(cfg.seed, static_cast<std::uint64_t>(s)),
                          static_cast<std::uint64_t>(i)));
      try {
        sample.emplace_back(vars[i], generateValue(slices[i], cfg, stream));
      } catch (const UnsatisfiableError&) {
        drawn = false;
        break;
      }
    }
    if (!drawn) continue;
    Env env;
    for (const auto& [name, value] : sample) env[name] = value;
    try {
      if (!ev.eval(preconditions, env).truthy()) continue;
    } catch (const Error&) {
      ++trapped;
      continue;
    }
    Value concl;
    try {
      concl = ev.eval(conclusion, env);
    } catch (const Error&) {
      ++trapped;
      continue;
    }
    if (!concl.truthy()) return TestVerdict::falsified(std::move(sample));
    ++satisfying;
  }
  if (satisfying >= cfg.minSatisfying) return TestVerdict::survived(satisfying);
  return TestVerdict::inconclusive(trapped == cfg.samples
                                       ? InconclusiveReason::AllEvalsTrapped
                                       : InconclusiveReason::TooFewSatisfying);
}

}  // namespace lemmamill
