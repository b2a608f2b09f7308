#pragma once

// Runtime values and the term evaluator. The value universe is exactly what
// the corpus language can construct: 64-bit integers, nil, t, symbols, and
// cons pairs. Semantics follow the completion conventions of the source
// logic: car/cdr of a non-cons is nil, non-numbers coerce to 0 in
// arithmetic, and the recognizers are total.
//
// Arithmetic wraps modulo 2^64 (done in unsigned space, so it is fully
// defined behavior); corpus-scale values sit far below the edge.
//
// The evaluator is iterative over tail positions (if branches and calls in
// tail position), so deep tail recursion costs no stack. Two budgets guard
// runaway evaluation: maxRecursionDepth bounds nested non-tail evaluation,
// and a fixed total-step budget catches infinite tail loops.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lemmamill/corpus.hpp"
#include "lemmamill/errors.hpp"
#include "lemmamill/macro.hpp"
#include "lemmamill/term.hpp"

namespace lemmamill {

struct Value {
  enum class Kind { Int, Nil, True, Sym, Cons };
  Kind kind = Kind::Nil;
  std::int64_t i = 0;
  Symbol sym;
  std::shared_ptr<const std::pair<Value, Value>> cell;

  static Value integer(std::int64_t n) {
    Value v;
    v.kind = Kind::Int;
    v.i = n;
    return v;
  }
  static Value nil() { return Value{}; }
  static Value truth() {
    Value v;
    v.kind = Kind::True;
    return v;
  }
  static Value boolean(bool b) { return b ? truth() : nil(); }
  static Value symbol(Symbol s) {
    Value v;
    v.kind = Kind::Sym;
    v.sym = std::move(s);
    return v;
  }
  static Value cons(Value a, Value b) {
    Value v;
    v.kind = Kind::Cons;
    v.cell = std::make_shared<const std::pair<Value, Value>>(std::move(a), std::move(b));
    return v;
  }

  bool truthy() const { return kind != Kind::Nil; }

  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Int: return i == o.i;
      case Kind::Nil:
      case Kind::True: return true;
      case Kind::Sym: return sym == o.sym;
      case Kind::Cons:
        return cell->first == o.cell->first && cell->second == o.cell->second;
    }
    return false;
  }

  // List notation with a dotted tail when the chain does not end in nil.
  std::string print() const {
    switch (kind) {
      case Kind::Int: return std::to_string(i);
      case Kind::Nil: return "nil";
      case Kind::True: return "t";
      case Kind::Sym: return sym.display();
      case Kind::Cons: {
        std::string out = "(";
        const Value* cur = this;
        bool first = true;
        while (cur->kind == Kind::Cons) {
          if (!first) out += " ";
          out += cur->cell->first.print();
          cur = &cur->cell->second;
          first = false;
        }
        if (cur->kind != Kind::Nil) out += " . " + cur->print();
        return out + ")";
      }
    }
    return "";
  }
};

using Env = std::map<Symbol, Value>;

struct EvalConfig {
  long long maxRecursionDepth = 5000;  // nested non-tail evaluations
  long long maxSteps = 5'000'000;      // total function unfolds per eval
};

namespace detail {

inline std::int64_t wrapAdd(std::int64_t a, std::int64_t b) {
  return std::int64_t(std::uint64_t(a) + std::uint64_t(b));
}
inline std::int64_t wrapMul(std::int64_t a, std::int64_t b) {
  return std::int64_t(std::uint64_t(a) * std::uint64_t(b));
}
inline std::int64_t wrapNeg(std::int64_t a) {
  return std::int64_t(~std::uint64_t(a) + 1);
}
// Non-numbers coerce to 0 inside arithmetic.
inline std::int64_t fixNum(const Value& v) {
  return v.kind == Value::Kind::Int ? v.i : 0;
}

}  // namespace detail

class Evaluator {
 public:
  Evaluator(const Corpus& corpus, EvalConfig cfg = {})
      : corpus_(corpus), cfg_(cfg) {}

  // Evaluates a term (surface or core; macros are expanded here) under an
  // environment binding every free variable.
  Value eval(const Term& t, const Env& env) {
    steps_ = 0;
    return evalCore(expandMacros(t), env, 0);
  }

  // For callers that know the term is already in core form.
  Value evalExpanded(const Term& t, const Env& env) {
    steps_ = 0;
    return evalCore(t, env, 0);
  }

 private:
  const Corpus& corpus_;
  EvalConfig cfg_;
  long long steps_ = 0;

  Value arg(const Term& t, const Env& env, long long depth) {
    if (depth + 1 > cfg_.maxRecursionDepth)
      throw DepthExceededError("recursion depth limit (" +
                               std::to_string(cfg_.maxRecursionDepth) + ") exceeded");
    return evalCore(t, env, depth + 1);
  }

  Value evalCore(Term term, Env env, long long depth) {
    while (true) {
      switch (term.kind) {
        case TermKind::Num: return Value::integer(term.num);
        case TermKind::Nil: return Value::nil();
        case TermKind::True: return Value::truth();
        case TermKind::Var: {
          auto it = env.find(term.sym);
          if (it == env.end())
            throw Error("UnboundVariable", "unbound variable " + term.sym.display());
          return it->second;
        }
        case TermKind::App: break;
      }

      const std::string& h = term.sym.text;
      if (h == "IF") {
        Value c = arg(term.args[0], env, depth);
        Term next = c.truthy() ? term.args[1] : term.args[2];
        term = std::move(next);
        continue;  // tail position
      }
      if (isCoreFunction(term.sym)) {
        std::vector<Value> vs;
        vs.reserve(term.args.size());
        for (const Term& a : term.args) vs.push_back(arg(a, env, depth));
        return applyCore(h, vs);
      }

      const Event* callee = corpus_.find(term.sym);
      if (!callee || callee->kind != EventKind::Definition)
        throw UnknownFunctionError("call to unknown function " + term.sym.display());
      if (callee->formals.size() != term.args.size())
        throw ArityError(term.sym.display() + " takes " +
                         std::to_string(callee->formals.size()) + " arguments");
      if (++steps_ > cfg_.maxSteps)
        throw DepthExceededError("evaluation step budget exceeded");
      Env next;
      for (std::size_t i = 0; i < term.args.size(); ++i)
        next[callee->formals[i]] = arg(term.args[i], env, depth);
      env = std::move(next);
      term = callee->body;  // tail call: iterate
    }
  }

  static Value applyCore(const std::string& h, const std::vector<Value>& v) {
    using K = Value::Kind;
    if (h == "EQUAL") return Value::boolean(v[0] == v[1]);
    if (h == "BINARY-+")
      return Value::integer(detail::wrapAdd(detail::fixNum(v[0]), detail::fixNum(v[1])));
    if (h == "BINARY-*")
      return Value::integer(detail::wrapMul(detail::fixNum(v[0]), detail::fixNum(v[1])));
    if (h == "UNARY--") return Value::integer(detail::wrapNeg(detail::fixNum(v[0])));
    if (h == "<") return Value::boolean(detail::fixNum(v[0]) < detail::fixNum(v[1]));
    if (h == "NOT") return Value::boolean(!v[0].truthy());
    if (h == "IMPLIES") return Value::boolean(!v[0].truthy() || v[1].truthy());
    if (h == "ZP")
      return Value::boolean(v[0].kind != K::Int || v[0].i <= 0);
    if (h == "NATP") return Value::boolean(v[0].kind == K::Int && v[0].i >= 0);
    if (h == "INTEGERP") return Value::boolean(v[0].kind == K::Int);
    if (h == "ACL2-NUMBERP") return Value::boolean(v[0].kind == K::Int);
    if (h == "CONSP") return Value::boolean(v[0].kind == K::Cons);
    if (h == "SYMBOLP")
      return Value::boolean(v[0].kind == K::Sym || v[0].kind == K::Nil ||
                            v[0].kind == K::True);
    if (h == "ENDP") return Value::boolean(v[0].kind != K::Cons);
    if (h == "CAR")
      return v[0].kind == K::Cons ? v[0].cell->first : Value::nil();
    if (h == "CDR")
      return v[0].kind == K::Cons ? v[0].cell->second : Value::nil();
    if (h == "CONS") return Value::cons(v[0], v[1]);
    throw UnknownFunctionError("no evaluator for core function " + h);
  }
};

}  // namespace lemmamill
