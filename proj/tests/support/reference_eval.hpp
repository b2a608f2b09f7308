#pragma once

// A deliberately different evaluator used to cross-check the library one:
// textbook substitution semantics. Function calls substitute evaluated
// arguments (as literal terms) into the body and recurse; there are no
// environments and no tail-call handling. Closed core terms only. Written
// against the language definition, not against eval.hpp, so the two
// implementations share no structure beyond the semantics.

#include <cstdint>
#include <map>
#include <stdexcept>

#include "lemmamill/corpus.hpp"
#include "lemmamill/eval.hpp"
#include "lemmamill/term.hpp"

namespace refeval {

using lemmamill::Corpus;
using lemmamill::EventKind;
using lemmamill::Symbol;
using lemmamill::Term;
using lemmamill::TermKind;
using lemmamill::Value;

struct RefBudgetExhausted : std::runtime_error {
  RefBudgetExhausted() : std::runtime_error("reference evaluator budget exhausted") {}
};

inline Term valueToTerm(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return Term::integer(v.i);
    case Value::Kind::Nil: return Term::nil();
    case Value::Kind::True: return Term::truth();
    case Value::Kind::Cons:
      return Term::app(Symbol("cons"), {valueToTerm(v.cell->first),
                                        valueToTerm(v.cell->second)});
    case Value::Kind::Sym:
      throw std::logic_error("symbol values cannot arise from closed terms");
  }
  throw std::logic_error("bad value");
}

inline std::int64_t refFix(const Value& v) {
  return v.kind == Value::Kind::Int ? v.i : 0;
}

inline Value refEval(const Term& t, const Corpus& corpus, long long& budget) {
  if (budget-- <= 0) throw RefBudgetExhausted();
  switch (t.kind) {
    case TermKind::Num: return Value::integer(t.num);
    case TermKind::Nil: return Value::nil();
    case TermKind::True: return Value::truth();
    case TermKind::Var:
      throw std::logic_error("open term in reference evaluator");
    case TermKind::App: break;
  }

  const std::string& h = t.sym.text;
  if (h == "IF") {
    Value c = refEval(t.args[0], corpus, budget);
    return refEval(t.args[c.truthy() ? 1 : 2], corpus, budget);
  }

  std::vector<Value> v;
  for (const Term& a : t.args) v.push_back(refEval(a, corpus, budget));

  using K = Value::Kind;
  if (h == "EQUAL") return Value::boolean(v[0] == v[1]);
  if (h == "BINARY-+")
    return Value::integer(std::int64_t(std::uint64_t(refFix(v[0])) +
                                       std::uint64_t(refFix(v[1]))));
  if (h == "BINARY-*")
    return Value::integer(std::int64_t(std::uint64_t(refFix(v[0])) *
                                       std::uint64_t(refFix(v[1]))));
  if (h == "UNARY--")
    return Value::integer(std::int64_t(0 - std::uint64_t(refFix(v[0]))));
  if (h == "<") return Value::boolean(refFix(v[0]) < refFix(v[1]));
  if (h == "NOT") return Value::boolean(v[0].kind == K::Nil);
  if (h == "IMPLIES")
    return Value::boolean(v[0].kind == K::Nil || v[1].kind != K::Nil);
  if (h == "ZP") return Value::boolean(!(v[0].kind == K::Int && v[0].i > 0));
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

  const lemmamill::Event* e = corpus.find(t.sym);
  if (!e || e->kind != EventKind::Definition)
    throw std::logic_error("unknown function in reference evaluator: " +
                           t.sym.display());
  std::map<Symbol, Term> sub;
  for (std::size_t i = 0; i < e->formals.size(); ++i)
    sub[e->formals[i]] = valueToTerm(v[i]);
  return refEval(substitute(e->body, sub), corpus, budget);
}

inline Value refEvalClosed(const Term& t, const Corpus& corpus,
                           long long budget = 2'000'000) {
  return refEval(t, corpus, budget);
}

}  // namespace refeval
