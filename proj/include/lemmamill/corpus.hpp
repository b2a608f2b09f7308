#pragma once

// Corpus ingestion: reads .lisp books of defun/defthm events into an ordered
// event list with macro-expanded bodies, a call graph, and the strongly
// connected components of the definition call graph (mutual recursion).
//
// Conventions, documented here because they shape everything downstream:
//  - Events keep their ingestion order; all later processing is order-aware.
//  - A later defun or defthm reusing a seen name is dropped when its body is
//    alpha-equivalent to the existing one, and otherwise registered under the
//    internal disambiguated name name#k. References always resolve to the
//    original bearer of the plain name.
//  - Unknown top-level forms are skipped with a warning, never an error.
//  - Declared guards are kept in surface syntax, unexpanded.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lemmamill/errors.hpp"
#include "lemmamill/macro.hpp"
#include "lemmamill/sexpr.hpp"
#include "lemmamill/symbol.hpp"
#include "lemmamill/term.hpp"

namespace lemmamill {

enum class EventKind { Definition, Theorem };

struct Event {
  EventKind kind = EventKind::Definition;
  Symbol name;
  std::vector<Symbol> formals;        // definitions only
  std::optional<Term> declaredGuard;  // surface form, as written
  Term body;                          // macro-expanded body or statement
  Term surfaceBody;                   // as written, before expansion
  std::string sourceBook;
  std::size_t ordinal = 0;
};

struct Corpus {
  std::vector<Event> events;
  std::map<Symbol, std::size_t> byName;
  std::map<Symbol, std::set<Symbol>> callGraph;  // event name -> user callees
  std::map<Symbol, int> sccId;                   // definitions only
  std::vector<std::string> warnings;

  const Event* find(const Symbol& name) const {
    auto it = byName.find(name);
    return it == byName.end() ? nullptr : &events[it->second];
  }
  const Event& at(const Symbol& name) const {
    const Event* e = find(name);
    if (!e) throw UnknownNameError("no event named " + name.display());
    return *e;
  }
  bool isDefinition(const Symbol& name) const {
    const Event* e = find(name);
    return e && e->kind == EventKind::Definition;
  }
  bool sameScc(const Symbol& a, const Symbol& b) const {
    auto ia = sccId.find(a), ib = sccId.find(b);
    return ia != sccId.end() && ib != sccId.end() && ia->second == ib->second;
  }
  std::vector<Symbol> definitionsInOrder() const {
    std::vector<Symbol> out;
    for (const Event& e : events)
      if (e.kind == EventKind::Definition) out.push_back(e.name);
    return out;
  }
  std::vector<Symbol> theoremsInOrder() const {
    std::vector<Symbol> out;
    for (const Event& e : events)
      if (e.kind == EventKind::Theorem) out.push_back(e.name);
    return out;
  }
  // Mutual-recursion group of a definition, always including itself.
  std::set<Symbol> sccMembers(const Symbol& name) const {
    std::set<Symbol> out{name};
    auto it = sccId.find(name);
    if (it == sccId.end()) return out;
    for (const auto& [other, id] : sccId)
      if (id == it->second) out.insert(other);
    return out;
  }
  // All definitions reachable from the event's callees (closed under calls).
  std::set<Symbol> dependencyClosure(const Symbol& root) const {
    std::set<Symbol> seen;
    std::vector<Symbol> queue;
    auto push = [&](const Symbol& s) {
      if (isDefinition(s) && seen.insert(s).second) queue.push_back(s);
    };
    auto it = callGraph.find(root);
    if (it != callGraph.end())
      for (const Symbol& s : it->second) push(s);
    while (!queue.empty()) {
      Symbol cur = queue.back();
      queue.pop_back();
      auto jt = callGraph.find(cur);
      if (jt != callGraph.end())
        for (const Symbol& s : jt->second) push(s);
    }
    return seen;
  }
};

namespace detail {

// Key for deduplicating redefinitions: formals and body (or the statement)
// under canonical variable renaming.
inline Term dedupKey(const Event& e) {
  Term formals = Term::app(Symbol("fm"));
  for (const Symbol& f : e.formals) formals.args.push_back(Term::var(f));
  return alphaCanonical(Term::app(Symbol("ev"), {formals, e.body}));
}

inline Symbol checkFormal(const SExpr& s) {
  if (s.kind != SExpr::Kind::Sym || s.sym == "NIL" || s.sym == "T")
    throw SyntaxError("formal parameters must be plain symbols", s.file, s.line, s.col);
  Symbol sym;
  sym.text = s.sym;
  return sym;
}

// Pulls the :guard expression out of a (declare (xargs ...)) form, if any.
inline std::optional<Term> guardOfDeclare(const SExpr& decl) {
  for (std::size_t i = 1; i < decl.items.size(); ++i) {
    const SExpr& part = decl.items[i];
    if (part.kind != SExpr::Kind::List || part.items.empty() ||
        !part.items[0].isSym("xargs"))
      continue;
    for (std::size_t j = 1; j + 1 < part.items.size(); j += 2) {
      if (part.items[j].isSym(":guard")) return toTerm(part.items[j + 1]);
    }
  }
  return std::nullopt;
}

inline Event buildDefun(const SExpr& form, const std::string& book) {
  if (form.items.size() < 4)
    throw SyntaxError("defun needs a name, a formals list and a body",
                      form.file, form.line, form.col);
  const SExpr& nameS = form.items[1];
  if (nameS.kind != SExpr::Kind::Sym)
    throw SyntaxError("defun name must be a symbol", nameS.file, nameS.line, nameS.col);
  const SExpr& formalsS = form.items[2];
  if (formalsS.kind != SExpr::Kind::List)
    throw SyntaxError("defun formals must be a list", formalsS.file,
                      formalsS.line, formalsS.col);

  Event e;
  e.kind = EventKind::Definition;
  e.name.text = nameS.sym;
  e.sourceBook = book;
  for (const SExpr& f : formalsS.items) e.formals.push_back(checkFormal(f));
  for (std::size_t i = 0; i < e.formals.size(); ++i)
    for (std::size_t j = i + 1; j < e.formals.size(); ++j)
      if (e.formals[i] == e.formals[j])
        throw SyntaxError("duplicate formal " + e.formals[i].display() +
                              " in defun " + e.name.display(),
                          form.file, form.line, form.col);

  // Zero or more (declare ...) forms precede the body, which is last.
  for (std::size_t i = 3; i + 1 < form.items.size(); ++i) {
    const SExpr& mid = form.items[i];
    if (mid.kind == SExpr::Kind::List && !mid.items.empty() &&
        mid.items[0].isSym("declare")) {
      if (auto g = guardOfDeclare(mid)) {
        if (e.declaredGuard)
          throw SyntaxError("multiple :guard declarations in defun " + e.name.display(),
                            mid.file, mid.line, mid.col);
        e.declaredGuard = g;
      }
      continue;
    }
    throw SyntaxError("unexpected form before defun body", mid.file, mid.line, mid.col);
  }
  e.surfaceBody = toTerm(form.items.back());
  e.body = expandMacros(e.surfaceBody);
  return e;
}

inline Event buildDefthm(const SExpr& form, const std::string& book) {
  if (form.items.size() < 3)
    throw SyntaxError("defthm needs a name and a statement", form.file,
                      form.line, form.col);
  const SExpr& nameS = form.items[1];
  if (nameS.kind != SExpr::Kind::Sym)
    throw SyntaxError("defthm name must be a symbol", nameS.file, nameS.line, nameS.col);
  // Trailing keyword arguments (:rule-classes, :hints, ...) are ignored.
  Event e;
  e.kind = EventKind::Theorem;
  e.name.text = nameS.sym;
  e.sourceBook = book;
  e.surfaceBody = toTerm(form.items[2]);
  e.body = expandMacros(e.surfaceBody);
  return e;
}

inline void addEvent(Corpus& corpus, Event e) {
  auto it = corpus.byName.find(e.name);
  if (it != corpus.byName.end()) {
    const Event& old = corpus.events[it->second];
    if (old.kind == e.kind && dedupKey(old) == dedupKey(e)) return;  // duplicate
    for (int k = 2;; ++k) {
      Symbol candidate(e.name.display() + "#" + std::to_string(k));
      if (!corpus.byName.count(candidate)) {
        e.name = candidate;
        break;
      }
    }
  }
  e.ordinal = corpus.events.size();
  corpus.byName[e.name] = corpus.events.size();
  corpus.events.push_back(std::move(e));
}

// Tarjan's strongly connected components over the definition call graph.
struct SccState {
  const std::map<Symbol, std::set<Symbol>>& graph;
  std::map<Symbol, int> index, low;
  std::map<Symbol, bool> onStack;
  std::vector<Symbol> stack;
  std::map<Symbol, int>& out;
  int next = 0, comp = 0;

  void visit(const Symbol& v) {
    index[v] = low[v] = next++;
    stack.push_back(v);
    onStack[v] = true;
    auto it = graph.find(v);
    if (it != graph.end()) {
      for (const Symbol& w : it->second) {
        if (!graph.count(w)) continue;
        if (!index.count(w)) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (onStack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        Symbol w = stack.back();
        stack.pop_back();
        onStack[w] = false;
        out[w] = comp;
        if (w == v) break;
      }
      ++comp;
    }
  }
};

inline void finalizeCorpus(Corpus& corpus) {
  // Call graph over resolved names; theorems get nodes too.
  std::map<Symbol, std::set<Symbol>> defGraph;
  for (const Event& e : corpus.events) {
    std::set<Symbol>& callees = corpus.callGraph[e.name];
    forEachSubterm(e.body, [&](const Term& t, int) {
      if (t.kind != TermKind::App) return;
      if (isCoreFunction(t.sym)) {
        if (t.args.size() != *coreArity(t.sym))
          throw ArityError(t.sym.display() + " takes " +
                           std::to_string(*coreArity(t.sym)) + " arguments, got " +
                           std::to_string(t.args.size()) + " in " + e.name.display());
        return;
      }
      const Event* callee = corpus.find(t.sym);
      if (!callee || callee->kind != EventKind::Definition)
        throw DanglingReferenceError(e.name.display() + " references undefined function " +
                                     t.sym.display());
      if (t.args.size() != callee->formals.size())
        throw ArityError(t.sym.display() + " takes " +
                         std::to_string(callee->formals.size()) + " arguments, got " +
                         std::to_string(t.args.size()) + " in " + e.name.display());
      callees.insert(t.sym);
    });
    if (e.kind == EventKind::Definition) {
      std::set<Symbol> formals(e.formals.begin(), e.formals.end());
      for (const Symbol& v : freeVars(e.body))
        if (!formals.count(v))
          throw SyntaxError("free variable " + v.display() + " in body of defun " +
                            e.name.display());
      defGraph[e.name];  // ensure node
    }
  }
  for (const auto& [name, callees] : corpus.callGraph)
    if (defGraph.count(name))
      for (const Symbol& c : callees)
        if (defGraph.count(c)) defGraph[name].insert(c);

  detail::SccState scc{defGraph, {}, {}, {}, {}, corpus.sccId};
  for (const auto& [name, _] : defGraph)
    if (!scc.index.count(name)) scc.visit(name);
}

inline void ingestForms(Corpus& corpus, const std::vector<SExpr>& forms,
                        const std::string& book) {
  for (const SExpr& form : forms) {
    if (form.kind == SExpr::Kind::List && !form.items.empty() &&
        form.items[0].kind == SExpr::Kind::Sym) {
      const std::string& head = form.items[0].sym;
      if (head == "DEFUN") {
        addEvent(corpus, buildDefun(form, book));
        continue;
      }
      if (head == "DEFTHM") {
        addEvent(corpus, buildDefthm(form, book));
        continue;
      }
      corpus.warnings.push_back(book + ":" + std::to_string(form.line) +
                                ": skipped " + Symbol(head).display() + " form");
      continue;
    }
    corpus.warnings.push_back(book + ":" + std::to_string(form.line) +
                              ": skipped top-level form");
  }
}

}  // namespace detail

// Parses books given as in-memory strings (tests, CLI-adjacent tooling).
inline Corpus parseCorpusText(
    const std::vector<std::pair<std::string, std::string>>& books) {
  Corpus corpus;
  for (const auto& [name, text] : books)
    detail::ingestForms(corpus, parseSExprs(text, name), name);
  detail::finalizeCorpus(corpus);
  return corpus;
}

inline Corpus parseCorpus(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::string>> books;
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    books.emplace_back(path, buf.str());
  }
  return parseCorpusText(books);
}

}  // namespace lemmamill
