#include <catch2/catch_amalgamated.hpp>

#include "lemmamill/corpus.hpp"

using namespace lemmamill;

static Corpus fromText(const std::string& text) {
  return parseCorpusText({{"book", text}});
}

TEST_CASE("tail recursion corpus parses into 16 ordered events") {
  Corpus c = parseCorpus({std::string(LM_DATA_DIR) + "/tail_recursion.lisp"});
  REQUIRE(c.events.size() == 16);
  CHECK(c.warnings.empty());
  CHECK(c.events[0].name == Symbol("mult"));
  CHECK(c.events[0].kind == EventKind::Definition);
  CHECK(c.events[3].name == Symbol("mult-mult-tail"));
  CHECK(c.events[3].kind == EventKind::Theorem);
  CHECK(c.events[15].name == Symbol("fib-fib-tail"));
  CHECK(c.definitionsInOrder().size() == 12);
  CHECK(c.theoremsInOrder().size() == 4);
  for (std::size_t i = 0; i < c.events.size(); ++i)
    CHECK(c.events[i].ordinal == i);

  const Event& fact = c.at(Symbol("fact"));
  REQUIRE(fact.formals.size() == 1);
  CHECK(fact.formals[0] == Symbol("n"));
  CHECK(printCanonical(fact.body) ==
        "(if (zp n) 1 (binary-* n (fact (binary-+ n -1))))");
  CHECK(printCanonical(fact.surfaceBody) ==
        "(if (zp n) 1 (* n (fact (- n 1))))");

  // Call graph and recursion structure.
  CHECK(c.callGraph.at(Symbol("fact")).count(Symbol("fact")) == 1);
  CHECK(c.callGraph.at(Symbol("mult-tail")).count(Symbol("helper-mult")) == 1);
  CHECK(c.callGraph.at(Symbol("fib-fib-tail")).count(Symbol("fib")) == 1);
  CHECK(c.sameScc(Symbol("fact"), Symbol("fact")));
  CHECK_FALSE(c.sameScc(Symbol("fact"), Symbol("fib")));

  auto closure = c.dependencyClosure(Symbol("fib-fib-tail"));
  CHECK(closure == std::set<Symbol>{Symbol("fib"), Symbol("fib-tail"),
                                    Symbol("helper-fib")});
}

TEST_CASE("lemma corpus has the two extra accumulator theorems") {
  Corpus c =
      parseCorpus({std::string(LM_DATA_DIR) + "/tail_recursion_lemmas.lisp"});
  REQUIRE(c.events.size() == 18);
  CHECK(c.at(Symbol("mult-helper-mult")).kind == EventKind::Theorem);
  CHECK(c.at(Symbol("fact-helper-fact")).kind == EventKind::Theorem);
  CHECK(printCanonical(c.at(Symbol("mult-helper-mult")).body) ==
        "(implies (if (natp n) (if (natp m) (natp a) nil) nil) "
        "(equal (helper-mult n m a) (binary-+ a (mult n m))))");
}

TEST_CASE("alpha-equivalent redefinition deduplicates") {
  Corpus c = fromText(
      "(defun double (x) (+ x x))"
      "(defun double (y) (+ y y))");
  CHECK(c.events.size() == 1);
}

TEST_CASE("differing redefinition gets a disambiguated name") {
  Corpus c = fromText(
      "(defun double (x) (+ x x))"
      "(defun double (x) (* x 2))"
      "(defun quad (x) (double (double x)))");
  REQUIRE(c.events.size() == 3);
  CHECK(c.events[1].name == Symbol("double#2"));
  // References resolve to the original bearer of the plain name.
  CHECK(c.callGraph.at(Symbol("quad")).count(Symbol("double")) == 1);
  CHECK(printCanonical(c.at(Symbol("double#2")).body) == "(binary-* x 2)");
}

TEST_CASE("unknown top-level forms are skipped with warnings") {
  Corpus c = fromText(
      "(in-package \"ACL2\")\n"
      "(include-book \"arithmetic/top\")\n"
      "(defun id (x) x)\n"
      "atom-at-top-level\n");
  CHECK(c.events.size() == 1);
  REQUIRE(c.warnings.size() == 3);
  CHECK(c.warnings[0].find("in-package") != std::string::npos);
  CHECK(c.warnings[0].find("book:1") != std::string::npos);
}

TEST_CASE("declared guards are kept in surface form") {
  Corpus c = fromText(
      "(defun sum-sq (x y)"
      "  (declare (xargs :guard (and (integerp x) (integerp y)) :measure x))"
      "  (+ (* x x) (* y y)))");
  const Event& e = c.events[0];
  REQUIRE(e.declaredGuard.has_value());
  CHECK(printCanonical(*e.declaredGuard) ==
        "(and (integerp x) (integerp y))");
  CHECK(printCanonical(e.body) ==
        "(binary-+ (binary-* x x) (binary-* y y))");
}

TEST_CASE("theorem rule-classes tail is ignored") {
  Corpus c = fromText(
      "(defun f (x) x)"
      "(defthm f-id (equal (f x) x) :rule-classes ((:rewrite)))");
  CHECK(c.events.size() == 2);
  CHECK(printCanonical(c.at(Symbol("f-id")).body) == "(equal (f x) x)");
}

TEST_CASE("dangling references are rejected after the full pass") {
  CHECK_THROWS_AS(fromText("(defun f (x) (g x))"), DanglingReferenceError);
  CHECK_THROWS_AS(fromText("(defun f (x) x)(defthm bad (equal (h x) x))"),
                  DanglingReferenceError);
  // Forward references within the corpus are fine at parse time.
  Corpus c = fromText("(defun f (x) (g x))(defun g (x) x)");
  CHECK(c.events.size() == 2);
}

TEST_CASE("arity violations are rejected") {
  CHECK_THROWS_AS(fromText("(defun f (x y) x)(defun h (x) (f x))"), ArityError);
  CHECK_THROWS_AS(fromText("(defun f (x) (cons x))"), ArityError);
  CHECK_THROWS_AS(fromText("(defun f (x) (if x 1))"), ArityError);
}

TEST_CASE("mutual recursion lands in one component") {
  Corpus c = fromText(
      "(defun is-even (n) (if (zp n) t (is-odd (- n 1))))"
      "(defun is-odd (n) (if (zp n) nil (is-even (- n 1))))"
      "(defun lone (n) n)");
  CHECK(c.sameScc(Symbol("is-even"), Symbol("is-odd")));
  CHECK_FALSE(c.sameScc(Symbol("is-even"), Symbol("lone")));
  auto members = c.sccMembers(Symbol("is-odd"));
  CHECK(members == std::set<Symbol>{Symbol("is-even"), Symbol("is-odd")});
}

TEST_CASE("malformed events are syntax errors") {
  CHECK_THROWS_AS(fromText("(defun f (x))"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defun f (x x) x)"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defun f (nil) 1)"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defun f ((a)) 1)"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defun f (x) \"doc\" x)"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defthm only-name)"), SyntaxError);
  CHECK_THROWS_AS(fromText("(defun f (x) y)"), SyntaxError);  // free var
}

TEST_CASE("missing files surface as errors") {
  CHECK_THROWS_AS(parseCorpus({"/no/such/book.lisp"}), Error);
}
