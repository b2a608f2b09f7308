#include <catch2/catch_amalgamated.hpp>

#include "lemmamill/sexpr.hpp"

using namespace lemmamill;

TEST_CASE("reader handles atoms, lists and nesting") {
  auto forms = parseSExprs("(defun f (x) (g x 12 -3))", "book");
  REQUIRE(forms.size() == 1);
  const SExpr& f = forms[0];
  REQUIRE(f.kind == SExpr::Kind::List);
  REQUIRE(f.items.size() == 4);
  CHECK(f.items[0].isSym("defun"));
  CHECK(f.items[1].isSym("f"));
  const SExpr& call = f.items[3];
  REQUIRE(call.items.size() == 4);
  CHECK(call.items[2].kind == SExpr::Kind::Int);
  CHECK(call.items[2].num == 12);
  CHECK(call.items[3].num == -3);
}

TEST_CASE("reader is case-insensitive on symbols") {
  auto forms = parseSExprs("(DeFuN Fact (N) n)", "book");
  CHECK(forms[0].items[0].isSym("defun"));
  CHECK(forms[0].items[1].isSym("FACT"));
  CHECK(forms[0].items[3].sym == "N");
}

TEST_CASE("reader skips line and nested block comments") {
  auto forms = parseSExprs(
      "; leading comment\n"
      "(a #| block #| nested |# still |# b) ; trailing\n"
      "#| whole\nform |# (c)",
      "book");
  REQUIRE(forms.size() == 2);
  REQUIRE(forms[0].items.size() == 2);
  CHECK(forms[0].items[1].isSym("b"));
  CHECK(forms[1].items[0].isSym("c"));
}

TEST_CASE("reader tracks positions") {
  auto forms = parseSExprs("\n  (f\n    (g))", "book");
  REQUIRE(forms.size() == 1);
  CHECK(forms[0].line == 2);
  CHECK(forms[0].col == 3);
  CHECK(forms[0].items[1].line == 3);
  CHECK(forms[0].items[1].col == 5);
}

TEST_CASE("1+ and 1- lex as symbols, bare signs too") {
  auto forms = parseSExprs("(1+ x) (1- y) (+ - *)", "book");
  CHECK(forms[0].items[0].isSym("1+"));
  CHECK(forms[1].items[0].isSym("1-"));
  CHECK(forms[2].items[0].isSym("+"));
  CHECK(forms[2].items[1].isSym("-"));
}

TEST_CASE("malformed numbers are rejected with positions") {
  CHECK_THROWS_AS(parseSExprs("(f 1/2)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f 1.5)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f 1e3)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f .5)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f 99999999999999999999)", "book"), SyntaxError);
  try {
    parseSExprs("(f\n  1/2)", "thebook");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.file == "thebook");
    CHECK(e.line == 2);
    CHECK(e.column == 3);
  }
}

TEST_CASE("quote, characters and dotted pairs are rejected") {
  CHECK_THROWS_AS(parseSExprs("'(a b)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f `x)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(f #\\a)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("(a . b)", "book"), SyntaxError);
}

TEST_CASE("unbalanced input is rejected") {
  CHECK_THROWS_AS(parseSExprs("(f (g x)", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("f) x", "book"), SyntaxError);
  CHECK_THROWS_AS(parseSExprs("#| open", "book"), SyntaxError);
}

TEST_CASE("strings survive reading but not term conversion") {
  auto forms = parseSExprs("(include-book \"arith/top\")", "book");
  REQUIRE(forms[0].items.size() == 2);
  CHECK(forms[0].items[1].kind == SExpr::Kind::Str);
  CHECK(forms[0].items[1].str == "arith/top");
  CHECK_THROWS_AS(toTerm(forms[0].items[1]), SyntaxError);
}

TEST_CASE("toTerm maps atoms and applications") {
  Term t = parseTermString("(if (zp n) nil (cons t 3))");
  REQUIRE(t.kind == TermKind::App);
  CHECK(t.sym == Symbol("if"));
  CHECK(t.args[1].kind == TermKind::Nil);
  CHECK(t.args[2].args[0].kind == TermKind::True);
  CHECK(t.args[2].args[1].num == 3);
  CHECK(t.args[0].args[0].kind == TermKind::Var);

  CHECK(parseTermString("()").kind == TermKind::Nil);
  CHECK_THROWS_AS(parseTermString("((f x) y)"), SyntaxError);
  CHECK_THROWS_AS(parseTermString("(nil x)"), SyntaxError);
  CHECK_THROWS_AS(parseTermString(""), SyntaxError);
  CHECK_THROWS_AS(parseTermString("a b"), SyntaxError);
}

TEST_CASE("internal disambiguated names round-trip") {
  Term t = parseTermString("(fact#2 n)");
  CHECK(t.sym == Symbol("fact#2"));
  CHECK(printCanonical(t) == "(fact#2 n)");
  Term again = parseTermString(printCanonical(t));
  CHECK(again == t);
}
