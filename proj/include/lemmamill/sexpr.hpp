#pragma once

// S-expression reader: text to raw SExpr trees with source positions, and
// conversion of expression SExprs to surface terms. The accepted syntax is
// deliberately small: symbols, 64-bit integers, strings (tolerated only
// inside top-level forms the corpus loader skips), lists, line comments and
// nested block comments. Quote, backquote, character literals, rationals and
// floats are rejected with a SyntaxError that points at the offender.

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

#include "lemmamill/errors.hpp"
#include "lemmamill/term.hpp"

namespace lemmamill {

struct SExpr {
  enum class Kind { Sym, Int, Str, List };
  Kind kind = Kind::Sym;
  std::string sym;           // Sym: canonical upper-case spelling
  std::int64_t num = 0;      // Int payload
  std::string str;           // Str payload
  std::vector<SExpr> items;  // List payload
  std::string file;
  int line = 1;
  int col = 1;

  bool isSym(const char* name) const {
    return kind == Kind::Sym && sym == Symbol::fold(name);
  }
};

namespace detail {

struct Reader {
  const std::string& text;
  std::string file;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  Reader(const std::string& t, std::string f) : text(t), file(std::move(f)) {}

  [[noreturn]] void fail(const std::string& msg, int ln, int cl) const {
    throw SyntaxError(msg, file, ln, cl);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, line, col); }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char get() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  static bool isSpace(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
  static bool isDelim(char c) {
    return isSpace(c) || c == '(' || c == ')' || c == ';' || c == '"' || c == '\'';
  }

  void skipBlank() {
    while (!eof()) {
      char c = peek();
      if (isSpace(c)) {
        get();
      } else if (c == ';') {
        while (!eof() && peek() != '\n') get();
      } else if (c == '#' && pos + 1 < text.size() && text[pos + 1] == '|') {
        int ln = line, cl = col;
        get();
        get();
        int depth = 1;
        while (depth > 0) {
          if (eof()) fail("unterminated block comment", ln, cl);
          char d = get();
          if (d == '#' && !eof() && peek() == '|') {
            get();
            ++depth;
          } else if (d == '|' && !eof() && peek() == '#') {
            get();
            --depth;
          }
        }
      } else {
        return;
      }
    }
  }

  SExpr readString(int ln, int cl) {
    SExpr s;
    s.kind = SExpr::Kind::Str;
    s.file = file;
    s.line = ln;
    s.col = cl;
    while (true) {
      if (eof()) fail("unterminated string", ln, cl);
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated string", ln, cl);
        s.str.push_back(get());
      } else {
        s.str.push_back(c);
      }
    }
    return s;
  }

  SExpr readAtom(int ln, int cl) {
    std::string raw;
    while (!eof() && !isDelim(peek())) raw.push_back(get());
    SExpr s;
    s.file = file;
    s.line = ln;
    s.col = cl;
    std::size_t digitsFrom = (raw[0] == '+' || raw[0] == '-') ? 1 : 0;
    bool digits = raw.size() > digitsFrom;
    for (std::size_t i = digitsFrom; i < raw.size(); ++i)
      if (raw[i] < '0' || raw[i] > '9') digits = false;
    if (digits) {
      s.kind = SExpr::Kind::Int;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), s.num);
      if (ec != std::errc() || p != raw.data() + raw.size())
        fail("integer out of range: " + raw, ln, cl);
      return s;
    }
    // 1+ and 1- are legitimate symbols; any other token that starts like a
    // number (rationals, floats, exponents) is malformed.
    if (raw != "1+" && raw != "1-") {
      if (raw[0] == '.') fail("dotted pairs and floats are unsupported: " + raw, ln, cl);
      std::size_t first = digitsFrom;
      if (raw.size() > first && raw[first] >= '0' && raw[first] <= '9')
        fail("malformed number: " + raw, ln, cl);
    }
    s.kind = SExpr::Kind::Sym;
    s.sym = Symbol::fold(raw);
    return s;
  }

  SExpr readForm() {
    skipBlank();
    if (eof()) fail("unexpected end of input");
    int ln = line, cl = col;
    char c = peek();
    if (c == '(') {
      get();
      SExpr s;
      s.kind = SExpr::Kind::List;
      s.file = file;
      s.line = ln;
      s.col = cl;
      while (true) {
        skipBlank();
        if (eof()) fail("unterminated list", ln, cl);
        if (peek() == ')') {
          get();
          return s;
        }
        s.items.push_back(readForm());
      }
    }
    if (c == ')') fail("unmatched )");
    if (c == '\'' || c == '`' || c == ',') fail("quote syntax is unsupported");
    if (c == '"') {
      get();
      return readString(ln, cl);
    }
    if (c == '#') {
      if (pos + 1 < text.size() && text[pos + 1] == '\\')
        fail("character literals are unsupported");
      if (pos + 1 >= text.size() || isDelim(text[pos + 1]) || text[pos + 1] == '|')
        fail("unsupported reader macro");
      // A leading # with more atom text is an unsupported reader macro too;
      // # only occurs mid-symbol (disambiguated redefinition names).
      fail("unsupported reader macro");
    }
    return readAtom(ln, cl);
  }
};

}  // namespace detail

// Reads every top-level form in the text.
inline std::vector<SExpr> parseSExprs(const std::string& text, const std::string& file) {
  detail::Reader r(text, file);
  std::vector<SExpr> out;
  while (true) {
    r.skipBlank();
    if (r.eof()) return out;
    out.push_back(r.readForm());
  }
}

// Converts an expression SExpr to a surface term. Heads of applications must
// be symbols; bare symbols other than nil and t are variables; () reads as
// nil; strings are rejected here (the corpus loader skips whole top-level
// forms before conversion, so strings inside skipped forms never arrive).
inline Term toTerm(const SExpr& s) {
  switch (s.kind) {
    case SExpr::Kind::Int:
      return Term::integer(s.num);
    case SExpr::Kind::Str:
      throw SyntaxError("string constants are unsupported in expressions",
                        s.file, s.line, s.col);
    case SExpr::Kind::Sym: {
      if (s.sym == "NIL") return Term::nil();
      if (s.sym == "T") return Term::truth();
      Symbol v;
      v.text = s.sym;
      return Term::var(v);
    }
    case SExpr::Kind::List: {
      if (s.items.empty()) return Term::nil();
      const SExpr& head = s.items[0];
      if (head.kind != SExpr::Kind::Sym)
        throw SyntaxError("application head must be a symbol",
                          head.file, head.line, head.col);
      if (head.sym == "NIL" || head.sym == "T")
        throw SyntaxError("nil and t cannot be applied", head.file, head.line, head.col);
      Symbol h;
      h.text = head.sym;
      Term t = Term::app(h);
      t.args.reserve(s.items.size() - 1);
      for (std::size_t i = 1; i < s.items.size(); ++i)
        t.args.push_back(toTerm(s.items[i]));
      return t;
    }
  }
  throw SyntaxError("unreadable form", s.file, s.line, s.col);
}

// Parses exactly one expression from a string (command arguments, cache
// entries, test fixtures).
inline Term parseTermString(const std::string& text,
                            const std::string& file = "<expr>") {
  std::vector<SExpr> forms = parseSExprs(text, file);
  if (forms.empty()) throw SyntaxError("expected an expression", file, 1, 1);
  if (forms.size() > 1)
    throw SyntaxError("expected a single expression", forms[1].file,
                      forms[1].line, forms[1].col);
  return toTerm(forms[0]);
}

}  // namespace lemmamill
