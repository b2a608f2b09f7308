#pragma once

// Error hierarchy for the whole pipeline. Every failure a caller can react to
// derives from Error and carries a stable kind tag; the CLI maps any Error to
// exit code 2 and prints what().

#include <stdexcept>
#include <string>
#include <utility>

namespace lemmamill {

struct Error : std::runtime_error {
  std::string kind;
  Error(std::string k, const std::string& msg)
      : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
};

// Malformed source text. Carries file/line/column when known.
struct SyntaxError : Error {
  std::string file;
  int line = 0;
  int column = 0;
  SyntaxError(const std::string& msg, std::string f = "", int ln = 0, int col = 0)
      : Error("SyntaxError", f.empty() ? msg
                                       : f + ":" + std::to_string(ln) + ":" +
                                             std::to_string(col) + ": " + msg),
        file(std::move(f)), line(ln), column(col) {}
};

// A call site disagrees with the callee's declared argument count.
struct ArityError : Error {
  explicit ArityError(const std::string& msg) : Error("ArityError", msg) {}
};

// An event references a function never defined anywhere in the corpus.
struct DanglingReferenceError : Error {
  explicit DanglingReferenceError(const std::string& msg)
      : Error("DanglingReferenceError", msg) {}
};

// A definition uses a later non-mutually-recursive definition, so its
// feature vector cannot be computed at its ingestion step.
struct CorpusOrderError : Error {
  explicit CorpusOrderError(const std::string& msg)
      : Error("CorpusOrderError", msg) {}
};

// Lookup of an event name that does not exist.
struct UnknownNameError : Error {
  explicit UnknownNameError(const std::string& msg)
      : Error("UnknownNameError", msg) {}
};

// A function value is needed before that function has one (internal signal
// that recurrent clustering turns into CorpusOrderError).
struct MissingValueError : Error {
  explicit MissingValueError(const std::string& msg)
      : Error("MissingValueError", msg) {}
};

// Fewer vectors than requested clusters.
struct TooFewObjectsError : Error {
  explicit TooFewObjectsError(const std::string& msg)
      : Error("TooFewObjectsError", msg) {}
};

// Evaluation of a term named a function the corpus does not define.
struct UnknownFunctionError : Error {
  explicit UnknownFunctionError(const std::string& msg)
      : Error("UnknownFunctionError", msg) {}
};

// Evaluation exceeded the recursion-depth or total-step budget.
struct DepthExceededError : Error {
  explicit DepthExceededError(const std::string& msg)
      : Error("DepthExceededError", msg) {}
};

// A random-value request whose constraint slice admits no value.
struct UnsatisfiableError : Error {
  explicit UnsatisfiableError(const std::string& msg)
      : Error("UnsatisfiableError", msg) {}
};

}  // namespace lemmamill
