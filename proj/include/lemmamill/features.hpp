#pragma once

// Term feature extraction: a 7x7 table indexed by node depth (rows, root at
// 0) and by "variables / arity 0..5" (columns). Each cell sums the values of
// the occurrences landing in it: variables contribute -i by order of first
// occurrence, integer constants their clamped value, nil/t fixed small
// codes, built-in heads fixed table values, user-function heads their
// assigned [f] value, and occurrences of the function being featurized (or
// its mutual-recursion group) a single reserved constant. Nodes deeper than
// row 6 and heads of arity above 5 are pruned.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "lemmamill/errors.hpp"
#include "lemmamill/macro.hpp"
#include "lemmamill/symbol.hpp"
#include "lemmamill/term.hpp"

namespace lemmamill {

inline constexpr int kFeatureRows = 7;
inline constexpr int kFeatureCols = 7;
inline constexpr int kMaxArity = 5;
// Self-call marker. Must be fixed and distinct from every other value a cell
// can receive: assigned function values live in [10, inf), built-ins in
// (0, 10), variable codes and clamped constants are integers, so a small
// negative non-integer is unambiguous. Large magnitudes (an earlier draft
// used -100) let self-call multiplicity drown out the rest of the structure
// and split recursive functions that differ only in call count.
inline constexpr double kSelfCallValue = -4.5;
inline constexpr double kConstantClamp = 50.0;

using FeatureVector = std::array<double, kFeatureRows * kFeatureCols>;

// Fixed values of built-in heads; nullopt for non-core symbols.
inline std::optional<double> builtinFeatureValue(const Symbol& s) {
  static const std::map<std::string, double> table = {
      {"IF", 1},           {"EQUAL", 2},    {"BINARY-+", 3}, {"BINARY-*", 4},
      {"UNARY--", 5},      {"<", 6},        {"NOT", 7},      {"IMPLIES", 8},
      {"ZP", 9},           {"NATP", 9.1},   {"INTEGERP", 9.2},
      {"ACL2-NUMBERP", 9.3}, {"CONSP", 9.4}, {"CAR", 9.5},   {"CDR", 9.6},
      {"CONS", 9.7},       {"ENDP", 9.8},
  };
  auto it = table.find(s.text);
  if (it != table.end()) return it->second;
  if (isCoreFunction(s)) return 9.9;  // remaining built-ins (symbolp, ...)
  return std::nullopt;
}

inline constexpr double kNilValue = 0.1;
inline constexpr double kTrueValue = 0.2;

// Assigned [f] values of user functions plus the reserved self-call value.
struct ValueMap {
  std::map<Symbol, double> entries;
  double reservedSelfCall = kSelfCallValue;

  double at(const Symbol& f) const {
    auto it = entries.find(f);
    if (it == entries.end())
      throw MissingValueError("no value assigned to " + f.display());
    return it->second;
  }
};

struct FeatureTable {
  // cells[depth][column]; column 0 is variables, column j>=1 is arity j-1.
  std::array<std::array<double, kFeatureCols>, kFeatureRows> cells{};

  double& cell(int depth, int col) { return cells[depth][col]; }
  double cell(int depth, int col) const { return cells[depth][col]; }
};

namespace detail {

inline void tabulate(const Term& t, int depth, const ValueMap& values,
                     const std::set<Symbol>& selfSet,
                     std::map<Symbol, int>& varIndex, FeatureTable& out) {
  if (depth >= kFeatureRows) return;  // pruned, children too
  switch (t.kind) {
    case TermKind::Var: {
      auto [it, fresh] = varIndex.try_emplace(t.sym, int(varIndex.size()) + 1);
      (void)fresh;
      out.cell(depth, 0) += -double(it->second);
      return;
    }
    case TermKind::Num: {
      double v = double(t.num);
      if (v > kConstantClamp) v = kConstantClamp;
      if (v < -kConstantClamp) v = -kConstantClamp;
      out.cell(depth, 1) += v;
      return;
    }
    case TermKind::Nil:
      out.cell(depth, 1) += kNilValue;
      return;
    case TermKind::True:
      out.cell(depth, 1) += kTrueValue;
      return;
    case TermKind::App:
      break;
  }
  int arity = int(t.args.size());
  if (arity <= kMaxArity) {
    double v;
    if (selfSet.count(t.sym)) {
      v = values.reservedSelfCall;
    } else if (auto bv = builtinFeatureValue(t.sym)) {
      v = *bv;
    } else {
      v = values.at(t.sym);
    }
    out.cell(depth, arity + 1) += v;
  }
  for (const Term& a : t.args)
    tabulate(a, depth + 1, values, selfSet, varIndex, out);
}

}  // namespace detail

// Featurizes one (expanded) term. selfSet holds the function under
// definition together with its mutual-recursion group; empty for theorem
// statements.
inline FeatureTable featureTable(const Term& t, const ValueMap& values,
                                 const std::set<Symbol>& selfSet = {}) {
  FeatureTable out;
  std::map<Symbol, int> varIndex;
  detail::tabulate(t, 0, values, selfSet, varIndex, out);
  return out;
}

// Row-major flattening into the fixed-length vector the clustering uses.
inline FeatureVector flatten(const FeatureTable& ft) {
  FeatureVector v{};
  for (int r = 0; r < kFeatureRows; ++r)
    for (int c = 0; c < kFeatureCols; ++c)
      v[std::size_t(r) * kFeatureCols + std::size_t(c)] = ft.cells[r][c];
  return v;
}

}  // namespace lemmamill
