#pragma once

// Case-insensitive Lisp symbols. Names are folded to upper case on
// construction (the canonical form used for all comparisons) and printed in
// lower case by convention.

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace lemmamill {

struct Symbol {
  std::string text;  // canonical upper-case spelling

  Symbol() = default;
  explicit Symbol(std::string_view s) : text(fold(s)) {}

  static std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(c >= 'a' && c <= 'z' ? char(c - 'a' + 'A') : c);
    return out;
  }

  // Lower-case printing form.
  std::string display() const {
    std::string out;
    out.reserve(text.size());
    for (char c : text) out.push_back(c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c);
    return out;
  }

  bool empty() const { return text.empty(); }
  auto operator<=>(const Symbol&) const = default;
};

}  // namespace lemmamill

template <>
struct std::hash<lemmamill::Symbol> {
  std::size_t operator()(const lemmamill::Symbol& s) const noexcept {
    return std::hash<std::string>{}(s.text);
  }
};
