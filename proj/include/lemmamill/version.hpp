#pragma once

// Tool identity, shared by the CLI banner and the cache invalidation check.

namespace lemmamill {

inline constexpr const char* kToolVersion = "lemma-mill 0.1.0";

}  // namespace lemmamill
