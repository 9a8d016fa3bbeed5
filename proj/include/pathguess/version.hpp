#pragma once

namespace pathguess {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolId = "pathguess/0.1.0";

}  // namespace pathguess
