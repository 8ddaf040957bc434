#pragma once

namespace chantop {

inline constexpr const char* kToolName = "chantop";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace chantop
