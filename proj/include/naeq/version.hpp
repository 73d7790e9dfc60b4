#pragma once

namespace naeq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace naeq
