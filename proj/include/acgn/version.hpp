#pragma once

namespace acgn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace acgn
