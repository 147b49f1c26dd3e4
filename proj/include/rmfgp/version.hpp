#pragma once

namespace rmfgp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rmfgp
