#pragma once

namespace obsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace obsim
