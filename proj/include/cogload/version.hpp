#pragma once

namespace cogload {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace cogload
