#pragma once

namespace sscox {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sscox
