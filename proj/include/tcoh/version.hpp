#pragma once

namespace tcoh {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace tcoh
