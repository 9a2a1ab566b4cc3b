#pragma once

namespace cavsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cavsim
