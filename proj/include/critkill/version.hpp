#pragma once

namespace critkill {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace critkill
