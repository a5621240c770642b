#pragma once

namespace drcsim {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace drcsim
