#pragma once

namespace hypermap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hypermap
