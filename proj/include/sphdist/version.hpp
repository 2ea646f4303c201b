#pragma once

namespace sphdist {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sphdist
