#pragma once

#define SIMDYN_VERSION_STRING "0.1.0"

namespace simdyn {
inline constexpr const char* kVersion = SIMDYN_VERSION_STRING;
}
