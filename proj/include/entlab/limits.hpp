#pragma once

#include <cstdint>

namespace entlab {

// Element cap shared by ball enumeration and convolution supports.
inline constexpr std::uint64_t kDefaultBallCap = 100000000ULL;

}  // namespace entlab
