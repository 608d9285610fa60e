#pragma once

namespace dualrail {

inline constexpr const char* kVersion = "0.1.0";

} // namespace dualrail
