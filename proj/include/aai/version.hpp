#pragma once

namespace aai {
inline constexpr const char* kVersion = "0.1.0";
}
