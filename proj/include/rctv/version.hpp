#pragma once

namespace rctv {
inline constexpr const char* kVersion = "0.1.0";
}
