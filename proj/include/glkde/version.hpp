#pragma once

namespace glkde {

inline constexpr const char* version = "0.1.0";

} // namespace glkde
