#pragma once

namespace lcsgeo {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lcsgeo
