#pragma once

namespace metrolab {
inline constexpr const char* kVersion = "0.1.0";
}
