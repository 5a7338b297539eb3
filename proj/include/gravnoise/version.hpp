#pragma once

namespace gravnoise {

inline constexpr const char* version = "0.1.0";

}  // namespace gravnoise
