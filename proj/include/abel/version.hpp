#pragma once

namespace abel {

inline constexpr const char* version = "0.1.0";

} // namespace abel
