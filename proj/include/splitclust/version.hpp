#pragma once

namespace splitclust {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace splitclust
