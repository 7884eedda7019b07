// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace floeberg {

/// Surface type of a track segment. The numeric values are the raster class
/// codes; Unlabeled shares the raster's nodata code.
enum class SurfaceClass : std::uint8_t {
  Unlabeled = 0,
  ThickIce = 1,
  ThinIce = 2,
  OpenWater = 3,
};

inline constexpr int kClassCount = 3;

inline constexpr bool is_labeled(SurfaceClass c) {
  return c != SurfaceClass::Unlabeled;
}

/// 0-based index into classifier outputs (ThickIce -> 0 ... OpenWater -> 2).
inline constexpr int class_index(SurfaceClass c) {
  return static_cast<int>(c) - 1;
}

inline constexpr SurfaceClass class_from_index(int i) {
  return static_cast<SurfaceClass>(i + 1);
}

inline constexpr std::uint8_t class_code(SurfaceClass c) {
  return static_cast<std::uint8_t>(c);
}

inline constexpr std::string_view class_name(SurfaceClass c) {
  switch (c) {
  case SurfaceClass::ThickIce:
    return "thick ice";
  case SurfaceClass::ThinIce:
    return "thin ice";
  case SurfaceClass::OpenWater:
    return "open water";
  case SurfaceClass::Unlabeled:
    break;
  }
  return "unlabeled";
}

} // namespace floeberg
