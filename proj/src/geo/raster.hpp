// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "geo/projection.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::geo {

/// Class codes carried by a label raster.
inline constexpr std::uint8_t kNodata = 0;
inline constexpr std::uint8_t kCodeThickIce = 1;
inline constexpr std::uint8_t kCodeThinIce = 2;
inline constexpr std::uint8_t kCodeOpenWater = 3;

/// Translation on the projected plane, meters.
struct ShiftVector {
  double dx = 0.0;
  double dy = 0.0;

  ShiftVector operator+(ShiftVector o) const { return {dx + o.dx, dy + o.dy}; }
  ShiftVector operator-() const { return {-dx, -dy}; }
};

/// How a drift descriptor is turned into a raster translation. The default
/// reads E as +x and N as +y and moves the image; the alternatives cover a
/// pair whose shift was recorded for the track or with flipped axes.
struct ShiftConvention {
  bool moves_track = false;
  bool flip_east = false;
  bool flip_north = false;

  ShiftVector to_raster_shift(ShiftVector s) const;
};

/// Parses "<d> m" or "<d> m / <DIR>", DIR one of N S E W NE NW SE SW.
ShiftVector parse_shift(std::string_view text);

/// Classified image as an ESRI ASCII grid; row 0 is the northern edge.
class LabelRaster {
public:
  LabelRaster() = default;
  LabelRaster(std::size_t ncols, std::size_t nrows, double xll, double yll,
              double cell_size, std::vector<std::uint8_t> cells);

  static LabelRaster load(const std::filesystem::path &path);
  static LabelRaster parse(std::string_view text);
  std::string serialize() const;
  void save(const std::filesystem::path &path) const;

  std::size_t ncols() const noexcept { return ncols_; }
  std::size_t nrows() const noexcept { return nrows_; }
  double xll() const noexcept { return xll_; }
  double yll() const noexcept { return yll_; }
  double x_origin() const noexcept { return xll_; }
  double y_origin() const noexcept { return yll_ + nrows_ * cell_; }
  double cell_size() const noexcept { return cell_; }
  std::uint8_t nodata_code() const noexcept { return kNodata; }

  std::uint8_t at(std::size_t row, std::size_t col) const {
    return cells_[row * ncols_ + col];
  }
  const std::vector<std::uint8_t> &cells() const noexcept { return cells_; }

  /// Class code of the cell containing q once the raster is translated by
  /// `shift`; nodata outside the extent. Cell edges belong to the cell on
  /// their east/south side (floor indexing).
  std::uint8_t lookup(ProjectedPoint q, ShiftVector shift = {}) const;

private:
  std::size_t ncols_ = 0;
  std::size_t nrows_ = 0;
  double xll_ = 0.0;
  double yll_ = 0.0;
  double cell_ = 1.0;
  std::vector<std::uint8_t> cells_;
};

inline std::uint8_t raster_lookup(const LabelRaster &r, ProjectedPoint q,
                                  ShiftVector shift) {
  return r.lookup(q, shift);
}

/// One row of a track/image pairing table.
struct ShiftTableEntry {
  std::string pair_id;
  std::string track_file;
  std::string raster_file;
  double time_diff_minutes = 0.0;
  std::string shift_text;
  ShiftVector shift;
};

std::vector<ShiftTableEntry> load_shift_table(const std::filesystem::path &path);
std::vector<ShiftTableEntry> parse_shift_table(std::string_view text);

/// Looks up `pair_id`; fails if absent or if the acquisition gap exceeds
/// `max_time_diff_minutes`.
const ShiftTableEntry &find_pair(const std::vector<ShiftTableEntry> &table,
                                 std::string_view pair_id,
                                 double max_time_diff_minutes = 80.0);

} // namespace floeberg::geo
