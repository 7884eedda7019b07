// SPDX-License-Identifier: Apache-2.0
#include "geo/raster.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace floeberg::geo {

ShiftVector ShiftConvention::to_raster_shift(ShiftVector s) const {
  if (flip_east)
    s.dx = -s.dx;
  if (flip_north)
    s.dy = -s.dy;
  return moves_track ? -s : s;
}

ShiftVector parse_shift(std::string_view text) {
  const std::string original(text);
  std::string_view body = io::trim(text);
  std::string_view dir;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    dir = io::trim(body.substr(slash + 1));
    body = io::trim(body.substr(0, slash));
  }
  require(body.size() >= 2 && body.back() == 'm', ErrorKind::Parse,
          "shift must look like '<d> m [/ DIR]': '" + original + "'");
  body.remove_suffix(1);
  const double d = io::parse_double(io::trim(body), "shift distance");
  require(std::isfinite(d) && d >= 0.0, ErrorKind::Parse,
          "shift distance must be finite and non-negative: '" + original + "'");

  std::string upper(dir);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper.empty()) {
    // A bare distance is only meaningful as "no shift".
    require(d == 0.0, ErrorKind::Parse,
            "non-zero shift needs a direction: '" + original + "'");
    return {0.0, 0.0};
  }
  const double diag = d / std::sqrt(2.0);
  if (upper == "N")
    return {0.0, d};
  if (upper == "S")
    return {0.0, -d};
  if (upper == "E")
    return {d, 0.0};
  if (upper == "W")
    return {-d, 0.0};
  if (upper == "NE")
    return {diag, diag};
  if (upper == "NW")
    return {-diag, diag};
  if (upper == "SE")
    return {diag, -diag};
  if (upper == "SW")
    return {-diag, -diag};
  fail(ErrorKind::Parse, "unknown shift direction '" + std::string(dir) + "'");
}

LabelRaster::LabelRaster(std::size_t ncols, std::size_t nrows, double xll,
                         double yll, double cell_size,
                         std::vector<std::uint8_t> cells)
    : ncols_(ncols), nrows_(nrows), xll_(xll), yll_(yll), cell_(cell_size),
      cells_(std::move(cells)) {
  require(ncols_ > 0 && nrows_ > 0, ErrorKind::InvalidInput,
          "raster dimensions must be positive");
  require(std::isfinite(cell_) && cell_ > 0, ErrorKind::InvalidInput,
          "raster cell size must be positive");
  require(std::isfinite(xll_) && std::isfinite(yll_), ErrorKind::InvalidInput,
          "raster corner must be finite");
  require(cells_.size() == ncols_ * nrows_, ErrorKind::InvalidInput,
          "raster cell count does not match ncols x nrows");
  for (auto c : cells_)
    require(c <= kCodeOpenWater, ErrorKind::InvalidInput,
            "raster class code outside {0,1,2,3}");
}

std::uint8_t LabelRaster::lookup(ProjectedPoint q, ShiftVector shift) const {
  const double fx = (q.x - (xll_ + shift.dx)) / cell_;
  const double fy = (yll_ + shift.dy + nrows_ * cell_ - q.y) / cell_;
  if (!(fx >= 0.0 && fy >= 0.0))
    return kNodata;
  const double col = std::floor(fx);
  const double row = std::floor(fy);
  if (col >= static_cast<double>(ncols_) || row >= static_cast<double>(nrows_))
    return kNodata;
  return at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
}

LabelRaster LabelRaster::parse(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  static constexpr const char *keys[] = {"ncols",     "nrows",    "xllcorner",
                                         "yllcorner", "cellsize", "nodata_value"};
  double header[6] = {};
  for (int k = 0; k < 6; ++k) {
    require(lines.next(line), ErrorKind::Parse, "raster: truncated header");
    line = io::trim(line);
    auto sp = line.find_first_of(" \t");
    require(sp != std::string_view::npos, ErrorKind::Parse,
            "raster: malformed header line '" + std::string(line) + "'");
    std::string key(line.substr(0, sp));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    require(key == keys[k], ErrorKind::Parse,
            "raster: expected '" + std::string(keys[k]) + "', got '" + key +
                "'");
    header[k] = io::parse_double(line.substr(sp + 1), keys[k]);
  }
  require(header[0] >= 1 && header[1] >= 1 && header[0] == std::floor(header[0]) &&
              header[1] == std::floor(header[1]),
          ErrorKind::Parse, "raster: ncols/nrows must be positive integers");
  const auto ncols = static_cast<std::size_t>(header[0]);
  const auto nrows = static_cast<std::size_t>(header[1]);
  const auto nodata = static_cast<std::int64_t>(header[5]);

  std::vector<std::uint8_t> cells;
  cells.reserve(ncols * nrows);
  std::vector<std::string_view> fields;
  while (lines.next(line)) {
    line = io::trim(line);
    if (line.empty())
      continue;
    // Rows are whitespace separated; normalise tabs by splitting on blanks.
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
        ++pos;
      if (pos >= line.size())
        break;
      std::size_t end = line.find_first_of(" \t", pos);
      if (end == std::string_view::npos)
        end = line.size();
      std::int64_t code = io::parse_int(line.substr(pos, end - pos), "cell");
      if (code == nodata)
        code = kNodata;
      require(code >= 0 && code <= kCodeOpenWater, ErrorKind::Parse,
              "raster: class code " + std::to_string(code) +
                  " outside {0,1,2,3}");
      cells.push_back(static_cast<std::uint8_t>(code));
      pos = end;
    }
  }
  require(cells.size() == ncols * nrows, ErrorKind::Parse,
          "raster: expected " + std::to_string(ncols * nrows) +
              " cells, found " + std::to_string(cells.size()));
  return LabelRaster(ncols, nrows, header[2], header[3], header[4],
                     std::move(cells));
}

LabelRaster LabelRaster::load(const std::filesystem::path &path) {
  return parse(io::read_file(path));
}

std::string LabelRaster::serialize() const {
  std::string out;
  out.reserve(64 + cells_.size() * 2);
  out += "ncols ";
  io::append_int(out, static_cast<std::int64_t>(ncols_));
  out += "\nnrows ";
  io::append_int(out, static_cast<std::int64_t>(nrows_));
  out += "\nxllcorner ";
  io::append_double(out, xll_);
  out += "\nyllcorner ";
  io::append_double(out, yll_);
  out += "\ncellsize ";
  io::append_double(out, cell_);
  out += "\nnodata_value 0\n";
  for (std::size_t r = 0; r < nrows_; ++r) {
    for (std::size_t c = 0; c < ncols_; ++c) {
      if (c)
        out += ' ';
      out += static_cast<char>('0' + at(r, c));
    }
    out += '\n';
  }
  return out;
}

void LabelRaster::save(const std::filesystem::path &path) const {
  io::write_file_atomic(path, serialize());
}

std::vector<ShiftTableEntry> parse_shift_table(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "shift table: empty file");
  io::expect_header(
      line, "pair_id,track_file,raster_file,time_diff_minutes,shift_text",
      "shift table");
  std::vector<ShiftTableEntry> out;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    require(f.size() == 5, ErrorKind::Parse,
            "shift table line " + std::to_string(lines.line_number()) +
                ": expected 5 fields");
    ShiftTableEntry e;
    e.pair_id = f[0];
    e.track_file = f[1];
    e.raster_file = f[2];
    e.time_diff_minutes = io::parse_double(f[3], "time_diff_minutes");
    e.shift_text = f[4];
    e.shift = parse_shift(f[4]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ShiftTableEntry>
load_shift_table(const std::filesystem::path &path) {
  return parse_shift_table(io::read_file(path));
}

const ShiftTableEntry &find_pair(const std::vector<ShiftTableEntry> &table,
                                 std::string_view pair_id,
                                 double max_time_diff_minutes) {
  auto it = std::find_if(table.begin(), table.end(),
                         [&](const auto &e) { return e.pair_id == pair_id; });
  require(it != table.end(), ErrorKind::InvalidInput,
          "pair '" + std::string(pair_id) + "' not in shift table");
  require(std::fabs(it->time_diff_minutes) <= max_time_diff_minutes,
          ErrorKind::InvalidInput,
          "pair '" + std::string(pair_id) + "' exceeds the pairing tolerance");
  return *it;
}

} // namespace floeberg::geo
