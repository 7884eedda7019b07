// SPDX-License-Identifier: Apache-2.0
#include "ingest/photons.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <algorithm>
#include <cmath>

namespace floeberg::ingest {

namespace {

struct BinAccumulator {
  std::int64_t k = 0;
  std::vector<double> heights;
  double sum_lat = 0.0;
  double sum_lon = 0.0;
  double sum_bg = 0.0;

  Segment finish(double bin) {
    Segment s;
    const auto n = static_cast<std::int64_t>(heights.size());
    s.index = k;
    s.center_along_track = (static_cast<double>(k) + 0.5) * bin;
    s.center_lat = sum_lat / n;
    s.center_lon = sum_lon / n;
    s.n_photons = n;
    double sum = 0.0;
    for (double h : heights)
      sum += h;
    s.h_mean = sum / n;
    double ss = 0.0;
    for (double h : heights)
      ss += (h - s.h_mean) * (h - s.h_mean);
    s.h_std = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    std::sort(heights.begin(), heights.end());
    const auto mid = static_cast<std::size_t>(n / 2);
    s.h_median = n % 2 ? heights[mid] : 0.5 * (heights[mid - 1] + heights[mid]);
    s.photon_rate = n / bin;
    s.bg_rate_mean = sum_bg / n;
    return s;
  }
};

} // namespace

std::vector<Segment> resample_2m(std::span<const PhotonEvent> photons,
                                 double bin, int min_confidence) {
  require(std::isfinite(bin) && bin > 0.0, ErrorKind::InvalidInput,
          "bin width must be positive");
  std::vector<Segment> out;
  BinAccumulator acc;
  bool open = false;
  double prev_along = -INFINITY;
  for (const auto &p : photons) {
    require(std::isfinite(p.along_track) && p.along_track >= 0.0,
            ErrorKind::InvalidInput, "along_track must be finite and >= 0");
    require(p.along_track >= prev_along, ErrorKind::InvalidInput,
            "photons are not sorted by along_track");
    prev_along = p.along_track;
    if (p.confidence < min_confidence)
      continue;
    const auto k = static_cast<std::int64_t>(std::floor(p.along_track / bin));
    if (open && k != acc.k) {
      out.push_back(acc.finish(bin));
      acc = BinAccumulator{};
    }
    acc.k = k;
    open = true;
    acc.heights.push_back(p.height);
    acc.sum_lat += p.lat;
    acc.sum_lon += p.lon;
    acc.sum_bg += p.background_rate;
  }
  if (open)
    out.push_back(acc.finish(bin));
  fill_deltas(out);
  return out;
}

void fill_deltas(std::span<Segment> segments) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i == 0) {
      segments[i].d_photon_rate = 0.0;
      segments[i].d_bg_rate = 0.0;
    } else {
      segments[i].d_photon_rate =
          segments[i].photon_rate - segments[i - 1].photon_rate;
      segments[i].d_bg_rate =
          segments[i].bg_rate_mean - segments[i - 1].bg_rate_mean;
    }
  }
}

std::vector<PhotonEvent> parse_photons_csv(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "photon csv: empty file");
  io::expect_header(line, kPhotonHeader, "photon csv", true);
  std::vector<std::string_view> f;
  io::split_fields(line, f);
  // An optional trailing height_correction column is added to the height.
  int correction_col = -1;
  for (std::size_t i = 7; i < f.size(); ++i)
    if (f[i] == "height_correction")
      correction_col = static_cast<int>(i);
  const std::size_t width = f.size();

  std::vector<PhotonEvent> out;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    require(f.size() == width, ErrorKind::Parse,
            "photon csv line " + std::to_string(lines.line_number()) +
                ": expected " + std::to_string(width) + " fields");
    PhotonEvent p;
    p.delta_time = io::parse_double(f[0], "delta_time");
    p.lat = io::parse_double(f[1], "lat");
    p.lon = io::parse_double(f[2], "lon");
    p.along_track = io::parse_double(f[3], "along_track");
    p.height = io::parse_double(f[4], "height");
    p.confidence = static_cast<int>(io::parse_int(f[5], "confidence"));
    p.background_rate = io::parse_double(f[6], "background_rate");
    if (correction_col >= 0)
      p.height += io::parse_double(f[correction_col], "height_correction");
    require(p.confidence >= 0 && p.confidence <= 4, ErrorKind::Parse,
            "photon csv line " + std::to_string(lines.line_number()) +
                ": confidence outside 0..4");
    require(p.background_rate >= 0.0, ErrorKind::Parse,
            "photon csv line " + std::to_string(lines.line_number()) +
                ": negative background rate");
    out.push_back(p);
  }
  return out;
}

std::vector<PhotonEvent> load_photons_csv(const std::filesystem::path &path) {
  return parse_photons_csv(io::read_file(path));
}

std::string photons_to_csv(std::span<const PhotonEvent> photons) {
  std::string out;
  out.reserve(photons.size() * 96 + 80);
  out += kPhotonHeader;
  out += '\n';
  for (const auto &p : photons) {
    io::append_double(out, p.delta_time);
    out += ',';
    io::append_double(out, p.lat);
    out += ',';
    io::append_double(out, p.lon);
    out += ',';
    io::append_double(out, p.along_track);
    out += ',';
    io::append_double(out, p.height);
    out += ',';
    io::append_int(out, p.confidence);
    out += ',';
    io::append_double(out, p.background_rate);
    out += '\n';
  }
  return out;
}

Segment segment_from_fields(std::span<const std::string_view> f,
                            std::size_t line_no) {
  require(f.size() >= 12, ErrorKind::Parse,
          "segment csv line " + std::to_string(line_no) +
              ": expected 12 segment fields");
  Segment s;
  try {
    s.index = io::parse_int(f[0], "index");
    s.center_along_track = io::parse_double(f[1], "center_along_track");
    s.center_lat = io::parse_double(f[2], "lat");
    s.center_lon = io::parse_double(f[3], "lon");
    s.n_photons = io::parse_int(f[4], "n_photons");
    s.h_mean = io::parse_double(f[5], "h_mean");
    s.h_median = io::parse_double(f[6], "h_median");
    s.h_std = io::parse_double(f[7], "h_std");
    s.photon_rate = io::parse_double(f[8], "photon_rate");
    s.bg_rate_mean = io::parse_double(f[9], "bg_rate_mean");
    s.d_photon_rate = io::parse_double(f[10], "d_photon_rate");
    s.d_bg_rate = io::parse_double(f[11], "d_bg_rate");
  } catch (const Error &e) {
    fail(e.kind(), "segment csv line " + std::to_string(line_no) + ": " + e.what());
  }
  require(s.n_photons >= 1 && s.h_std >= 0.0, ErrorKind::Parse,
          "segment csv line " + std::to_string(line_no) +
              ": n_photons must be >= 1 and h_std >= 0");
  return s;
}

void append_segment_fields(std::string &out, const Segment &s) {
  io::append_int(out, s.index);
  out += ',';
  io::append_double(out, s.center_along_track);
  out += ',';
  io::append_double(out, s.center_lat);
  out += ',';
  io::append_double(out, s.center_lon);
  out += ',';
  io::append_int(out, s.n_photons);
  out += ',';
  io::append_double(out, s.h_mean);
  out += ',';
  io::append_double(out, s.h_median);
  out += ',';
  io::append_double(out, s.h_std);
  out += ',';
  io::append_double(out, s.photon_rate);
  out += ',';
  io::append_double(out, s.bg_rate_mean);
  out += ',';
  io::append_double(out, s.d_photon_rate);
  out += ',';
  io::append_double(out, s.d_bg_rate);
}

std::vector<Segment> parse_segments_csv(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "segment csv: empty file");
  io::expect_header(line, kSegmentHeader, "segment csv");
  std::vector<Segment> out;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    require(f.size() == 12, ErrorKind::Parse,
            "segment csv line " + std::to_string(lines.line_number()) +
                ": expected 12 fields");
    out.push_back(segment_from_fields(f, lines.line_number()));
  }
  return out;
}

std::vector<Segment> load_segments_csv(const std::filesystem::path &path) {
  return parse_segments_csv(io::read_file(path));
}

std::string segments_to_csv(std::span<const Segment> segments) {
  std::string out;
  out.reserve(segments.size() * 200 + 128);
  out += kSegmentHeader;
  out += '\n';
  for (const auto &s : segments) {
    append_segment_fields(out, s);
    out += '\n';
  }
  return out;
}

} // namespace floeberg::ingest
