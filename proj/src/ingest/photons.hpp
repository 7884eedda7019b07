// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::ingest {

/// One geolocated photon. `height` already carries any geophysical
/// corrections (the optional `height_correction` CSV column is folded in on
/// load).
struct PhotonEvent {
  double delta_time = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  double along_track = 0.0;
  double height = 0.0;
  int confidence = 4;
  double background_rate = 0.0;

  bool operator==(const PhotonEvent &) const = default;
};

/// A 2 m (by default) along-track bin of photons.
struct Segment {
  std::int64_t index = 0; // bin ordinal k; the bin spans [k*bin, (k+1)*bin)
  double center_along_track = 0.0;
  double center_lat = 0.0;
  double center_lon = 0.0;
  std::int64_t n_photons = 0;
  double h_mean = 0.0;
  double h_median = 0.0;
  double h_std = 0.0;
  double photon_rate = 0.0; // photons per meter
  double bg_rate_mean = 0.0;
  double d_photon_rate = 0.0; // vs previous emitted segment
  double d_bg_rate = 0.0;

  bool operator==(const Segment &) const = default;
};

inline constexpr double kDefaultBin = 2.0;
inline constexpr int kHighConfidence = 4;

/// Bins photons into [k*bin, (k+1)*bin). Photons below `min_confidence` are
/// dropped and empty bins are skipped, leaving a gap in the index sequence.
std::vector<Segment> resample_2m(std::span<const PhotonEvent> photons,
                                 double bin = kDefaultBin,
                                 int min_confidence = kHighConfidence);

/// Recomputes the rate deltas of an ordered segment run; the first segment
/// (no predecessor) gets zero.
void fill_deltas(std::span<Segment> segments);

// ---- CSV products -------------------------------------------------------

inline constexpr std::string_view kPhotonHeader =
    "delta_time,lat,lon,along_track,height,confidence,background_rate";
inline constexpr std::string_view kSegmentHeader =
    "index,center_along_track,lat,lon,n_photons,h_mean,h_median,h_std,"
    "photon_rate,bg_rate_mean,d_photon_rate,d_bg_rate";

std::vector<PhotonEvent> parse_photons_csv(std::string_view text);
std::vector<PhotonEvent> load_photons_csv(const std::filesystem::path &path);
std::string photons_to_csv(std::span<const PhotonEvent> photons);

/// Parses the 12 segment columns from already split fields.
Segment segment_from_fields(std::span<const std::string_view> f,
                            std::size_t line_no);
void append_segment_fields(std::string &out, const Segment &s);

std::vector<Segment> parse_segments_csv(std::string_view text);
std::vector<Segment> load_segments_csv(const std::filesystem::path &path);
std::string segments_to_csv(std::span<const Segment> segments);

} // namespace floeberg::ingest
