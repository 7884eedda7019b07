// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autolabel/autolabel.hpp"
#include "runtime/runtime.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::surface {

enum class Method : std::uint8_t { NasaWeighted, MinElev, AvgElev, NearestMinElev };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

/// Variance floor for a 2 m sample.
inline constexpr double kMinSigmaSq = 1e-12;

struct LeadSample {
  double h = 0.0;
  double sigma_sq = 0.0;
  bool operator==(const LeadSample &) const = default;
};

struct Estimate {
  double h = 0.0;
  double sigma_sq = 0.0;
  bool operator==(const Estimate &) const = default;
};

/// A maximal run of open-water segments with no gap in the segment ordinals.
struct Lead {
  std::size_t first = 0; // positions in the labeled list, inclusive
  std::size_t last = 0;
  std::int64_t start_index = 0; // segment ordinals, inclusive
  std::int64_t end_index = 0;
  double midpoint = 0.0; // along-track meters
  std::vector<LeadSample> samples;
  double h_min = 0.0;
  double h_lead = 0.0;
  double sigma_sq_lead = 0.0;

  std::size_t count() const noexcept { return samples.size(); }
  bool operator==(const Lead &) const = default;
};

/// h = segment mean height; sigma^2 = h_std^2 / n_photons, floored.
LeadSample sample_of(const ingest::Segment &s);

/// Weighted lead height: w_i = exp(-((h_i - h_min) / sigma_i)^2),
/// alpha_i = w_i / sum w, h = sum alpha_i h_i, sigma^2 = sum alpha_i^2 sigma_i^2.
Estimate lead_height(std::span<const LeadSample> samples);

std::vector<Lead> extract_leads(std::span<const autolabel::LabeledSegment> labeled,
                                std::size_t min_length = 1);

/// Chunk-parallel extract_leads with the same output. Each chunk owns the
/// leads that start in its core range and follows them past the range end.
std::vector<Lead> extract_leads_parallel(
    std::span<const autolabel::LabeledSegment> labeled, std::size_t min_length,
    std::size_t workers, runtime::PhaseTimings *timings = nullptr);

/// Reference height of one window from the leads assigned to it.
///   NasaWeighted: inverse-variance combination of the lead estimates.
///   MinElev: lowest open-water sample, with that sample's variance.
///   AvgElev: mean sample height, variance sum(sigma_i^2) / n^2.
///   NearestMinElev: lowest sample of the lead whose midpoint is closest to
///     `center`, with that sample's variance.
Estimate window_reference(std::span<const Lead> leads, Method method,
                          double center = 0.0);

struct ProfileConfig {
  Method method = Method::NasaWeighted;
  double window_length = 10000.0;
  double stride = 5000.0;
  std::size_t min_lead_length = 1;

  void validate() const;
};

struct SeaSurfaceWindow {
  double center = 0.0;
  double half_width = 0.0;
  std::size_t n_leads = 0;
  double h_ref = 0.0;
  double sigma_sq_ref = 0.0;
  Method method = Method::NasaWeighted;
  bool interpolated = false;
  bool operator==(const SeaSurfaceWindow &) const = default;
};

struct SeaSurfaceProfile {
  Method method = Method::NasaWeighted;
  std::vector<SeaSurfaceWindow> windows;
  std::vector<double> h_ref;        // per labeled segment
  std::vector<double> sigma_sq_ref; // per labeled segment
  bool operator==(const SeaSurfaceProfile &) const = default;
};

/// Fills windows that have no lead by linear interpolation between the
/// nearest valid neighbors (constant beyond the outermost valid window).
/// Fails with NoReference when no window is valid.
void fill_empty_windows(std::vector<SeaSurfaceWindow> &windows);

/// Window centers every `stride` meters from the stride multiple at or
/// below the first segment through the last segment. A lead belongs to every
/// window whose [center - L/2, center + L/2) holds its midpoint. Per-segment
/// values interpolate linearly between adjacent centers. Fails with
/// NoReference when the track has no usable lead.
SeaSurfaceProfile build_profile(std::span<const autolabel::LabeledSegment> labeled,
                                const ProfileConfig &config = {},
                                std::size_t workers = 1,
                                runtime::PhaseTimings *timings = nullptr);

struct FreeboardRecord {
  std::int64_t index = 0;
  double center_along_track = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  SurfaceClass surface = SurfaceClass::Unlabeled;
  double h_s = 0.0;
  double h_ref = 0.0;
  double sigma_ref = 0.0;
  double h_f = 0.0;
  bool negative = false;
  bool operator==(const FreeboardRecord &) const = default;
};

/// h_f = h_s - h_ref for every segment; negatives are kept and flagged.
std::vector<FreeboardRecord>
compute_freeboard(std::span<const autolabel::LabeledSegment> labeled,
                  const SeaSurfaceProfile &profile, std::size_t workers = 1,
                  runtime::PhaseTimings *timings = nullptr);

struct Histogram {
  double bin_width = 0.02;
  std::int64_t first_bin = 0; // bin k spans [k w, (k + 1) w)
  std::vector<std::int64_t> counts;

  double left(std::size_t i) const;
  double right(std::size_t i) const;
};

Histogram freeboard_histogram(std::span<const FreeboardRecord> records,
                              double bin_width = 0.02);
/// Bin index of v for width w, consistent with left()/right().
std::int64_t histogram_bin(double v, double w);

// ---- CSV products -------------------------------------------------------
inline constexpr std::string_view kFreeboardHeader =
    "index,center_along_track,lat,lon,class,h_s,h_ref,sigma_ref,h_f,negative_flag";
inline constexpr std::string_view kWindowHeader =
    "center,method,n_leads,h_ref,sigma_sq_ref,interpolated";
inline constexpr std::string_view kHistogramHeader = "bin_left,bin_right,count";

std::string freeboard_to_csv(std::span<const FreeboardRecord> records);
std::vector<FreeboardRecord> parse_freeboard_csv(std::string_view text);
std::string windows_to_csv(std::span<const SeaSurfaceWindow> windows);
std::vector<SeaSurfaceWindow> parse_windows_csv(std::string_view text);
std::string histogram_to_csv(const Histogram &h);

} // namespace floeberg::surface
