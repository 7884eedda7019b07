// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/surface_class.hpp"
#include "geo/projection.hpp"
#include "geo/raster.hpp"
#include "ingest/photons.hpp"
#include "runtime/runtime.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::autolabel {

enum class LabelSource : std::uint8_t { Auto, Manual };

struct LabeledSegment {
  ingest::Segment segment;
  SurfaceClass surface = SurfaceClass::Unlabeled;
  LabelSource source = LabelSource::Auto;

  bool operator==(const LabeledSegment &) const = default;
};

/// Inclusive range of segment indices forced to one class.
struct OverrideSpan {
  std::int64_t start_index = 0;
  std::int64_t end_index = 0;
  SurfaceClass surface = SurfaceClass::ThickIce;
};

/// Projects each segment center and reads the shifted raster; nodata cells
/// leave the segment Unlabeled. Output order follows input order.
std::vector<LabeledSegment> label_segments(std::span<const ingest::Segment> segments,
                                           const geo::LabelRaster &raster,
                                           geo::ShiftVector shift,
                                           const geo::StereoParams &params);

/// Applies spans in order (later spans win on overlap) to segments whose
/// index falls inside them, marking those segments as manual.
std::vector<LabeledSegment> apply_overrides(std::vector<LabeledSegment> labeled,
                                            std::span<const OverrideSpan> spans);

struct LabelJob {
  std::vector<LabeledSegment> labeled;
  runtime::PhaseTimings timings;
};

/// Chunk-parallel label_segments; bit-identical to it for any worker count.
/// Only the map and reduce timings are filled in.
LabelJob label_parallel(std::span<const ingest::Segment> segments,
                        const geo::LabelRaster &raster, geo::ShiftVector shift,
                        const geo::StereoParams &params, std::size_t workers);

// ---- CSV products -------------------------------------------------------

inline constexpr std::string_view kLabeledHeader =
    "index,center_along_track,lat,lon,n_photons,h_mean,h_median,h_std,"
    "photon_rate,bg_rate_mean,d_photon_rate,d_bg_rate,class,source";

std::string labeled_to_csv(std::span<const LabeledSegment> labeled);
/// Rows are parsed on `workers` threads; the result does not depend on it.
std::vector<LabeledSegment> parse_labeled_csv(std::string_view text,
                                              std::size_t workers = 1);
std::vector<LabeledSegment> load_labeled_csv(const std::filesystem::path &path,
                                             std::size_t workers = 1);

/// "start_index,end_index,class" rows, class in 1..3.
std::vector<OverrideSpan> parse_overrides(std::string_view text);
std::vector<OverrideSpan> load_overrides(const std::filesystem::path &path);

std::vector<ingest::Segment> segments_of(std::span<const LabeledSegment> labeled);

} // namespace floeberg::autolabel
