// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/surface_class.hpp"
#include "geo/projection.hpp"
#include "geo/raster.hpp"
#include "ingest/photons.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::ingest {

struct SurfaceSpan {
  double start = 0.0; // meters, inclusive
  double end = 0.0;   // meters, exclusive
  SurfaceClass surface = SurfaceClass::ThickIce;
  double freeboard = 0.0;
};

/// Ground-truth description of a synthetic track.
struct SyntheticTrackSpec {
  double length = 10000.0;
  std::vector<SurfaceSpan> spans; // must partition [0, length)
  double photon_density = 25.0;   // photons per meter over thick ice
  double noise_sigma = 0.1;       // meters, Gaussian height noise
  double sea_level_trend = 0.0;   // meters per km
  double sea_level_offset = 0.0;  // meters at along_track 0
  double origin_lat = -75.0;
  double origin_lon = -170.0;
  double heading_deg = 0.0; // grid azimuth, clockwise from +y
  std::uint64_t seed = 0;

  void validate() const;
  double sea_level(double along_track) const {
    return sea_level_offset + sea_level_trend * along_track / 1000.0;
  }
  const SurfaceSpan &span_at(double along_track) const;
};

/// Per-class photon statistics used by the generator. Thin ice returns fewer
/// photons than thick ice and leads return more (specular water); the solar
/// background falls off from bright ice to dark water.
struct ClassRegime {
  double density_factor;
  double background_rate; // Hz
};

ClassRegime class_regime(SurfaceClass c);

/// Relative per-photon jitter of the background rate.
inline constexpr double kBackgroundJitter = 0.05;
/// Ground speed used to derive delta_time from along_track (m/s).
inline constexpr double kGroundSpeed = 6900.0;

struct SyntheticTrack {
  std::vector<PhotonEvent> photons;
  double bin = kDefaultBin;
  std::vector<SurfaceClass> true_class; // per bin k, at the bin center
  std::vector<double> true_freeboard;   // per bin k, at the bin center
};

/// Draws a Poisson photon stream per span. Heights are
/// sea_level(along) + freeboard + N(0, noise_sigma^2). Identical spec and
/// seed give bit-identical output.
SyntheticTrack synthesize_track(const SyntheticTrackSpec &spec,
                                const geo::StereoParams &params = {},
                                double bin = kDefaultBin);

/// Segment-level stand-in for resample_2m(synthesize_track(spec).photons)
/// on tracks too long to hold as photons: each bin's statistics are drawn
/// from its class regime directly. The photon count uses a normal
/// approximation of the Poisson count (at least 1). Deterministic in the seed.
std::vector<Segment> synthesize_segments(const SyntheticTrackSpec &spec,
                                         const geo::StereoParams &params = {},
                                         double bin = kDefaultBin);

/// Projected position of an along-track distance.
geo::ProjectedPoint track_position(const SyntheticTrackSpec &spec,
                                   const geo::SouthPolarStereographic &proj,
                                   double along_track);

/// A mixed-surface track: thick floes separated by leads and thin-ice
/// patches, class boundaries on multiples of 10 m.
SyntheticTrackSpec random_track_spec(double length, std::uint64_t seed,
                                     double thick_freeboard = 0.3,
                                     double thin_freeboard = 0.08);

/// Classified image matching the spec's ground truth: cells within
/// `half_width` of the track line carry the class at their along-track
/// position, everything else is nodata.
geo::LabelRaster rasterize_truth(const SyntheticTrackSpec &spec,
                                 const geo::StereoParams &params = {},
                                 double cell_size = 10.0,
                                 double half_width = 50.0);

/// Line-oriented CSV: "<key>,<value>" parameter rows and
/// "span,<start>,<end>,<class code>,<freeboard>" rows.
SyntheticTrackSpec parse_track_spec(std::string_view text);
SyntheticTrackSpec load_track_spec(const std::filesystem::path &path);
std::string track_spec_to_text(const SyntheticTrackSpec &spec);

} // namespace floeberg::ingest
