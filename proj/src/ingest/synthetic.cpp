// SPDX-License-Identifier: Apache-2.0
#include "ingest/synthetic.hpp"

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace floeberg::ingest {

void SyntheticTrackSpec::validate() const {
  require(std::isfinite(length) && length > 0, ErrorKind::InvalidInput,
          "track length must be positive");
  require(std::isfinite(photon_density) && photon_density > 0,
          ErrorKind::InvalidInput, "photon density must be positive");
  require(std::isfinite(noise_sigma) && noise_sigma >= 0,
          ErrorKind::InvalidInput, "noise sigma must be >= 0");
  require(std::isfinite(sea_level_trend) && std::isfinite(sea_level_offset),
          ErrorKind::InvalidInput, "sea level parameters must be finite");
  require(!spans.empty(), ErrorKind::InvalidInput, "spec has no spans");
  double cursor = 0.0;
  for (const auto &s : spans) {
    require(s.start == cursor, ErrorKind::InvalidInput,
            "spans must partition [0, length) in order");
    require(s.end > s.start, ErrorKind::InvalidInput, "empty span");
    require(is_labeled(s.surface), ErrorKind::InvalidInput,
            "span class must be 1, 2 or 3");
    require(std::isfinite(s.freeboard) && s.freeboard >= 0,
            ErrorKind::InvalidInput, "span freeboard must be >= 0");
    require(s.surface != SurfaceClass::OpenWater || s.freeboard == 0.0,
            ErrorKind::InvalidInput, "open water freeboard must be 0");
    cursor = s.end;
  }
  require(cursor == length, ErrorKind::InvalidInput,
          "spans must end at the track length");
}

const SurfaceSpan &SyntheticTrackSpec::span_at(double along_track) const {
  auto it = std::upper_bound(
      spans.begin(), spans.end(), along_track,
      [](double a, const SurfaceSpan &s) { return a < s.end; });
  if (it == spans.end())
    return spans.back();
  return *it;
}

ClassRegime class_regime(SurfaceClass c) {
  switch (c) {
  case SurfaceClass::ThickIce:
    return {1.0, 1.5e6};
  case SurfaceClass::ThinIce:
    return {0.6, 0.9e6};
  case SurfaceClass::OpenWater:
    return {1.4, 0.4e6};
  case SurfaceClass::Unlabeled:
    break;
  }
  fail(ErrorKind::InvalidInput, "no regime for unlabeled surface");
}

geo::ProjectedPoint track_position(const SyntheticTrackSpec &spec,
                                   const geo::SouthPolarStereographic &proj,
                                   double along_track) {
  const auto origin = proj.forward({spec.origin_lat, spec.origin_lon});
  const double h = spec.heading_deg * std::numbers::pi / 180.0;
  return {origin.x + along_track * std::sin(h),
          origin.y + along_track * std::cos(h)};
}

SyntheticTrack synthesize_track(const SyntheticTrackSpec &spec,
                                const geo::StereoParams &params, double bin) {
  spec.validate();
  require(bin > 0, ErrorKind::InvalidInput, "bin must be positive");
  const geo::SouthPolarStereographic proj(params);
  const auto origin = proj.forward({spec.origin_lat, spec.origin_lon});
  const double h = spec.heading_deg * std::numbers::pi / 180.0;
  const double ux = std::sin(h);
  const double uy = std::cos(h);

  Rng rng(spec.seed);
  SyntheticTrack track;
  track.bin = bin;
  for (const auto &span : spec.spans) {
    const auto regime = class_regime(span.surface);
    const double rate = spec.photon_density * regime.density_factor;
    double along = span.start + rng.exponential(rate);
    while (along < span.end) {
      PhotonEvent p;
      p.along_track = along;
      p.delta_time = along / kGroundSpeed;
      const auto ll =
          proj.inverse({origin.x + along * ux, origin.y + along * uy});
      p.lat = ll.lat;
      p.lon = ll.lon;
      p.height = spec.sea_level(along) + span.freeboard;
      if (spec.noise_sigma > 0)
        p.height += spec.noise_sigma * rng.normal();
      p.confidence = kHighConfidence;
      p.background_rate = regime.background_rate *
                          (1.0 + kBackgroundJitter * rng.normal());
      if (p.background_rate < 0)
        p.background_rate = 0;
      track.photons.push_back(p);
      along += rng.exponential(rate);
    }
  }

  const auto bins = static_cast<std::size_t>(std::ceil(spec.length / bin));
  track.true_class.resize(bins);
  track.true_freeboard.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const auto &s = spec.span_at((static_cast<double>(k) + 0.5) * bin);
    track.true_class[k] = s.surface;
    track.true_freeboard[k] = s.freeboard;
  }
  return track;
}

std::vector<Segment> synthesize_segments(const SyntheticTrackSpec &spec,
                                         const geo::StereoParams &params,
                                         double bin) {
  spec.validate();
  require(bin > 0, ErrorKind::InvalidInput, "bin must be positive");
  const geo::SouthPolarStereographic proj(params);
  Rng rng(spec.seed ^ 0x5e65e65e6ULL);
  const auto bins = static_cast<std::size_t>(std::ceil(spec.length / bin));
  std::vector<Segment> out;
  out.reserve(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double center = (static_cast<double>(k) + 0.5) * bin;
    const auto &span = spec.span_at(center);
    const auto regime = class_regime(span.surface);
    const double lambda = spec.photon_density * regime.density_factor * bin;
    const double draw = std::round(lambda + std::sqrt(lambda) * rng.normal());
    const auto n = static_cast<std::int64_t>(std::max(1.0, draw));
    const double dn = static_cast<double>(n);
    const double sigma = spec.noise_sigma;
    Segment s;
    s.index = static_cast<std::int64_t>(k);
    s.center_along_track = center;
    const auto ll = proj.inverse(track_position(spec, proj, center));
    s.center_lat = ll.lat;
    s.center_lon = ll.lon;
    s.n_photons = n;
    const double truth = spec.sea_level(center) + span.freeboard;
    s.h_mean = truth + sigma / std::sqrt(dn) * rng.normal();
    s.h_median = s.h_mean + 0.25 * sigma / std::sqrt(dn) * rng.normal();
    s.h_std = n > 1 ? std::max(0.0, sigma * (1.0 + rng.normal() / std::sqrt(2.0 * (dn - 1.0))))
                    : 0.0;
    s.photon_rate = dn / bin;
    s.bg_rate_mean = std::max(0.0, regime.background_rate *
                                       (1.0 + kBackgroundJitter / std::sqrt(dn) *
                                                  rng.normal()));
    out.push_back(s);
  }
  fill_deltas(out);
  return out;
}

SyntheticTrackSpec random_track_spec(double length, std::uint64_t seed,
                                     double thick_freeboard,
                                     double thin_freeboard) {
  require(length >= 10.0, ErrorKind::InvalidInput,
          "random track needs at least 10 m");
  SyntheticTrackSpec spec;
  spec.length = length;
  spec.seed = seed;
  Rng rng(seed ^ 0x5eed5eed5eedULL);
  auto snap = [](double v) { return std::round(v / 10.0) * 10.0; };
  double cursor = 0.0;
  bool ice_next = true;
  while (cursor < length) {
    SurfaceSpan s;
    s.start = cursor;
    double extent;
    if (ice_next) {
      s.surface = SurfaceClass::ThickIce;
      s.freeboard = thick_freeboard;
      extent = rng.uniform(300.0, 2500.0);
    } else if (rng.uniform() < 0.55) {
      s.surface = SurfaceClass::OpenWater;
      s.freeboard = 0.0;
      extent = rng.uniform(20.0, 200.0);
    } else {
      s.surface = SurfaceClass::ThinIce;
      s.freeboard = thin_freeboard;
      extent = rng.uniform(100.0, 700.0);
    }
    s.end = std::min(length, std::max(cursor + 10.0, snap(cursor + extent)));
    cursor = s.end;
    spec.spans.push_back(s);
    ice_next = !ice_next;
  }
  return spec;
}

geo::LabelRaster rasterize_truth(const SyntheticTrackSpec &spec,
                                 const geo::StereoParams &params,
                                 double cell_size, double half_width) {
  spec.validate();
  require(cell_size > 0 && half_width >= 0, ErrorKind::InvalidInput,
          "cell size must be positive and half width non-negative");
  const geo::SouthPolarStereographic proj(params);
  const auto a = track_position(spec, proj, 0.0);
  const auto b = track_position(spec, proj, spec.length);
  // Grid anchored on the track origin so along-track multiples of the cell
  // size fall on cell edges for cardinal headings.
  const auto pad = std::ceil(half_width / cell_size) + 1;
  const double x_min = a.x + cell_size * std::floor((std::min(a.x, b.x) - a.x) / cell_size - pad);
  const double x_max = a.x + cell_size * std::ceil((std::max(a.x, b.x) - a.x) / cell_size + pad);
  const double y_min = a.y + cell_size * std::floor((std::min(a.y, b.y) - a.y) / cell_size - pad);
  const double y_max = a.y + cell_size * std::ceil((std::max(a.y, b.y) - a.y) / cell_size + pad);
  const auto ncols = static_cast<std::size_t>(std::llround((x_max - x_min) / cell_size));
  const auto nrows = static_cast<std::size_t>(std::llround((y_max - y_min) / cell_size));
  require(ncols * nrows <= 200'000'000ULL, ErrorKind::InvalidInput,
          "truth raster would exceed 2e8 cells; use a coarser cell size");

  const double h = spec.heading_deg * std::numbers::pi / 180.0;
  const double ux = std::sin(h);
  const double uy = std::cos(h);
  std::vector<std::uint8_t> cells(ncols * nrows, geo::kNodata);
  for (std::size_t r = 0; r < nrows; ++r) {
    const double cy = y_max - (static_cast<double>(r) + 0.5) * cell_size;
    for (std::size_t c = 0; c < ncols; ++c) {
      const double cx = x_min + (static_cast<double>(c) + 0.5) * cell_size;
      const double along = (cx - a.x) * ux + (cy - a.y) * uy;
      const double across = -(cx - a.x) * uy + (cy - a.y) * ux;
      if (along < 0 || along >= spec.length || std::fabs(across) > half_width)
        continue;
      cells[r * ncols + c] = class_code(spec.span_at(along).surface);
    }
  }
  return geo::LabelRaster(ncols, nrows, x_min, y_min, cell_size,
                          std::move(cells));
}

SyntheticTrackSpec parse_track_spec(std::string_view text) {
  SyntheticTrackSpec spec;
  io::LineCursor lines(text);
  std::string_view line;
  std::vector<std::string_view> f;
  bool have_length = false;
  while (lines.next(line)) {
    line = io::trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    io::split_fields(line, f);
    const auto key = f[0];
    auto value = [&](std::string_view what) {
      require(f.size() == 2, ErrorKind::Parse,
              "track spec line " + std::to_string(lines.line_number()) +
                  ": expected '<key>,<value>'");
      return io::parse_double(f[1], what);
    };
    if (key == "span") {
      require(f.size() == 5, ErrorKind::Parse,
              "track spec line " + std::to_string(lines.line_number()) +
                  ": expected 'span,start,end,class,freeboard'");
      SurfaceSpan s;
      s.start = io::parse_double(f[1], "span start");
      s.end = io::parse_double(f[2], "span end");
      const auto code = io::parse_int(f[3], "span class");
      require(code >= 1 && code <= 3, ErrorKind::Parse,
              "span class must be 1, 2 or 3");
      s.surface = static_cast<SurfaceClass>(code);
      s.freeboard = io::parse_double(f[4], "span freeboard");
      spec.spans.push_back(s);
    } else if (key == "length") {
      spec.length = value("length");
      have_length = true;
    } else if (key == "density") {
      spec.photon_density = value("density");
    } else if (key == "noise_sigma") {
      spec.noise_sigma = value("noise_sigma");
    } else if (key == "sea_level_trend") {
      spec.sea_level_trend = value("sea_level_trend");
    } else if (key == "sea_level_offset") {
      spec.sea_level_offset = value("sea_level_offset");
    } else if (key == "origin_lat") {
      spec.origin_lat = value("origin_lat");
    } else if (key == "origin_lon") {
      spec.origin_lon = value("origin_lon");
    } else if (key == "heading") {
      spec.heading_deg = value("heading");
    } else if (key == "seed") {
      require(f.size() == 2, ErrorKind::Parse, "expected 'seed,<value>'");
      spec.seed = static_cast<std::uint64_t>(io::parse_int(f[1], "seed"));
    } else {
      fail(ErrorKind::Parse, "track spec: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_length && !spec.spans.empty())
    spec.length = spec.spans.back().end;
  spec.validate();
  return spec;
}

SyntheticTrackSpec load_track_spec(const std::filesystem::path &path) {
  return parse_track_spec(io::read_file(path));
}

std::string track_spec_to_text(const SyntheticTrackSpec &spec) {
  std::string out;
  auto kv = [&](const char *key, double v) {
    out += key;
    out += ',';
    io::append_double(out, v);
    out += '\n';
  };
  kv("length", spec.length);
  kv("density", spec.photon_density);
  kv("noise_sigma", spec.noise_sigma);
  kv("sea_level_trend", spec.sea_level_trend);
  kv("sea_level_offset", spec.sea_level_offset);
  kv("origin_lat", spec.origin_lat);
  kv("origin_lon", spec.origin_lon);
  kv("heading", spec.heading_deg);
  out += "seed,";
  io::append_int(out, static_cast<std::int64_t>(spec.seed));
  out += '\n';
  for (const auto &s : spec.spans) {
    out += "span,";
    io::append_double(out, s.start);
    out += ',';
    io::append_double(out, s.end);
    out += ',';
    io::append_int(out, class_code(s.surface));
    out += ',';
    io::append_double(out, s.freeboard);
    out += '\n';
  }
  return out;
}

} // namespace floeberg::ingest
