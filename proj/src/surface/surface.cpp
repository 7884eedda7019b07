// SPDX-License-Identifier: Apache-2.0
#include "surface/surface.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floeberg::surface {

using autolabel::LabeledSegment;

std::string_view to_string(Method m) {
  switch (m) {
  case Method::NasaWeighted: return "nasa_weighted";
  case Method::MinElev: return "min_elev";
  case Method::AvgElev: return "avg_elev";
  case Method::NearestMinElev: return "nearest_min_elev";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::NasaWeighted, Method::MinElev, Method::AvgElev,
                 Method::NearestMinElev})
    if (text == to_string(m))
      return m;
  fail(ErrorKind::Parse, "unknown sea-surface method '" + std::string(text) +
                             "' (expected nasa_weighted, min_elev, avg_elev or "
                             "nearest_min_elev)");
}

LeadSample sample_of(const ingest::Segment &s) {
  const double n = static_cast<double>(std::max<std::int64_t>(s.n_photons, 1));
  return {s.h_mean, std::max(s.h_std * s.h_std / n, kMinSigmaSq)};
}

Estimate lead_height(std::span<const LeadSample> samples) {
  require(!samples.empty(), ErrorKind::InvalidInput, "lead without samples");
  double h_min = samples[0].h;
  for (const auto &s : samples)
    h_min = std::min(h_min, s.h);
  std::vector<double> w(samples.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double z = (samples[i].h - h_min) / std::sqrt(samples[i].sigma_sq);
    w[i] = std::exp(-z * z);
    wsum += w[i];
  }
  Estimate e;
  double h_max = h_min;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double a = w[i] / wsum;
    e.h += a * samples[i].h;
    e.sigma_sq += a * a * samples[i].sigma_sq;
    h_max = std::max(h_max, samples[i].h);
  }
  // The weights sum to 1 only up to rounding.
  e.h = std::clamp(e.h, h_min, h_max);
  return e;
}

namespace {

bool is_water(const LabeledSegment &l) {
  return l.surface == SurfaceClass::OpenWater;
}

// Whether position i starts a run: water, and its predecessor is not water
// or not the adjacent ordinal.
bool starts_run(std::span<const LabeledSegment> l, std::size_t i) {
  if (!is_water(l[i]))
    return false;
  return i == 0 || !is_water(l[i - 1]) ||
         l[i - 1].segment.index + 1 != l[i].segment.index;
}

Lead make_lead(std::span<const LabeledSegment> l, std::size_t first) {
  std::size_t last = first;
  while (last + 1 < l.size() && is_water(l[last + 1]) &&
         l[last + 1].segment.index == l[last].segment.index + 1)
    ++last;
  Lead lead;
  lead.first = first;
  lead.last = last;
  lead.start_index = l[first].segment.index;
  lead.end_index = l[last].segment.index;
  lead.midpoint = 0.5 * (l[first].segment.center_along_track +
                         l[last].segment.center_along_track);
  lead.samples.reserve(last - first + 1);
  for (std::size_t i = first; i <= last; ++i)
    lead.samples.push_back(sample_of(l[i].segment));
  lead.h_min = lead.samples[0].h;
  for (const auto &s : lead.samples)
    lead.h_min = std::min(lead.h_min, s.h);
  const auto e = lead_height(lead.samples);
  lead.h_lead = e.h;
  lead.sigma_sq_lead = e.sigma_sq;
  return lead;
}

void check_order(std::span<const LabeledSegment> l) {
  for (std::size_t i = 1; i < l.size(); ++i)
    require(l[i].segment.index > l[i - 1].segment.index, ErrorKind::InvalidInput,
            "labeled segments are not ordered by index");
}

} // namespace

std::vector<Lead> extract_leads(std::span<const LabeledSegment> labeled,
                                std::size_t min_length) {
  check_order(labeled);
  std::vector<Lead> out;
  std::size_t i = 0;
  while (i < labeled.size()) {
    if (!is_water(labeled[i])) {
      ++i;
      continue;
    }
    auto lead = make_lead(labeled, i);
    i = lead.last + 1;
    if (lead.count() >= std::max<std::size_t>(min_length, 1))
      out.push_back(std::move(lead));
  }
  return out;
}

std::vector<Lead> extract_leads_parallel(std::span<const LabeledSegment> labeled,
                                         std::size_t min_length,
                                         std::size_t workers,
                                         runtime::PhaseTimings *timings) {
  check_order(labeled);
  const auto plan = runtime::partition_with_halo(labeled.size(), workers, 0);
  return runtime::parallel_map_reduce(
      plan,
      [&](const runtime::Chunk &c) {
        std::vector<Lead> part;
        for (std::size_t i = c.core.begin; i < c.core.end; ++i) {
          if (!starts_run(labeled, i))
            continue;
          auto lead = make_lead(labeled, i);
          if (lead.count() >= std::max<std::size_t>(min_length, 1))
            part.push_back(std::move(lead));
        }
        return part;
      },
      [](std::vector<std::vector<Lead>> &&parts) {
        std::vector<Lead> out;
        for (auto &p : parts)
          std::move(p.begin(), p.end(), std::back_inserter(out));
        return out;
      },
      timings);
}

Estimate window_reference(std::span<const Lead> leads, Method method,
                          double center) {
  require(!leads.empty(), ErrorKind::NoReference,
          "sea-surface window without leads");
  Estimate e;
  switch (method) {
  case Method::NasaWeighted: {
    // Closed form of the inverse-variance weights: alpha_i = (1/s_i) / sum,
    // sum(alpha_i^2 s_i) = 1 / sum.
    double inv_sum = 0.0, weighted = 0.0;
    double lo = leads[0].h_lead, hi = lo;
    for (const auto &l : leads) {
      inv_sum += 1.0 / l.sigma_sq_lead;
      weighted += l.h_lead / l.sigma_sq_lead;
      lo = std::min(lo, l.h_lead);
      hi = std::max(hi, l.h_lead);
    }
    e.h = std::clamp(weighted / inv_sum, lo, hi);
    e.sigma_sq = 1.0 / inv_sum;
    return e;
  }
  case Method::MinElev: {
    const LeadSample *best = nullptr;
    for (const auto &l : leads)
      for (const auto &s : l.samples)
        if (!best || s.h < best->h)
          best = &s;
    return {best->h, best->sigma_sq};
  }
  case Method::AvgElev: {
    double n = 0.0;
    for (const auto &l : leads)
      for (const auto &s : l.samples) {
        e.h += s.h;
        e.sigma_sq += s.sigma_sq;
        n += 1.0;
      }
    e.h /= n;
    e.sigma_sq /= n * n;
    return e;
  }
  case Method::NearestMinElev: {
    const Lead *nearest = &leads[0];
    for (const auto &l : leads)
      if (std::fabs(l.midpoint - center) < std::fabs(nearest->midpoint - center))
        nearest = &l;
    const LeadSample *best = &nearest->samples[0];
    for (const auto &s : nearest->samples)
      if (s.h < best->h)
        best = &s;
    return {best->h, best->sigma_sq};
  }
  }
  fail(ErrorKind::Internal, "unhandled sea-surface method");
}

void ProfileConfig::validate() const {
  require(std::isfinite(window_length) && window_length > 0.0,
          ErrorKind::InvalidInput, "window length must be positive");
  require(std::isfinite(stride) && stride > 0.0, ErrorKind::InvalidInput,
          "window stride must be positive");
}

void fill_empty_windows(std::vector<SeaSurfaceWindow> &windows) {
  std::vector<std::size_t> valid;
  for (std::size_t j = 0; j < windows.size(); ++j)
    if (windows[j].n_leads > 0)
      valid.push_back(j);
  require(!valid.empty(), ErrorKind::NoReference,
          "no sea-surface reference: the track has no open-water lead");
  std::size_t next = 0; // first valid window at or after j
  for (std::size_t j = 0; j < windows.size(); ++j) {
    while (next < valid.size() && valid[next] < j)
      ++next;
    auto &w = windows[j];
    if (w.n_leads > 0)
      continue;
    w.interpolated = true;
    if (next == 0) {
      w.h_ref = windows[valid.front()].h_ref;
      w.sigma_sq_ref = windows[valid.front()].sigma_sq_ref;
    } else if (next == valid.size()) {
      w.h_ref = windows[valid.back()].h_ref;
      w.sigma_sq_ref = windows[valid.back()].sigma_sq_ref;
    } else {
      const auto &a = windows[valid[next - 1]];
      const auto &b = windows[valid[next]];
      const double t = (w.center - a.center) / (b.center - a.center);
      w.h_ref = a.h_ref + t * (b.h_ref - a.h_ref);
      w.sigma_sq_ref = a.sigma_sq_ref + t * (b.sigma_sq_ref - a.sigma_sq_ref);
    }
  }
}

namespace {

void add_timings(runtime::PhaseTimings *total, const runtime::PhaseTimings &t) {
  if (!total)
    return;
  total->map_s += t.map_s;
  total->reduce_s += t.reduce_s;
}

} // namespace

SeaSurfaceProfile build_profile(std::span<const LabeledSegment> labeled,
                                const ProfileConfig &config, std::size_t workers,
                                runtime::PhaseTimings *timings) {
  config.validate();
  require(!labeled.empty(), ErrorKind::NoReference,
          "no sea-surface reference: empty track");
  runtime::PhaseTimings t;
  const auto leads =
      extract_leads_parallel(labeled, config.min_lead_length, workers, &t);
  add_timings(timings, t);
  require(!leads.empty(), ErrorKind::NoReference,
          "no sea-surface reference: the track has no open-water lead");

  const double first = labeled.front().segment.center_along_track;
  const double last = labeled.back().segment.center_along_track;
  const double origin = std::floor(first / config.stride) * config.stride;
  const auto n_windows =
      static_cast<std::size_t>(std::ceil((last - origin) / config.stride)) + 1;
  const double hw = 0.5 * config.window_length;

  SeaSurfaceProfile profile;
  profile.method = config.method;
  profile.windows = runtime::parallel_transform<SeaSurfaceWindow>(
      n_windows, workers,
      [&](std::size_t j) {
        SeaSurfaceWindow w;
        w.center = origin + static_cast<double>(j) * config.stride;
        w.half_width = hw;
        w.method = config.method;
        const auto lo = std::lower_bound(
            leads.begin(), leads.end(), w.center - hw,
            [](const Lead &l, double v) { return l.midpoint < v; });
        const auto hi = std::lower_bound(
            lo, leads.end(), w.center + hw,
            [](const Lead &l, double v) { return l.midpoint < v; });
        w.n_leads = static_cast<std::size_t>(hi - lo);
        if (w.n_leads > 0) {
          const auto e = window_reference(
              std::span<const Lead>(&*lo, w.n_leads), config.method, w.center);
          w.h_ref = e.h;
          w.sigma_sq_ref = e.sigma_sq;
        }
        return w;
      },
      &t);
  add_timings(timings, t);

  runtime::Stopwatch clock;
  fill_empty_windows(profile.windows);
  if (timings)
    timings->reduce_s += clock.seconds();

  const auto &win = profile.windows;
  auto at = [&](std::size_t i) {
    const double a = labeled[i].segment.center_along_track;
    if (win.size() == 1)
      return std::pair{win[0].h_ref, win[0].sigma_sq_ref};
    auto j = static_cast<std::ptrdiff_t>(std::floor((a - origin) / config.stride));
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(win.size()) - 2);
    const auto &w0 = win[static_cast<std::size_t>(j)];
    const auto &w1 = win[static_cast<std::size_t>(j) + 1];
    const double f = std::clamp((a - w0.center) / config.stride, 0.0, 1.0);
    return std::pair{w0.h_ref + f * (w1.h_ref - w0.h_ref),
                     w0.sigma_sq_ref + f * (w1.sigma_sq_ref - w0.sigma_sq_ref)};
  };
  const auto values = runtime::parallel_transform<std::pair<double, double>>(
      labeled.size(), workers, at, &t);
  add_timings(timings, t);
  profile.h_ref.reserve(values.size());
  profile.sigma_sq_ref.reserve(values.size());
  for (const auto &[h, s] : values) {
    profile.h_ref.push_back(h);
    profile.sigma_sq_ref.push_back(s);
  }
  return profile;
}

std::vector<FreeboardRecord>
compute_freeboard(std::span<const LabeledSegment> labeled,
                  const SeaSurfaceProfile &profile, std::size_t workers,
                  runtime::PhaseTimings *timings) {
  require(profile.h_ref.size() == labeled.size() &&
              profile.sigma_sq_ref.size() == labeled.size(),
          ErrorKind::InvalidInput, "profile does not cover every segment");
  runtime::PhaseTimings t;
  auto out = runtime::parallel_transform<FreeboardRecord>(
      labeled.size(), workers,
      [&](std::size_t i) {
        const auto &s = labeled[i].segment;
        FreeboardRecord r;
        r.index = s.index;
        r.center_along_track = s.center_along_track;
        r.lat = s.center_lat;
        r.lon = s.center_lon;
        r.surface = labeled[i].surface;
        r.h_s = s.h_mean;
        r.h_ref = profile.h_ref[i];
        r.sigma_ref = std::sqrt(profile.sigma_sq_ref[i]);
        r.h_f = r.h_s - r.h_ref;
        r.negative = r.h_f < 0.0;
        return r;
      },
      &t);
  add_timings(timings, t);
  return out;
}

std::int64_t histogram_bin(double v, double w) {
  auto k = static_cast<std::int64_t>(std::floor(v / w));
  // Division rounding can put v on the wrong side of a printed edge.
  if (v < static_cast<double>(k) * w)
    --k;
  else if (v >= static_cast<double>(k + 1) * w)
    ++k;
  return k;
}

double Histogram::left(std::size_t i) const {
  return static_cast<double>(first_bin + static_cast<std::int64_t>(i)) * bin_width;
}

double Histogram::right(std::size_t i) const {
  return static_cast<double>(first_bin + static_cast<std::int64_t>(i) + 1) *
         bin_width;
}

Histogram freeboard_histogram(std::span<const FreeboardRecord> records,
                              double bin_width) {
  require(!records.empty(), ErrorKind::InvalidInput,
          "freeboard histogram needs at least one record");
  require(std::isfinite(bin_width) && bin_width > 0.0, ErrorKind::InvalidInput,
          "histogram bin width must be positive");
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto &r : records) {
    require(std::isfinite(r.h_f), ErrorKind::Numeric, "non-finite freeboard");
    const auto k = histogram_bin(r.h_f, bin_width);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  require(hi - lo < 10'000'000, ErrorKind::InvalidInput,
          "freeboard range too wide for the histogram bin width");
  Histogram h;
  h.bin_width = bin_width;
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const auto &r : records)
    ++h.counts[static_cast<std::size_t>(histogram_bin(r.h_f, bin_width) - lo)];
  return h;
}

// ---- CSV ------------------------------------------------------------------

std::string freeboard_to_csv(std::span<const FreeboardRecord> records) {
  std::string out(kFreeboardHeader);
  out += '\n';
  for (const auto &r : records) {
    io::append_int(out, r.index);
    for (double v : {r.center_along_track, r.lat, r.lon}) {
      out += ',';
      io::append_double(out, v);
    }
    out += ',';
    io::append_int(out, class_code(r.surface));
    for (double v : {r.h_s, r.h_ref, r.sigma_ref, r.h_f}) {
      out += ',';
      io::append_double(out, v);
    }
    out += r.negative ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<FreeboardRecord> parse_freeboard_csv(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "freeboard csv: empty file");
  io::expect_header(line, kFreeboardHeader, "freeboard csv");
  std::vector<FreeboardRecord> out;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    const auto where = "freeboard csv line " + std::to_string(lines.line_number());
    require(f.size() == 10, ErrorKind::Parse, where + ": expected 10 fields");
    FreeboardRecord r;
    try {
      r.index = io::parse_int(f[0], "index");
      r.center_along_track = io::parse_double(f[1], "center_along_track");
      r.lat = io::parse_double(f[2], "lat");
      r.lon = io::parse_double(f[3], "lon");
      const auto code = io::parse_int(f[4], "class");
      require(code >= 0 && code <= 3, ErrorKind::Parse, "class outside 0..3");
      r.surface = static_cast<SurfaceClass>(code);
      r.h_s = io::parse_double(f[5], "h_s");
      r.h_ref = io::parse_double(f[6], "h_ref");
      r.sigma_ref = io::parse_double(f[7], "sigma_ref");
      r.h_f = io::parse_double(f[8], "h_f");
      const auto neg = io::parse_int(f[9], "negative_flag");
      require(neg == 0 || neg == 1, ErrorKind::Parse, "negative_flag must be 0 or 1");
      r.negative = neg == 1;
    } catch (const Error &e) {
      fail(e.kind(), where + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

std::string windows_to_csv(std::span<const SeaSurfaceWindow> windows) {
  std::string out(kWindowHeader);
  out += '\n';
  for (const auto &w : windows) {
    io::append_double(out, w.center);
    out += ',';
    out += to_string(w.method);
    out += ',';
    io::append_int(out, static_cast<std::int64_t>(w.n_leads));
    out += ',';
    io::append_double(out, w.h_ref);
    out += ',';
    io::append_double(out, w.sigma_sq_ref);
    out += w.interpolated ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<SeaSurfaceWindow> parse_windows_csv(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "window csv: empty file");
  io::expect_header(line, kWindowHeader, "window csv");
  std::vector<SeaSurfaceWindow> out;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    const auto where = "window csv line " + std::to_string(lines.line_number());
    require(f.size() == 6, ErrorKind::Parse, where + ": expected 6 fields");
    SeaSurfaceWindow w;
    try {
      w.center = io::parse_double(f[0], "center");
      w.method = parse_method(f[1]);
      const auto n = io::parse_int(f[2], "n_leads");
      require(n >= 0, ErrorKind::Parse, "n_leads must be >= 0");
      w.n_leads = static_cast<std::size_t>(n);
      w.h_ref = io::parse_double(f[3], "h_ref");
      w.sigma_sq_ref = io::parse_double(f[4], "sigma_sq_ref");
      w.interpolated = io::parse_int(f[5], "interpolated") != 0;
    } catch (const Error &e) {
      fail(e.kind(), where + ": " + e.what());
    }
    out.push_back(w);
  }
  return out;
}

std::string histogram_to_csv(const Histogram &h) {
  std::string out(kHistogramHeader);
  out += '\n';
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    io::append_double(out, h.left(i));
    out += ',';
    io::append_double(out, h.right(i));
    out += ',';
    io::append_int(out, h.counts[i]);
    out += '\n';
  }
  return out;
}

} // namespace floeberg::surface
