// SPDX-License-Identifier: Apache-2.0
#include "autolabel/autolabel.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <algorithm>

namespace floeberg::autolabel {

namespace {

LabeledSegment label_one(const ingest::Segment &s,
                         const geo::SouthPolarStereographic &proj,
                         const geo::LabelRaster &raster,
                         geo::ShiftVector shift) {
  const auto q = proj.forward({s.center_lat, s.center_lon});
  return {s, static_cast<SurfaceClass>(raster.lookup(q, shift)),
          LabelSource::Auto};
}

} // namespace

std::vector<LabeledSegment> label_segments(std::span<const ingest::Segment> segments,
                                           const geo::LabelRaster &raster,
                                           geo::ShiftVector shift,
                                           const geo::StereoParams &params) {
  const geo::SouthPolarStereographic proj(params);
  std::vector<LabeledSegment> out;
  out.reserve(segments.size());
  for (const auto &s : segments)
    out.push_back(label_one(s, proj, raster, shift));
  return out;
}

std::vector<LabeledSegment> apply_overrides(std::vector<LabeledSegment> labeled,
                                            std::span<const OverrideSpan> spans) {
  if (spans.empty())
    return labeled;
  require(!labeled.empty(), ErrorKind::InvalidInput,
          "override spans given for an empty segment list");
  const auto lo = labeled.front().segment.index;
  const auto hi = labeled.back().segment.index;
  for (const auto &span : spans) {
    require(span.start_index <= span.end_index, ErrorKind::InvalidInput,
            "override span start exceeds end");
    require(span.start_index >= lo && span.end_index <= hi,
            ErrorKind::InvalidInput,
            "override span [" + std::to_string(span.start_index) + ", " +
                std::to_string(span.end_index) + "] outside segment indices [" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]");
    require(is_labeled(span.surface), ErrorKind::InvalidInput,
            "override class must be 1, 2 or 3");
    auto first = std::lower_bound(
        labeled.begin(), labeled.end(), span.start_index,
        [](const LabeledSegment &l, std::int64_t v) {
          return l.segment.index < v;
        });
    for (auto it = first;
         it != labeled.end() && it->segment.index <= span.end_index; ++it) {
      it->surface = span.surface;
      it->source = LabelSource::Manual;
    }
  }
  return labeled;
}

LabelJob label_parallel(std::span<const ingest::Segment> segments,
                        const geo::LabelRaster &raster, geo::ShiftVector shift,
                        const geo::StereoParams &params, std::size_t workers) {
  const geo::SouthPolarStereographic proj(params);
  LabelJob job;
  job.labeled = runtime::parallel_transform<LabeledSegment>(
      segments.size(), workers,
      [&](std::size_t i) { return label_one(segments[i], proj, raster, shift); },
      &job.timings);
  return job;
}

std::string labeled_to_csv(std::span<const LabeledSegment> labeled) {
  std::string out;
  out.reserve(labeled.size() * 210 + 160);
  out += kLabeledHeader;
  out += '\n';
  for (const auto &l : labeled) {
    ingest::append_segment_fields(out, l.segment);
    out += ',';
    out += static_cast<char>('0' + class_code(l.surface));
    out += l.source == LabelSource::Manual ? ",m\n" : ",a\n";
  }
  return out;
}

namespace {

// `first_line` is the file line number of the piece's first row.
std::vector<LabeledSegment> parse_labeled_rows(std::string_view piece,
                                               std::size_t first_line) {
  std::vector<LabeledSegment> out;
  io::LineCursor lines(piece);
  std::string_view line;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    require(f.size() == 14, ErrorKind::Parse,
            "labeled csv: expected 14 fields, got " + std::to_string(f.size()));
    LabeledSegment l;
    l.segment = ingest::segment_from_fields(f, first_line + lines.line_number() - 1);
    const auto code = io::parse_int(f[12], "class");
    require(code >= 0 && code <= 3, ErrorKind::Parse,
            "labeled csv: class outside 0..3");
    l.surface = static_cast<SurfaceClass>(code);
    require(f[13] == "a" || f[13] == "m", ErrorKind::Parse,
            "labeled csv: source must be 'a' or 'm'");
    l.source = f[13] == "m" ? LabelSource::Manual : LabelSource::Auto;
    out.push_back(l);
  }
  return out;
}

} // namespace

std::vector<LabeledSegment> parse_labeled_csv(std::string_view text,
                                              std::size_t workers) {
  io::LineCursor lines(text);
  std::string_view header;
  require(lines.next(header), ErrorKind::Parse, "labeled csv: empty file");
  io::expect_header(header, kLabeledHeader, "labeled csv");
  auto nl = text.find('\n');
  std::string_view body =
      nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  return runtime::parallel_parse<LabeledSegment>(
      body, workers, [body](std::string_view piece) {
        const auto before = body.substr(0, piece.data() - body.data());
        const auto skipped =
            static_cast<std::size_t>(std::count(before.begin(), before.end(), '\n'));
        return parse_labeled_rows(piece, skipped + 2);
      });
}

std::vector<LabeledSegment> load_labeled_csv(const std::filesystem::path &path,
                                             std::size_t workers) {
  return parse_labeled_csv(io::read_file(path), workers);
}

std::vector<OverrideSpan> parse_overrides(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  require(lines.next(line), ErrorKind::Parse, "override file: empty");
  io::expect_header(line, "start_index,end_index,class", "override file");
  std::vector<OverrideSpan> out;
  std::vector<std::string_view> f;
  while (lines.next(line)) {
    if (io::trim(line).empty())
      continue;
    io::split_fields(line, f);
    require(f.size() == 3, ErrorKind::Parse,
            "override line " + std::to_string(lines.line_number()) +
                ": expected 3 fields");
    OverrideSpan s;
    s.start_index = io::parse_int(f[0], "start_index");
    s.end_index = io::parse_int(f[1], "end_index");
    const auto code = io::parse_int(f[2], "class");
    require(code >= 1 && code <= 3, ErrorKind::Parse,
            "override class must be 1, 2 or 3");
    s.surface = static_cast<SurfaceClass>(code);
    out.push_back(s);
  }
  return out;
}

std::vector<OverrideSpan> load_overrides(const std::filesystem::path &path) {
  return parse_overrides(io::read_file(path));
}

std::vector<ingest::Segment> segments_of(std::span<const LabeledSegment> labeled) {
  std::vector<ingest::Segment> out;
  out.reserve(labeled.size());
  for (const auto &l : labeled)
    out.push_back(l.segment);
  return out;
}

} // namespace floeberg::autolabel
