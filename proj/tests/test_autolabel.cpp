// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "autolabel/autolabel.hpp"
#include "common/error.hpp"
#include "ingest/synthetic.hpp"

using namespace floeberg;
using namespace floeberg::autolabel;
using floeberg::ingest::Segment;

namespace {

const geo::StereoParams kParams = geo::StereoParams::epsg3976();

// Segment whose center projects to (x, y).
Segment segment_at(std::int64_t index, double x, double y) {
  const auto g = geo::project_inverse({x, y}, kParams);
  Segment s;
  s.index = index;
  s.center_along_track = (index + 0.5) * 2.0;
  s.center_lat = g.lat;
  s.center_lon = g.lon;
  s.n_photons = 1;
  return s;
}

constexpr double kX0 = -283700.0;
constexpr double kY0 = -1609100.0;

std::vector<LabeledSegment> plain(std::size_t n) {
  std::vector<LabeledSegment> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].segment.index = static_cast<std::int64_t>(i);
    out[i].segment.n_photons = 1;
    out[i].surface = SurfaceClass::ThickIce;
  }
  return out;
}

} // namespace

TEST_CASE("label_segments") {
  SUBCASE("uniform raster") {
    const geo::LabelRaster r(4, 4, kX0, kY0, 100.0,
                             std::vector<std::uint8_t>(16, 1));
    const std::vector<Segment> seg{segment_at(0, kX0 + 150.0, kY0 + 250.0),
                                   segment_at(1, kX0 - 50.0, kY0 + 50.0)};
    const auto l = label_segments(seg, r, {}, kParams);
    CHECK(l[0].surface == SurfaceClass::ThickIce);
    CHECK(l[0].source == LabelSource::Auto);
    CHECK(l[1].surface == SurfaceClass::Unlabeled);
  }
  SUBCASE("diagonal crossing of a 3x3 checkerboard") {
    // rows north to south: 1 2 3 / 3 1 2 / 2 3 1
    const geo::LabelRaster r(3, 3, kX0, kY0, 10.0, {1, 2, 3, 3, 1, 2, 2, 3, 1});
    std::vector<Segment> seg;
    // West to east along the middle row, then south to north along column 2.
    for (int c = 0; c < 3; ++c) seg.push_back(segment_at(c, kX0 + 5 + 10 * c, kY0 + 15));
    for (int k = 0; k < 3; ++k) seg.push_back(segment_at(3 + k, kX0 + 25, kY0 + 5 + 10 * k));
    const auto l = label_segments(seg, r, {}, kParams);
    const std::vector<int> want{3, 1, 2, 1, 2, 3};
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(class_code(l[i].surface) == want[i]);
    // Moving the image one cell west shifts every reading by one column.
    const auto west = label_segments(seg, r, {-10.0, 0.0}, kParams);
    CHECK(class_code(west[0].surface) == 1);
    CHECK(class_code(west[1].surface) == 2);
    CHECK(west[2].surface == SurfaceClass::Unlabeled);
  }
}

TEST_CASE("apply_overrides") {
  const auto base = plain(10);
  CHECK(apply_overrides(base, {}) == base);

  const std::vector<OverrideSpan> all{{0, 9, SurfaceClass::ThinIce}};
  for (const auto &l : apply_overrides(base, all)) {
    CHECK(l.surface == SurfaceClass::ThinIce);
    CHECK(l.source == LabelSource::Manual);
  }
  const std::vector<OverrideSpan> overlap{{0, 5, SurfaceClass::ThickIce},
                                          {3, 8, SurfaceClass::OpenWater}};
  const auto o = apply_overrides(base, overlap);
  for (int i = 0; i <= 2; ++i) CHECK(o[i].surface == SurfaceClass::ThickIce);
  for (int i = 3; i <= 8; ++i) CHECK(o[i].surface == SurfaceClass::OpenWater);
  CHECK(o[9].source == LabelSource::Auto);

  const std::vector<OverrideSpan> bad{{5, 12, SurfaceClass::ThinIce}};
  CHECK_THROWS_AS(apply_overrides(base, bad), Error);
  const std::vector<OverrideSpan> reversed{{5, 2, SurfaceClass::ThinIce}};
  CHECK_THROWS_AS(apply_overrides(base, reversed), Error);
}

TEST_CASE("label_parallel is independent of the worker count") {
  const auto spec = ingest::random_track_spec(20000.0, 8);
  const auto track = ingest::synthesize_track(spec);
  const auto seg = ingest::resample_2m(track.photons);
  const auto raster = ingest::rasterize_truth(spec);
  const auto seq = label_segments(seg, raster, {}, kParams);
  for (std::size_t w : {1u, 2u, 4u}) {
    const auto job = label_parallel(seg, raster, {}, kParams, w);
    CHECK(job.labeled == seq);
    CHECK(job.timings.map_s >= 0.0);
    CHECK(job.timings.reduce_s >= 0.0);
  }
  // Labels follow the generator truth, and the result is idempotent.
  std::size_t agree = 0;
  for (const auto &l : seq)
    agree += l.surface == track.true_class[static_cast<std::size_t>(l.segment.index)];
  CHECK(agree == seq.size());
  CHECK(label_segments(seg, raster, {}, kParams) == seq);
}

TEST_CASE("labeled CSV round trip") {
  auto l = plain(50);
  l[3].surface = SurfaceClass::OpenWater;
  l[4].surface = SurfaceClass::Unlabeled;
  l[7].source = LabelSource::Manual;
  const auto text = labeled_to_csv(l);
  CHECK(text.rfind(std::string(kLabeledHeader) + "\n", 0) == 0);
  for (std::size_t w : {1u, 3u, 8u}) CHECK(parse_labeled_csv(text, w) == l);
  CHECK_THROWS_AS(parse_labeled_csv(std::string(kLabeledHeader) +
                                        "\n0,1,0,0,1,0,0,0,0,0,0,0,5,a\n"),
                  Error);
  // Errors name the file line even when the body is split across workers.
  auto broken = text;
  const auto row = broken.find("\n40,");
  broken.replace(row + 1, 2, "xx");
  try {
    parse_labeled_csv(broken, 4);
    FAIL("expected a parse error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("line 42") != std::string::npos);
  }
}

TEST_CASE("override file") {
  const auto spans = parse_overrides("start_index,end_index,class\n0,5,1\n3,8,3\n");
  REQUIRE(spans.size() == 2);
  CHECK(spans[1].surface == SurfaceClass::OpenWater);
  CHECK_THROWS_AS(parse_overrides("start_index,end_index,class\n0,5,4\n"), Error);
  CHECK_THROWS_AS(parse_overrides("start,end\n"), Error);
}
