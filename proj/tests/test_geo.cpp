// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "common/error.hpp"
#include "geo/projection.hpp"
#include "geo/raster.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace floeberg;
using namespace floeberg::geo;

namespace {

const StereoParams kParams = StereoParams::epsg3976();

// 3x3 raster, 10 m cells, lower-left corner at (0, 0). Row 0 is the north row.
//   1 2 3
//   3 1 2
//   2 3 1
LabelRaster checkerboard() {
  return LabelRaster(3, 3, 0.0, 0.0, 10.0, {1, 2, 3, 3, 1, 2, 2, 3, 1});
}

} // namespace

TEST_CASE("pole maps to the projection origin for every longitude") {
  for (double lon : {-180.0, -90.0, -17.5, 0.0, 33.0, 180.0}) {
    const auto q = project_forward({-90.0, lon}, kParams);
    CHECK(q.x == 0.0);
    CHECK(q.y == 0.0);
  }
}

TEST_CASE("central meridian lands on x = 0 with y north-positive") {
  const auto q = project_forward({-70.0, 0.0}, kParams);
  CHECK(q.x == doctest::Approx(0.0));
  CHECK(q.y > 0.0);
  // mpmath evaluation of Snyder's t-form at 40 digits.
  CHECK(std::fabs(q.y - 2187927.6492790208) < 1e-3);
}

TEST_CASE("forward projection agrees with the conformal-latitude oracle") {
  const auto q = project_forward({-75.0, -170.0}, kParams);
  const auto [ox, oy] = oracle::snyder_south_polar(-75.0, -170.0);
  CHECK(std::fabs(q.x - ox) < 1e-3);
  CHECK(std::fabs(q.y - oy) < 1e-3);
  // Frozen from a 40-digit mpmath evaluation.
  CHECK(std::fabs(q.x - -283720.1972631617) < 1e-3);
  CHECK(std::fabs(q.y - -1609057.1965969192) < 1e-3);
}

TEST_CASE("inverse projection") {
  SUBCASE("origin is the pole") {
    CHECK(project_inverse({0.0, 0.0}, kParams).lat == -90.0);
  }
  SUBCASE("recovers the oracle point") {
    const auto [ox, oy] = oracle::snyder_south_polar(-75.0, -170.0);
    const auto p = project_inverse({ox, oy}, kParams);
    CHECK(std::fabs(p.lat - -75.0) < 1e-6);
    CHECK(std::fabs(p.lon - -170.0) < 1e-6);
  }
  SUBCASE("round trip over a grid") {
    const SouthPolarStereographic proj(kParams);
    for (double lat = -89.0; lat <= -55.0; lat += 1.7)
      for (double lon = -179.0; lon <= 179.0; lon += 13.3) {
        const auto p = proj.inverse(proj.forward({lat, lon}));
        CHECK(std::fabs(p.lat - lat) < 1e-6);
        CHECK(std::fabs(p.lon - lon) < 1e-6);
      }
  }
  SUBCASE("non-finite input") {
    CHECK_THROWS_AS(project_inverse({NAN, 0.0}, kParams), Error);
  }
}

TEST_CASE("meridian symmetry") {
  const SouthPolarStereographic proj(kParams);
  for (double lat : {-85.0, -72.5, -60.0})
    for (double lon : {5.0, 45.0, 120.0, 179.0}) {
      const auto a = proj.forward({lat, lon});
      const auto b = proj.forward({lat, -lon});
      CHECK(a.x == doctest::Approx(-b.x).epsilon(1e-15));
      CHECK(a.y == doctest::Approx(b.y).epsilon(1e-15));
    }
}

TEST_CASE("projection error paths") {
  try {
    project_forward({10.0, 0.0}, kParams);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::OutOfScope);
  }
  try {
    project_forward({-70.0, INFINITY}, kParams);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
  }
  StereoParams bad = kParams;
  bad.standard_parallel = 10.0;
  CHECK_THROWS_AS(SouthPolarStereographic{bad}, Error);
}

TEST_CASE("parse_shift") {
  auto s = parse_shift("0 m");
  CHECK(s.dx == 0.0);
  CHECK(s.dy == 0.0);
  s = parse_shift("150 m / E");
  CHECK(s.dx == 150.0);
  CHECK(s.dy == 0.0);
  s = parse_shift("550 m / NW");
  CHECK(s.dx == doctest::Approx(-388.909).epsilon(1e-6));
  CHECK(s.dy == doctest::Approx(388.909).epsilon(1e-6));
  CHECK(parse_shift("200 m / W").dx == -200.0);
  CHECK(parse_shift("350 m / sw").dy < 0.0);

  SUBCASE("magnitude equals the declared distance") {
    for (const char *dir : {"N", "S", "E", "W"}) {
      const auto v = parse_shift(std::string("530 m / ") + dir);
      CHECK(std::hypot(v.dx, v.dy) == 530.0);
    }
    for (const char *dir : {"NE", "NW", "SE", "SW"}) {
      const auto v = parse_shift(std::string("530 m / ") + dir);
      CHECK(std::fabs(std::hypot(v.dx, v.dy) - 530.0) < 1e-9);
    }
  }
  SUBCASE("malformed descriptors") {
    CHECK_THROWS_AS(parse_shift("100 m / UP"), Error);
    CHECK_THROWS_AS(parse_shift("100 / N"), Error);
    CHECK_THROWS_AS(parse_shift("100 m"), Error);
    CHECK_THROWS_AS(parse_shift("-5 m / N"), Error);
  }
}

TEST_CASE("shift conventions") {
  const ShiftVector s{100.0, -50.0};
  const auto t = ShiftConvention{.moves_track = true}.to_raster_shift(s);
  CHECK(t.dx == -100.0);
  CHECK(t.dy == 50.0);
  const auto f = ShiftConvention{.flip_east = true}.to_raster_shift(s);
  CHECK(f.dx == -100.0);
  CHECK(f.dy == -50.0);
}

TEST_CASE("raster lookup") {
  const auto r = checkerboard();
  SUBCASE("cell centers") {
    CHECK(r.lookup({5.0, 25.0}) == 1);
    CHECK(r.lookup({15.0, 25.0}) == 2);
    CHECK(r.lookup({25.0, 5.0}) == 1);
    CHECK(r.lookup({5.0, 5.0}) == 2);
  }
  SUBCASE("outside the extent is nodata") {
    CHECK(r.lookup({35.0, 15.0}) == kNodata);
    CHECK(r.lookup({-0.001, 15.0}) == kNodata);
    CHECK(r.lookup({15.0, 30.001}) == kNodata);
    CHECK(r.lookup({15.0, 30.0}) == 2); // top edge belongs to row 0
  }
  SUBCASE("shifting west by one cell reads the original east neighbor") {
    // Enumerate every cell: the translated raster at a point equals the
    // unshifted raster one cell further east.
    for (std::size_t row = 0; row < 3; ++row)
      for (std::size_t col = 0; col < 3; ++col) {
        const ProjectedPoint q{5.0 + 10.0 * col, 25.0 - 10.0 * row};
        const auto shifted = r.lookup(q, {-10.0, 0.0});
        const auto expected = col + 1 < 3 ? r.at(row, col + 1) : kNodata;
        CHECK(shifted == expected);
      }
    // Middle row is 3 1 2: the west cell picks up its neighbor's 1.
    CHECK(r.lookup({5.0, 15.0}) == 3);
    CHECK(r.lookup({5.0, 15.0}, {-10.0, 0.0}) == 1);
  }
  SUBCASE("shifts compose additively") {
    const ShiftVector a{-7.0, 3.0};
    const ShiftVector b{4.5, -12.0};
    for (double x = -12.0; x < 42.0; x += 2.9)
      for (double y = -12.0; y < 42.0; y += 3.1)
        CHECK(r.lookup({x - b.dx, y - b.dy}, a) == r.lookup({x, y}, a + b));
  }
}

TEST_CASE("raster file round trip and validation") {
  const auto r = checkerboard();
  const auto text = r.serialize();
  CHECK(text.rfind("ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 10\n"
                   "nodata_value 0\n1 2 3\n",
                   0) == 0);
  const auto back = LabelRaster::parse(text);
  CHECK(back.cells() == r.cells());
  CHECK(back.y_origin() == 30.0);

  CHECK_THROWS_AS(LabelRaster::parse("ncols 2\nnrows 1\nxllcorner 0\n"
                                     "yllcorner 0\ncellsize 1\nnodata_value 0\n"
                                     "1 7\n"),
                  Error);
  CHECK_THROWS_AS(LabelRaster::parse("ncols 2\nnrows 2\nxllcorner 0\n"
                                     "yllcorner 0\ncellsize 1\nnodata_value 0\n"
                                     "1 1\n"),
                  Error);
  // Foreign nodata values fold into code 0.
  const auto foreign = LabelRaster::parse("NCOLS 2\nNROWS 1\nXLLCORNER 0\n"
                                          "YLLCORNER 0\nCELLSIZE 1\n"
                                          "NODATA_VALUE -9999\n-9999 3\n");
  CHECK(foreign.at(0, 0) == kNodata);
  CHECK(foreign.at(0, 1) == 3);
}

TEST_CASE("shift table") {
  const auto table = parse_shift_table(
      "pair_id,track_file,raster_file,time_diff_minutes,shift_text\n"
      "1,t1.csv,r1.asc,9.55,550 m / NW\n"
      "2,t2.csv,r2.asc,7.7,0 m\n"
      "9,t9.csv,r9.asc,95,150 m / E\n");
  REQUIRE(table.size() == 3);
  CHECK(find_pair(table, "1").shift.dx < 0.0);
  CHECK(find_pair(table, "2").shift.dx == 0.0);
  CHECK_THROWS_AS(find_pair(table, "9"), Error);
  CHECK(find_pair(table, "9", 120.0).shift.dx == 150.0);
  CHECK_THROWS_AS(find_pair(table, "missing"), Error);
}
