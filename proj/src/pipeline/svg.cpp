// SPDX-License-Identifier: Apache-2.0
#include "pipeline/svg.hpp"

#include "common/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace floeberg::pipeline {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string_view class_color(SurfaceClass c) {
  switch (c) {
  case SurfaceClass::ThickIce: return "#1f4e9c";
  case SurfaceClass::ThinIce: return "#5fb3d9";
  case SurfaceClass::OpenWater: return "#e0562b";
  default: return "#9a9a9a";
  }
}

std::string header(std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                  "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
                  " " + num(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" + std::string(title) + "</text>\n";
  return s;
}

struct Axis {
  double lo, hi;
  double map(double v, double a, double b) const {
    return hi > lo ? a + (v - lo) / (hi - lo) * (b - a) : 0.5 * (a + b);
  }
};

void frame(std::string &s, const Axis &x, const Axis &y, std::string_view xlabel,
           std::string_view ylabel) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) +
       "\" height=\"" + num(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x.lo + (x.hi - x.lo) * i / 4.0;
    const double px = x.map(fx, x0, x1);
    s += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         label_num(fx) + "</text>\n";
    const double fy = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = y.map(fy, y0, y1);
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         label_num(fy) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       std::string(xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" transform=\"rotate(-90 16 " +
       num((y0 + y1) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">" + std::string(ylabel) + "</text>\n";
}

} // namespace

std::string elevation_scatter_svg(std::span<const autolabel::LabeledSegment> labeled,
                                  std::size_t max_points) {
  std::string s = header("Elevation by surface class");
  if (labeled.empty())
    return s + "</svg>\n";
  const std::size_t step = std::max<std::size_t>(1, (labeled.size() + max_points - 1) /
                                                        std::max<std::size_t>(max_points, 1));
  Axis x{labeled.front().segment.center_along_track / 1000.0,
         labeled.back().segment.center_along_track / 1000.0};
  Axis y{labeled[0].segment.h_mean, labeled[0].segment.h_mean};
  for (std::size_t i = 0; i < labeled.size(); i += step) {
    y.lo = std::min(y.lo, labeled[i].segment.h_mean);
    y.hi = std::max(y.hi, labeled[i].segment.h_mean);
  }
  frame(s, x, y, "along-track distance (km)", "elevation (m)");
  for (std::size_t i = 0; i < labeled.size(); i += step) {
    const auto &seg = labeled[i].segment;
    s += "<circle cx=\"" +
         num(x.map(seg.center_along_track / 1000.0, kLeft, kWidth - kRight)) +
         "\" cy=\"" + num(y.map(seg.h_mean, kHeight - kBottom, kTop)) +
         "\" r=\"1.4\" fill=\"" + std::string(class_color(labeled[i].surface)) + "\"/>\n";
  }
  double ly = kTop + 12;
  for (auto c : {SurfaceClass::ThickIce, SurfaceClass::ThinIce, SurfaceClass::OpenWater,
                 SurfaceClass::Unlabeled}) {
    s += "<circle cx=\"" + num(kWidth - kRight - 110) + "\" cy=\"" + num(ly) +
         "\" r=\"4\" fill=\"" + std::string(class_color(c)) + "\"/>\n";
    s += "<text x=\"" + num(kWidth - kRight - 100) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + std::string(class_name(c)) +
         "</text>\n";
    ly += 16;
  }
  return s + "</svg>\n";
}

std::string histogram_svg(const surface::Histogram &h) {
  std::string s = header("Freeboard distribution");
  if (h.counts.empty())
    return s + "</svg>\n";
  const Axis x{h.left(0), h.right(h.counts.size() - 1)};
  const Axis y{0.0, static_cast<double>(*std::max_element(h.counts.begin(), h.counts.end()))};
  frame(s, x, y, "freeboard (m)", "segments");
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double px0 = x.map(h.left(i), kLeft, kWidth - kRight);
    const double px1 = x.map(h.right(i), kLeft, kWidth - kRight);
    const double py = y.map(static_cast<double>(h.counts[i]), kHeight - kBottom, kTop);
    s += "<rect x=\"" + num(px0) + "\" y=\"" + num(py) + "\" width=\"" +
         num(std::max(0.5, px1 - px0 - 0.5)) + "\" height=\"" +
         num(kHeight - kBottom - py) + "\" fill=\"#1f4e9c\"/>\n";
  }
  return s + "</svg>\n";
}

} // namespace floeberg::pipeline
