// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autolabel/autolabel.hpp"
#include "surface/surface.hpp"

#include <span>
#include <string>

namespace floeberg::pipeline {

/// Along-track elevation scatter colored by surface class. Long tracks are
/// thinned to at most `max_points` evenly spaced segments.
std::string elevation_scatter_svg(std::span<const autolabel::LabeledSegment> labeled,
                                  std::size_t max_points = 20000);

/// Bar chart of a freeboard histogram.
std::string histogram_svg(const surface::Histogram &h);

} // namespace floeberg::pipeline
