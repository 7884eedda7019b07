// SPDX-License-Identifier: Apache-2.0
#include "geo/projection.hpp"

#include "common/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace floeberg::geo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMaxInverseIterations = 20;
constexpr double kInverseTolerance = 1e-12; // radians

} // namespace

void StereoParams::validate() const {
  require(std::isfinite(semi_major_axis) && semi_major_axis > 0,
          ErrorKind::InvalidInput, "semi-major axis must be positive");
  require(std::isfinite(inverse_flattening) && inverse_flattening > 0,
          ErrorKind::InvalidInput, "inverse flattening must be positive");
  require(std::isfinite(standard_parallel) && standard_parallel > -90.0 &&
              standard_parallel < 0.0,
          ErrorKind::InvalidInput, "standard parallel must lie in (-90, 0)");
  require(std::isfinite(central_meridian) && central_meridian >= -180.0 &&
              central_meridian <= 180.0,
          ErrorKind::InvalidInput, "central meridian must lie in [-180, 180]");
}

SouthPolarStereographic::SouthPolarStereographic(const StereoParams &params)
    : params_(params) {
  params_.validate();
  const double f = 1.0 / params_.inverse_flattening;
  e_ = std::sqrt(f * (2.0 - f));
  lambda0_ = params_.central_meridian * kDeg;
  // Standard parallel mirrored into the northern aspect.
  const double phic = -params_.standard_parallel * kDeg;
  const double sinc = std::sin(phic);
  const double mc = std::cos(phic) / std::sqrt(1.0 - e_ * e_ * sinc * sinc);
  rho_scale_ = params_.semi_major_axis * mc / t_of(phic);
}

double SouthPolarStereographic::t_of(double phi) const {
  const double es = e_ * std::sin(phi);
  return std::tan(std::numbers::pi / 4.0 - phi / 2.0) /
         std::pow((1.0 - es) / (1.0 + es), e_ / 2.0);
}

ProjectedPoint SouthPolarStereographic::forward(GeoPoint p) const {
  require(std::isfinite(p.lat) && std::isfinite(p.lon), ErrorKind::InvalidInput,
          "non-finite coordinate");
  if (p.lat > 0.0)
    fail(ErrorKind::OutOfScope, "latitude " + std::to_string(p.lat) +
                                    " is north of the equator");
  require(p.lat >= -90.0, ErrorKind::InvalidInput, "latitude below -90");
  require(p.lon >= -180.0 && p.lon <= 180.0, ErrorKind::InvalidInput,
          "longitude outside [-180, 180]");
  if (p.lat == -90.0)
    return {0.0, 0.0};
  const double rho = rho_scale_ * t_of(-p.lat * kDeg);
  const double dl = p.lon * kDeg - lambda0_;
  return {rho * std::sin(dl), rho * std::cos(dl)};
}

GeoPoint SouthPolarStereographic::inverse(ProjectedPoint q) const {
  require(std::isfinite(q.x) && std::isfinite(q.y), ErrorKind::InvalidInput,
          "non-finite projected coordinate");
  const double rho = std::hypot(q.x, q.y);
  if (rho == 0.0)
    return {-90.0, params_.central_meridian};
  const double t = rho / rho_scale_;
  const double half_pi = std::numbers::pi / 2.0;
  double phi = half_pi - 2.0 * std::atan(t);
  bool converged = false;
  for (int it = 0; it < kMaxInverseIterations; ++it) {
    const double es = e_ * std::sin(phi);
    const double next =
        half_pi - 2.0 * std::atan(t * std::pow((1.0 - es) / (1.0 + es),
                                               e_ / 2.0));
    const double delta = std::fabs(next - phi);
    phi = next;
    if (delta < kInverseTolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    fail(ErrorKind::Numeric, "inverse projection did not converge");
  double lon = (lambda0_ + std::atan2(q.x, q.y)) / kDeg;
  if (lon > 180.0)
    lon -= 360.0;
  else if (lon <= -180.0)
    lon += 360.0;
  return {-phi / kDeg, lon};
}

ProjectedPoint project_forward(GeoPoint p, const StereoParams &params) {
  return SouthPolarStereographic(params).forward(p);
}

GeoPoint project_inverse(ProjectedPoint q, const StereoParams &params) {
  return SouthPolarStereographic(params).inverse(q);
}

} // namespace floeberg::geo
