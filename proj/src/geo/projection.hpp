// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace floeberg::geo {

/// Geodetic position, degrees. Southern Hemisphere only.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Position on the south-polar stereographic plane, meters. The origin is
/// the South Pole; +y points along the central meridian and +x along the
/// meridian 90 degrees east of it.
struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
};

struct StereoParams {
  double semi_major_axis = 6378137.0;
  double inverse_flattening = 298.257223563;
  double standard_parallel = -70.0;
  double central_meridian = 0.0;

  /// WGS84 with true scale at 70S, central meridian 0 (the EPSG:3976 grid).
  static StereoParams epsg3976() { return {}; }

  void validate() const;
};

/// Ellipsoidal south-polar stereographic projection with a standard parallel
/// (Snyder, "Map Projections: A Working Manual", eqs. 21-33 to 21-40 applied
/// to the southern aspect). Construction precomputes the per-ellipsoid
/// constants; instances are immutable and safe to share across threads.
class SouthPolarStereographic {
public:
  explicit SouthPolarStereographic(const StereoParams &params);

  ProjectedPoint forward(GeoPoint p) const;
  GeoPoint inverse(ProjectedPoint q) const;

  const StereoParams &params() const noexcept { return params_; }

private:
  // Snyder's isometric-latitude function t(phi) for phi measured toward the
  // projection pole.
  double t_of(double phi) const;

  StereoParams params_;
  double e_ = 0.0;
  double lambda0_ = 0.0;
  double rho_scale_ = 0.0; // a * m_c / t_c
};

ProjectedPoint project_forward(GeoPoint p, const StereoParams &params);
GeoPoint project_inverse(ProjectedPoint q, const StereoParams &params);

} // namespace floeberg::geo
