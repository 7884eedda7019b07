// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ingest/photons.hpp"

#include <array>
#include <span>
#include <vector>

namespace floeberg::ingest {

inline constexpr std::size_t kFeatureCount = 6;

/// [h_mean, h_std, photon_rate, d_photon_rate, bg_rate_mean, d_bg_rate]
using FeatureVector = std::array<double, kFeatureCount>;

/// Unscaled feature rows. Rate deltas are recomputed from the ordered list,
/// so callers do not need to have run fill_deltas.
std::vector<FeatureVector> raw_features(std::span<const Segment> segments);

/// Per-column z-score fitted on training rows. A column with zero variance
/// is stored as (mean 0, scale 1) and therefore passes through unscaled.
struct Standardizer {
  FeatureVector mean{};
  FeatureVector scale{1, 1, 1, 1, 1, 1};

  static Standardizer identity() { return {}; }
  static Standardizer fit(std::span<const FeatureVector> rows);

  FeatureVector apply(const FeatureVector &raw) const;
  void apply_in_place(std::span<FeatureVector> rows) const;

  bool operator==(const Standardizer &) const = default;
};

/// raw_features followed by the given standardization.
std::vector<FeatureVector> compute_features(std::span<const Segment> segments,
                                            const Standardizer &standardizer);

} // namespace floeberg::ingest
