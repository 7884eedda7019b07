// SPDX-License-Identifier: Apache-2.0
#include "ingest/features.hpp"

#include "common/error.hpp"

#include <cmath>

namespace floeberg::ingest {

std::vector<FeatureVector> raw_features(std::span<const Segment> segments) {
  std::vector<FeatureVector> out;
  out.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment &s = segments[i];
    double d_rate = 0.0;
    double d_bg = 0.0;
    if (i > 0) {
      d_rate = s.photon_rate - segments[i - 1].photon_rate;
      d_bg = s.bg_rate_mean - segments[i - 1].bg_rate_mean;
    }
    out.push_back({s.h_mean, s.h_std, s.photon_rate, d_rate, s.bg_rate_mean,
                   d_bg});
  }
  return out;
}

Standardizer Standardizer::fit(std::span<const FeatureVector> rows) {
  Standardizer st;
  if (rows.empty())
    return st;
  const double n = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    double sum = 0.0;
    for (const auto &r : rows)
      sum += r[c];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto &r : rows)
      ss += (r[c] - mean) * (r[c] - mean);
    // Population std so the fitted column has unit variance exactly.
    const double sd = std::sqrt(ss / n);
    if (sd > 0.0 && std::isfinite(sd)) {
      st.mean[c] = mean;
      st.scale[c] = sd;
    } else {
      st.mean[c] = 0.0;
      st.scale[c] = 1.0;
    }
  }
  return st;
}

FeatureVector Standardizer::apply(const FeatureVector &raw) const {
  FeatureVector out;
  for (std::size_t c = 0; c < kFeatureCount; ++c)
    out[c] = (raw[c] - mean[c]) / scale[c];
  return out;
}

void Standardizer::apply_in_place(std::span<FeatureVector> rows) const {
  for (auto &r : rows)
    r = apply(r);
}

std::vector<FeatureVector> compute_features(std::span<const Segment> segments,
                                            const Standardizer &standardizer) {
  auto rows = raw_features(segments);
  standardizer.apply_in_place(rows);
  for (const auto &r : rows)
    for (double v : r)
      require(std::isfinite(v), ErrorKind::Numeric, "non-finite feature");
  return rows;
}

} // namespace floeberg::ingest
