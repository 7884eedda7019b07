// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for the test suites. Nothing here calls
// into the code paths it is used to check.
#pragma once

#include "nnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace floeberg::oracle {

/// South-polar stereographic forward projection through the conformal
/// latitude chi: t = tan(pi/4 - chi/2), rho = a m_c t / t_c. Evaluated in
/// long double.
inline std::pair<double, double> snyder_south_polar(double lat_deg, double lon_deg,
                                                    double a = 6378137.0,
                                                    double inv_f = 298.257223563,
                                                    double lat_ts_deg = -70.0,
                                                    double lon0_deg = 0.0) {
  using L = long double;
  const L pi = std::numbers::pi_v<long double>;
  const L f = 1.0L / inv_f;
  const L e = std::sqrt(f * (2.0L - f));
  auto conformal = [&](L phi) {
    const L s = std::sin(phi);
    return 2.0L * std::atan(std::tan(pi / 4 + phi / 2) *
                            std::pow((1 - e * s) / (1 + e * s), e / 2)) -
           pi / 2;
  };
  // Mirror into the northern aspect.
  const L phi = -static_cast<L>(lat_deg) * pi / 180;
  const L phic = -static_cast<L>(lat_ts_deg) * pi / 180;
  const L t = std::tan(pi / 4 - conformal(phi) / 2);
  const L tc = std::tan(pi / 4 - conformal(phic) / 2);
  const L mc = std::cos(phic) / std::sqrt(1 - e * e * std::sin(phic) * std::sin(phic));
  const L rho = a * mc * t / tc;
  const L dl = (static_cast<L>(lon_deg) - lon0_deg) * pi / 180;
  return {static_cast<double>(rho * std::sin(dl)),
          static_cast<double>(rho * std::cos(dl))};
}

/// Lead height and variance by explicit double loops over the samples.
inline std::pair<double, double> naive_lead(const std::vector<double> &h,
                                            const std::vector<double> &var) {
  double hmin = h[0];
  for (double v : h)
    if (v < hmin)
      hmin = v;
  std::vector<double> w(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double z = (h[i] - hmin) / std::sqrt(var[i]);
    w[i] = std::exp(-z * z);
  }
  double est = 0.0, est_var = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j)
      denom += w[j];
    const double alpha = w[i] / denom;
    est += alpha * h[i];
    est_var += alpha * alpha * var[i];
  }
  return {est, est_var};
}

/// Inverse-variance combination of lead estimates by explicit double loops.
inline std::pair<double, double> naive_reference(const std::vector<double> &h,
                                                 const std::vector<double> &var) {
  double est = 0.0, est_var = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j)
      denom += 1.0 / var[j];
    const double alpha = (1.0 / var[i]) / denom;
    est += alpha * h[i];
    est_var += alpha * alpha * var[i];
  }
  return {est, est_var};
}

/// Central finite differences of the mean batch loss against analytic
/// gradients. For every parameter tensor up to `max_entries` coordinates are
/// probed (all of them for small tensors, an evenly strided subset
/// otherwise); the per-tensor error is ||a - n|| / max(||a||, ||n||) over
/// the probed coordinates, and the maximum over tensors is returned.
inline double gradient_check(const nnet::Model &model,
                             std::span<const nnet::Window> batch,
                             std::span<const int> labels,
                             const nnet::FocalLossParams &loss,
                             double step = 1e-6,
                             std::size_t max_entries = 256) {
  nnet::TensorList analytic;
  nnet::loss_and_gradients(model, batch, labels, loss, analytic, false,
                           nullptr);
  nnet::Model probe = model;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.parameters().size(); ++k) {
    auto &data = probe.parameters()[k].data;
    const std::size_t n = data.size();
    const std::size_t stride = n <= max_entries ? 1 : n / max_entries;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = nnet::batch_loss(probe, batch, labels, loss);
      data[i] = saved - step;
      const double down = nnet::batch_loss(probe, batch, labels, loss);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k].data[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double denom = std::sqrt(std::max(a2, n2));
    if (denom > 0)
      worst = std::max(worst, std::sqrt(diff2) / denom);
  }
  return worst;
}

} // namespace floeberg::oracle
