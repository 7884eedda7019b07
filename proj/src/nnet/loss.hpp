// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/surface_class.hpp"

#include <array>
#include <span>

namespace floeberg::nnet {

inline constexpr double kProbabilityFloor = 1e-12;

struct FocalLossParams {
  double gamma = 2.0;
  std::array<double, kClassCount> alpha{1.0, 1.0, 1.0};

  /// alpha_c proportional to 1/count_c, scaled to mean 1. Classes without
  /// samples count as one sample.
  static FocalLossParams inverse_frequency(std::span<const int> labels,
                                           double gamma = 2.0);

  bool operator==(const FocalLossParams &) const = default;
};

/// -alpha[c] * (1 - p_c)^gamma * ln(p_c), with p_c clamped to >= 1e-12.
double focal_loss(std::span<const double> probs, int true_class,
                  const FocalLossParams &params);

/// Gradient of focal_loss with respect to the pre-softmax logits, given the
/// softmax output `probs`. Written into `dlogits` (size 3).
void focal_loss_logit_gradient(std::span<const double> probs, int true_class,
                               const FocalLossParams &params,
                               std::span<double> dlogits);

} // namespace floeberg::nnet
