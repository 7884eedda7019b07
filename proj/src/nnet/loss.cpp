// SPDX-License-Identifier: Apache-2.0
#include "nnet/loss.hpp"

#include <algorithm>
#include <cmath>

namespace floeberg::nnet {

FocalLossParams FocalLossParams::inverse_frequency(std::span<const int> labels,
                                                   double gamma) {
  std::array<double, kClassCount> counts{};
  for (int c : labels)
    if (c >= 0 && c < kClassCount)
      counts[static_cast<std::size_t>(c)] += 1.0;
  FocalLossParams p;
  p.gamma = gamma;
  double sum = 0.0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    p.alpha[c] = 1.0 / std::max(counts[c], 1.0);
    sum += p.alpha[c];
  }
  const double mean = sum / kClassCount;
  for (auto &a : p.alpha)
    a /= mean;
  return p;
}

double focal_loss(std::span<const double> probs, int true_class,
                  const FocalLossParams &params) {
  const double p = std::max(probs[static_cast<std::size_t>(true_class)],
                            kProbabilityFloor);
  const double modulator = params.gamma == 0.0 ? 1.0 : std::pow(1.0 - p, params.gamma);
  return -params.alpha[static_cast<std::size_t>(true_class)] * modulator *
         std::log(p);
}

void focal_loss_logit_gradient(std::span<const double> probs, int true_class,
                               const FocalLossParams &params,
                               std::span<double> dlogits) {
  const auto c = static_cast<std::size_t>(true_class);
  const double p = probs[c];
  // dL/dz_j = dL/dp * p * (delta_cj - p_j), with
  // dL/dp * p = a g q^(g-1) p ln p - a q^g. Written this way the factor stays
  // finite as p -> 0 (limit -a), so a confidently wrong sample still pulls
  // its logit back; the floor only guards the logarithm.
  double scale = 0.0;
  if (p < 1.0) {
    const double q = 1.0 - p;
    const double a = params.alpha[c];
    const double qg = params.gamma == 0.0 ? 1.0 : std::pow(q, params.gamma);
    const double qg1 = params.gamma == 0.0 ? 0.0 : std::pow(q, params.gamma - 1.0);
    scale = a * params.gamma * qg1 * p * std::log(std::max(p, kProbabilityFloor)) -
            a * qg;
  }
  for (std::size_t j = 0; j < dlogits.size(); ++j)
    dlogits[j] = scale * ((j == c ? 1.0 : 0.0) - probs[j]);
}

} // namespace floeberg::nnet
