// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nnet/tensor.hpp"

#include <cstdint>

namespace floeberg::nnet {

struct AdamState {
  double lr = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  TensorList m;
  TensorList v;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(const TensorList &params, double lr = 0.003);

  bool operator==(const AdamState &) const = default;
};

/// One bias-corrected Adam update; increments t. Fails with
/// ErrorKind::Numeric if a parameter becomes non-finite.
void adam_step(AdamState &state, TensorList &params, const TensorList &grads);

} // namespace floeberg::nnet
