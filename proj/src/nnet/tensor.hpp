// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace floeberg::nnet {

/// Dense row-major float64 array.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0)
      : shape(std::move(dims)), data(element_count(shape), fill) {}

  static std::size_t element_count(const std::vector<std::size_t> &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t size() const noexcept { return data.size(); }
  double &operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  std::span<double> span() { return data; }
  std::span<const double> span() const { return data; }

  void zero() { std::fill(data.begin(), data.end(), 0.0); }
  bool all_finite() const;
  bool same_shape(const Tensor &o) const { return shape == o.shape; }

  bool operator==(const Tensor &) const = default;
};

using TensorList = std::vector<Tensor>;

/// Zero tensors shaped like `like`.
TensorList zeros_like(const TensorList &like);

/// Concatenates every tensor's data in order.
std::vector<double> flatten(const TensorList &tensors);
/// Inverse of flatten; `flat` must hold at least the total element count.
void unflatten(std::span<const double> flat, TensorList &tensors);

/// Throws ErrorKind::Numeric naming `what` if any tensor holds NaN/Inf.
void check_finite(const TensorList &tensors, const char *what);

} // namespace floeberg::nnet
