// SPDX-License-Identifier: Apache-2.0
#include "nnet/tensor.hpp"

#include "common/error.hpp"

#include <cmath>
#include <string>

namespace floeberg::nnet {

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v))
      return false;
  return true;
}

TensorList zeros_like(const TensorList &like) {
  TensorList out;
  out.reserve(like.size());
  for (const auto &t : like)
    out.emplace_back(t.shape);
  return out;
}

std::vector<double> flatten(const TensorList &tensors) {
  std::size_t n = 0;
  for (const auto &t : tensors)
    n += t.size();
  std::vector<double> flat;
  flat.reserve(n);
  for (const auto &t : tensors)
    flat.insert(flat.end(), t.data.begin(), t.data.end());
  return flat;
}

void unflatten(std::span<const double> flat, TensorList &tensors) {
  std::size_t pos = 0;
  for (auto &t : tensors) {
    require(pos + t.size() <= flat.size(), ErrorKind::InvalidInput,
            "flat buffer shorter than the tensor list");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.size(),
                t.data.begin());
    pos += t.size();
  }
}

void check_finite(const TensorList &tensors, const char *what) {
  for (std::size_t i = 0; i < tensors.size(); ++i)
    if (!tensors[i].all_finite())
      fail(ErrorKind::Numeric,
           std::string("non-finite value in ") + what + " #" +
               std::to_string(i));
}

} // namespace floeberg::nnet
