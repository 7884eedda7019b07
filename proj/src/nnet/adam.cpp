// SPDX-License-Identifier: Apache-2.0
#include "nnet/adam.hpp"

#include "common/error.hpp"

#include <cmath>

namespace floeberg::nnet {

AdamState AdamState::for_parameters(const TensorList &params, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  return s;
}

void adam_step(AdamState &state, TensorList &params, const TensorList &grads) {
  require(params.size() == grads.size() && params.size() == state.m.size() &&
              params.size() == state.v.size(),
          ErrorKind::InvalidInput, "adam: tensor list sizes differ");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto &p = params[k].data;
    const auto &g = grads[k].data;
    auto &m = state.m[k].data;
    auto &v = state.v[k].data;
    require(p.size() == g.size() && p.size() == m.size() && p.size() == v.size(),
            ErrorKind::InvalidInput, "adam: tensor shapes differ");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  check_finite(params, "parameters after adam step");
}

} // namespace floeberg::nnet
