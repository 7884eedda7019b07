// SPDX-License-Identifier: Apache-2.0
#include "nnet/model.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floeberg::nnet {

namespace {

constexpr std::size_t H = kLstmUnits;
constexpr std::size_t G = 4 * kLstmUnits;
constexpr std::size_t F = ingest::kFeatureCount;

inline double sigmoid(double x) {
  if (x >= 0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
inline double elu(double x) { return x > 0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0 ? 1.0 : std::exp(x); }

struct StepCache {
  std::array<double, H> h_prev, c_prev, i, f, g, g_pre, o, c, elu_c;
};

struct DenseCache {
  std::vector<double> input;
  std::vector<double> pre;
};

/// Activations of one sample kept for the backward pass.
struct SampleCache {
  std::array<StepCache, kSequenceLength> steps;
  std::array<double, H> mask;
  std::vector<DenseCache> dense;
  Probabilities logits;
  Probabilities probs;
};

std::size_t first_dense_param(Architecture a) {
  return a == Architecture::Lstm ? 3 : 0;
}

void dense_forward(const Tensor &w, const Tensor &b, std::span<const double> x,
                   std::span<double> y) {
  const std::size_t out = b.size();
  std::copy(b.data.begin(), b.data.end(), y.begin());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double *row = w.data.data() + i * out;
    for (std::size_t j = 0; j < out; ++j)
      y[j] += xi * row[j];
  }
}

void softmax(const Probabilities &z, Probabilities &p) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < kClassCount; ++k) {
    p[k] = std::exp(z[k] - m);
    sum += p[k];
  }
  for (auto &v : p)
    v /= sum;
}

void forward_sample(const Model &model, const Window &x, SampleCache &cache,
                    bool training, Rng *rng) {
  const auto &P = model.parameters();
  const auto &layers = model.layers();
  std::vector<double> current;

  if (model.architecture() == Architecture::Lstm) {
    const Tensor &wx = P[0];
    const Tensor &wh = P[1];
    const Tensor &bias = P[2];
    std::array<double, H> h{}, c{};
    std::array<double, G> z;
    for (std::size_t t = 0; t < kSequenceLength; ++t) {
      StepCache &s = cache.steps[t];
      s.h_prev = h;
      s.c_prev = c;
      std::copy(bias.data.begin(), bias.data.end(), z.begin());
      for (std::size_t k = 0; k < F; ++k) {
        const double xk = x[t][k];
        const double *row = wx.data.data() + k * G;
        for (std::size_t j = 0; j < G; ++j)
          z[j] += xk * row[j];
      }
      for (std::size_t k = 0; k < H; ++k) {
        const double hk = h[k];
        const double *row = wh.data.data() + k * G;
        for (std::size_t j = 0; j < G; ++j)
          z[j] += hk * row[j];
      }
      for (std::size_t u = 0; u < H; ++u) {
        s.i[u] = sigmoid(z[u]);
        s.f[u] = sigmoid(z[H + u]);
        s.g_pre[u] = z[2 * H + u];
        s.g[u] = elu(s.g_pre[u]);
        s.o[u] = sigmoid(z[3 * H + u]);
        s.c[u] = s.f[u] * c[u] + s.i[u] * s.g[u];
        s.elu_c[u] = elu(s.c[u]);
        c[u] = s.c[u];
        h[u] = s.o[u] * s.elu_c[u];
      }
    }
    const bool drop = training && rng != nullptr && model.dropout > 0.0;
    const double keep_scale = drop ? 1.0 / (1.0 - model.dropout) : 1.0;
    current.resize(H);
    for (std::size_t u = 0; u < H; ++u) {
      cache.mask[u] = drop ? (rng->uniform() >= model.dropout ? keep_scale : 0.0)
                           : 1.0;
      current[u] = h[u] * cache.mask[u];
    }
  } else {
    current.assign(x[kWindowRadius].begin(), x[kWindowRadius].end());
  }

  const std::size_t first = first_dense_param(model.architecture());
  const std::size_t first_layer = model.architecture() == Architecture::Lstm ? 1 : 0;
  const std::size_t n_dense = layers.size() - first_layer;
  cache.dense.resize(n_dense);
  for (std::size_t d = 0; d < n_dense; ++d) {
    const LayerSpec &spec = layers[first_layer + d];
    DenseCache &dc = cache.dense[d];
    dc.input = current;
    dc.pre.resize(spec.units);
    dense_forward(P[first + 2 * d], P[first + 2 * d + 1], dc.input, dc.pre);
    current.resize(spec.units);
    switch (spec.activation) {
    case Activation::Elu:
      for (std::size_t j = 0; j < spec.units; ++j)
        current[j] = elu(dc.pre[j]);
      break;
    case Activation::Relu:
      for (std::size_t j = 0; j < spec.units; ++j)
        current[j] = dc.pre[j] > 0 ? dc.pre[j] : 0.0;
      break;
    case Activation::Softmax:
      for (std::size_t j = 0; j < kClassCount; ++j)
        cache.logits[j] = dc.pre[j];
      softmax(cache.logits, cache.probs);
      break;
    }
  }
}

void backward_sample(const Model &model, const Window &x,
                     const SampleCache &cache, std::span<const double> dlogits,
                     TensorList &grads) {
  const auto &P = model.parameters();
  const auto &layers = model.layers();
  const std::size_t first = first_dense_param(model.architecture());
  const std::size_t first_layer = model.architecture() == Architecture::Lstm ? 1 : 0;
  const std::size_t n_dense = layers.size() - first_layer;

  std::vector<double> dy(dlogits.begin(), dlogits.end());
  std::vector<double> dx;
  for (std::size_t d = n_dense; d-- > 0;) {
    const LayerSpec &spec = layers[first_layer + d];
    const DenseCache &dc = cache.dense[d];
    // dy arrives w.r.t. the activation output; move it to the pre-activation.
    switch (spec.activation) {
    case Activation::Elu:
      for (std::size_t j = 0; j < spec.units; ++j)
        dy[j] *= elu_grad(dc.pre[j]);
      break;
    case Activation::Relu:
      for (std::size_t j = 0; j < spec.units; ++j)
        dy[j] = dc.pre[j] > 0 ? dy[j] : 0.0;
      break;
    case Activation::Softmax:
      break; // dlogits is already w.r.t. the pre-softmax values
    }
    const Tensor &w = P[first + 2 * d];
    Tensor &gw = grads[first + 2 * d];
    Tensor &gb = grads[first + 2 * d + 1];
    const std::size_t out = spec.units;
    const std::size_t in = spec.inputs;
    dx.assign(in, 0.0);
    for (std::size_t j = 0; j < out; ++j)
      gb[j] += dy[j];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = dc.input[i];
      const double *row = w.data.data() + i * out;
      double *grow = gw.data.data() + i * out;
      double acc = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        grow[j] += xi * dy[j];
        acc += row[j] * dy[j];
      }
      dx[i] = acc;
    }
    dy.swap(dx);
  }

  if (model.architecture() != Architecture::Lstm)
    return;

  const Tensor &wh = P[1];
  Tensor &gwx = grads[0];
  Tensor &gwh = grads[1];
  Tensor &gb = grads[2];
  std::array<double, H> dh, dc{};
  for (std::size_t u = 0; u < H; ++u)
    dh[u] = dy[u] * cache.mask[u];
  std::array<double, G> dz;
  for (std::size_t t = kSequenceLength; t-- > 0;) {
    const StepCache &s = cache.steps[t];
    for (std::size_t u = 0; u < H; ++u) {
      const double d_o = dh[u] * s.elu_c[u];
      const double dcu = dc[u] + dh[u] * s.o[u] * elu_grad(s.c[u]);
      const double d_i = dcu * s.g[u];
      const double d_g = dcu * s.i[u];
      const double d_f = dcu * s.c_prev[u];
      dc[u] = dcu * s.f[u];
      dz[u] = d_i * s.i[u] * (1.0 - s.i[u]);
      dz[H + u] = d_f * s.f[u] * (1.0 - s.f[u]);
      dz[2 * H + u] = d_g * elu_grad(s.g_pre[u]);
      dz[3 * H + u] = d_o * s.o[u] * (1.0 - s.o[u]);
    }
    for (std::size_t j = 0; j < G; ++j)
      gb[j] += dz[j];
    for (std::size_t k = 0; k < F; ++k) {
      const double xk = x[t][k];
      double *grow = gwx.data.data() + k * G;
      for (std::size_t j = 0; j < G; ++j)
        grow[j] += xk * dz[j];
    }
    for (std::size_t k = 0; k < H; ++k) {
      const double hk = s.h_prev[k];
      const double *row = wh.data.data() + k * G;
      double *grow = gwh.data.data() + k * G;
      double acc = 0.0;
      for (std::size_t j = 0; j < G; ++j) {
        grow[j] += hk * dz[j];
        acc += row[j] * dz[j];
      }
      dh[k] = acc;
    }
  }
}

void check_shapes(const Model &model) {
  const auto &P = model.parameters();
  const auto &layers = model.layers();
  std::size_t p = 0;
  for (const auto &l : layers) {
    const bool ok =
        l.kind == LayerKind::Lstm
            ? p + 2 < P.size() && P[p].size() == l.inputs * 4 * l.units &&
                  P[p + 1].size() == l.units * 4 * l.units &&
                  P[p + 2].size() == 4 * l.units
            : p + 1 < P.size() && P[p].size() == l.inputs * l.units &&
                  P[p + 1].size() == l.units;
    require(ok, ErrorKind::InvalidInput,
            "parameter shapes do not match the layer chain");
    p += l.kind == LayerKind::Lstm ? 3 : 2;
  }
  require(p == P.size() && !layers.empty(), ErrorKind::InvalidInput,
          "parameter count does not match the layer chain");
}

void check_labels(std::span<const Window> batch, std::span<const int> labels) {
  require(batch.size() == labels.size(), ErrorKind::InvalidInput,
          "batch and label counts differ");
  for (int c : labels)
    require(c >= 0 && c < kClassCount, ErrorKind::InvalidInput,
            "label outside 0..2");
}

} // namespace

const char *to_string(Architecture a) {
  return a == Architecture::Lstm ? "lstm" : "mlp";
}

std::vector<LayerSpec> architecture_layers(Architecture a) {
  std::vector<LayerSpec> layers;
  if (a == Architecture::Mlp) {
    layers.push_back({LayerKind::Dense, F, kMlpUnits, Activation::Relu});
    layers.push_back({LayerKind::Dense, kMlpUnits, kClassCount,
                      Activation::Softmax});
    return layers;
  }
  layers.push_back({LayerKind::Lstm, F, H, Activation::Elu});
  std::uint32_t in = H;
  for (auto units : kLstmDenseUnits) {
    layers.push_back({LayerKind::Dense, in, static_cast<std::uint32_t>(units),
                      Activation::Elu});
    in = static_cast<std::uint32_t>(units);
  }
  layers.push_back({LayerKind::Dense, in, kClassCount, Activation::Softmax});
  return layers;
}

namespace {

TensorList shapes_for(const std::vector<LayerSpec> &layers) {
  TensorList params;
  for (const auto &l : layers) {
    if (l.kind == LayerKind::Lstm) {
      params.emplace_back(std::vector<std::size_t>{l.inputs, 4 * l.units});
      params.emplace_back(std::vector<std::size_t>{l.units, 4 * l.units});
      params.emplace_back(std::vector<std::size_t>{4 * l.units});
    } else {
      params.emplace_back(std::vector<std::size_t>{l.inputs, l.units});
      params.emplace_back(std::vector<std::size_t>{l.units});
    }
  }
  return params;
}

void glorot(Tensor &t, Rng &rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(t.shape[0] + t.shape[1]));
  for (auto &v : t.data)
    v = rng.uniform(-limit, limit);
}

} // namespace

Model Model::create(Architecture arch, std::uint64_t seed) {
  auto layers = architecture_layers(arch);
  TensorList params = shapes_for(layers);
  Rng rng(seed);
  std::size_t p = 0;
  for (const auto &l : layers) {
    if (l.kind == LayerKind::Lstm) {
      glorot(params[p], rng);
      glorot(params[p + 1], rng);
      for (std::size_t u = 0; u < l.units; ++u)
        params[p + 2][l.units + u] = 1.0;
      p += 3;
    } else {
      glorot(params[p], rng);
      p += 2;
    }
  }
  return Model(arch, std::move(layers), std::move(params));
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto &t : params_)
    n += t.size();
  return n;
}

Model model_from_parts(Architecture arch, std::vector<LayerSpec> layers,
                       TensorList params) {
  if (layers != architecture_layers(arch))
    fail(ErrorKind::ArchitectureMismatch,
         std::string("layer descriptor does not match the ") + to_string(arch) +
             " architecture");
  const TensorList expected = shapes_for(layers);
  require(params.size() == expected.size(), ErrorKind::ArchitectureMismatch,
          "parameter tensor count does not match the architecture");
  for (std::size_t i = 0; i < params.size(); ++i)
    require(params[i].shape == expected[i].shape &&
                params[i].data.size() == expected[i].data.size(),
            ErrorKind::ArchitectureMismatch,
            "parameter #" + std::to_string(i) + " has the wrong shape");
  return Model(arch, std::move(layers), std::move(params));
}

std::vector<Probabilities> forward(const Model &model,
                                   std::span<const Window> batch, bool training,
                                   Rng *dropout_rng) {
  check_shapes(model);
  std::vector<Probabilities> out(batch.size());
  SampleCache cache;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    forward_sample(model, batch[n], cache, training, dropout_rng);
    out[n] = cache.probs;
  }
  return out;
}

std::vector<Probabilities> logits(const Model &model,
                                  std::span<const Window> batch) {
  check_shapes(model);
  std::vector<Probabilities> out(batch.size());
  SampleCache cache;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    forward_sample(model, batch[n], cache, false, nullptr);
    out[n] = cache.logits;
  }
  return out;
}

double loss_and_gradients(const Model &model, std::span<const Window> batch,
                          std::span<const int> labels,
                          const FocalLossParams &loss, TensorList &grads,
                          bool training, Rng *dropout_rng,
                          std::vector<int> *predicted) {
  check_shapes(model);
  check_labels(batch, labels);
  grads = zeros_like(model.parameters());
  if (predicted)
    predicted->resize(batch.size());
  if (batch.empty())
    return 0.0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  SampleCache cache;
  std::array<double, kClassCount> dlogits;
  double total = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    forward_sample(model, batch[n], cache, training, dropout_rng);
    total += focal_loss(cache.probs, labels[n], loss);
    if (predicted)
      (*predicted)[n] = argmax(cache.probs);
    focal_loss_logit_gradient(cache.probs, labels[n], loss, dlogits);
    for (auto &g : dlogits)
      g *= inv_n;
    backward_sample(model, batch[n], cache, dlogits, grads);
  }
  return total * inv_n;
}

double batch_loss(const Model &model, std::span<const Window> batch,
                  std::span<const int> labels, const FocalLossParams &loss) {
  check_shapes(model);
  check_labels(batch, labels);
  if (batch.empty())
    return 0.0;
  SampleCache cache;
  double total = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    forward_sample(model, batch[n], cache, false, nullptr);
    total += focal_loss(cache.probs, labels[n], loss);
  }
  return total / static_cast<double>(batch.size());
}

int argmax(const Probabilities &p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

} // namespace floeberg::nnet
