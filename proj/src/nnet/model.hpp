// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/random.hpp"
#include "ingest/features.hpp"
#include "nnet/loss.hpp"
#include "nnet/tensor.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace floeberg::nnet {

inline constexpr std::size_t kSequenceLength = 5; // center +- 2
inline constexpr std::size_t kWindowRadius = 2;
inline constexpr std::size_t kLstmUnits = 16;
inline constexpr std::size_t kMlpUnits = 32;
inline constexpr std::array<std::size_t, 7> kLstmDenseUnits = {32, 96, 32, 16,
                                                               112, 48, 64};

using Window = std::array<ingest::FeatureVector, kSequenceLength>;
using Probabilities = std::array<double, kClassCount>;

enum class Architecture : std::uint32_t { Mlp = 1, Lstm = 2 };

const char *to_string(Architecture a);

enum class LayerKind : std::uint32_t { Dense = 1, Lstm = 2 };
enum class Activation : std::uint32_t { Softmax = 0, Relu = 1, Elu = 2 };

/// One entry of the architecture descriptor stored in model files.
struct LayerSpec {
  LayerKind kind;
  std::uint32_t inputs;
  std::uint32_t units;
  Activation activation;

  bool operator==(const LayerSpec &) const = default;
};

/// The fixed layer chain for each architecture.
std::vector<LayerSpec> architecture_layers(Architecture a);

/// A classifier with one of the two fixed architectures. Parameters are kept
/// in declaration order:
///   LSTM: kernel [6,64], recurrent kernel [16,64], bias [64] (gate blocks
///         input, forget, candidate, output), then W [in,out], b [out] for
///         every dense layer;
///   MLP:  W [6,32], b [32], W [32,3], b [3].
class Model {
public:
  Model() = default;
  /// Glorot-uniform weights, zero dense biases, LSTM forget bias 1.
  static Model create(Architecture arch, std::uint64_t seed);

  Architecture architecture() const noexcept { return arch_; }
  const std::vector<LayerSpec> &layers() const noexcept { return layers_; }

  TensorList &parameters() noexcept { return params_; }
  const TensorList &parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  ingest::Standardizer standardizer;
  FocalLossParams loss;
  double dropout = 0.2; // LSTM output, training only

  bool operator==(const Model &) const = default;

private:
  Model(Architecture arch, std::vector<LayerSpec> layers, TensorList params)
      : arch_(arch), layers_(std::move(layers)), params_(std::move(params)) {}

  friend Model model_from_parts(Architecture, std::vector<LayerSpec>,
                                TensorList);

  Architecture arch_ = Architecture::Mlp;
  std::vector<LayerSpec> layers_;
  TensorList params_;
};

/// Rebuilds a model from a descriptor and parameters, validating shapes.
Model model_from_parts(Architecture arch, std::vector<LayerSpec> layers,
                       TensorList params);

/// Class probabilities for every window. The LSTM unrolls all five steps
/// from a zero state; the MLP reads only the center vector. With `training`
/// set and a generator supplied, inverted dropout masks the LSTM output.
std::vector<Probabilities> forward(const Model &model,
                                   std::span<const Window> batch,
                                   bool training = false,
                                   Rng *dropout_rng = nullptr);

/// Pre-softmax outputs (inference mode).
std::vector<Probabilities> logits(const Model &model,
                                  std::span<const Window> batch);

/// Runs the forward pass and backpropagation (through time for the LSTM)
/// and writes mean-over-batch focal-loss gradients into `grads` (resized to
/// the parameter shapes). Returns the mean loss.
/// `predicted`, when given, receives the argmax class of every sample.
double loss_and_gradients(const Model &model, std::span<const Window> batch,
                          std::span<const int> labels,
                          const FocalLossParams &loss, TensorList &grads,
                          bool training = false, Rng *dropout_rng = nullptr,
                          std::vector<int> *predicted = nullptr);

/// Mean focal loss without gradients, inference mode.
double batch_loss(const Model &model, std::span<const Window> batch,
                  std::span<const int> labels, const FocalLossParams &loss);

int argmax(const Probabilities &p);

} // namespace floeberg::nnet
