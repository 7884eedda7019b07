// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nnet/adam.hpp"
#include "nnet/model.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace floeberg::nnet {

/// Length-5 context windows: the window of segment n is
/// [n-2, n-1, n, n+1, n+2]. A position past a track end, or whose segment is
/// missing from `indices` (a gap), repeats the neighbor one step closer to
/// the center. With empty `indices` the features are taken as contiguous.
std::vector<Window> build_sequences(std::span<const ingest::FeatureVector> features,
                                    std::span<const std::int64_t> indices = {});

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  double dropout = 0.2;
  double learning_rate = 0.003;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;     // mean per-sample focal loss over the epoch
  double accuracy = 0.0; // training accuracy of the in-epoch predictions
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::vector<std::string> warnings;
};

/// Mini-batch Adam on the focal loss, reshuffled every epoch from the seed.
/// Stores `loss` and `config.dropout` into the model.
TrainResult train(Model &model, std::span<const Window> windows,
                  std::span<const int> labels, const TrainConfig &config,
                  const FocalLossParams &loss);

inline constexpr std::string_view kHistoryHeader = "epoch,loss,accuracy";
std::string history_to_csv(std::span<const EpochStats> history);

/// Confusion matrix (rows = true class, columns = predicted) and the scores
/// derived from it. Macro averages skip classes that have neither samples
/// nor predictions.
struct Metrics {
  std::array<std::array<std::int64_t, kClassCount>, kClassCount> confusion{};
  std::int64_t total = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  std::array<double, kClassCount> precision{};
  std::array<double, kClassCount> recall{}; // the normalized diagonal
  std::array<double, kClassCount> f1{};
};

Metrics metrics_from_predictions(std::span<const int> truth,
                                 std::span<const int> predicted);

std::vector<int> predict(const Model &model, std::span<const Window> windows);

/// Argmax predictions scored against `labels`; empty input is an error.
Metrics evaluate(const Model &model, std::span<const Window> windows,
                 std::span<const int> labels);

/// "metric,value" rows followed by the confusion matrix as
/// "confusion,<true>,<predicted>,<count>" rows.
std::string metrics_to_csv(const Metrics &m);

/// Human-readable summary with the row-normalized confusion matrix.
std::string format_metrics(const Metrics &m);

} // namespace floeberg::nnet
