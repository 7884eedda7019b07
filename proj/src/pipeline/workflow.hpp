// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autolabel/autolabel.hpp"
#include "dtrain/dtrain.hpp"
#include "nnet/model.hpp"
#include "nnet/train.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace floeberg::pipeline {

/// Independent sub-seed for one consumer of the run seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct TrainSettings {
  nnet::Architecture arch = nnet::Architecture::Lstm;
  nnet::TrainConfig train; // seed is ignored; derived from `seed`
  double train_fraction = 0.8;
  double gamma = 2.0;
  std::optional<std::array<double, kClassCount>> alpha; // unset: inverse frequency
  std::size_t train_workers = 1;
  dtrain::BatchMode batch_mode = dtrain::BatchMode::Global;
  std::uint64_t seed = 0;
};

/// Positions (into the labeled list) of the training and held-out segments.
/// Only labeled segments take part; the order is a seeded shuffle.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

Split split_labeled(std::span<const autolabel::LabeledSegment> labeled,
                    double train_fraction, std::uint64_t seed);

struct TrainOutcome {
  nnet::Model model;
  std::vector<nnet::EpochStats> history;
  std::vector<std::string> warnings;
  Split split;
  std::optional<nnet::Metrics> test_metrics; // unset when the test split is empty
  double seconds = 0.0;
};

/// Fits the standardizer on the training rows, builds context windows over
/// the whole track (unlabeled segments included), trains, and scores the
/// held-out split.
TrainOutcome train_classifier(std::span<const autolabel::LabeledSegment> labeled,
                              const TrainSettings &settings);

/// Standardized context windows for every segment of an ordered track.
std::vector<nnet::Window> track_windows(const nnet::Model &model,
                                        std::span<const ingest::Segment> segments);

/// Model inference over a track, chunk-parallel. Output order and values do
/// not depend on `workers`.
std::vector<autolabel::LabeledSegment>
classify_segments(const nnet::Model &model,
                  std::span<const ingest::Segment> segments, std::size_t workers);

} // namespace floeberg::pipeline
