// SPDX-License-Identifier: Apache-2.0
#include "pipeline/workflow.hpp"

#include "common/error.hpp"
#include "common/random.hpp"
#include "ingest/features.hpp"
#include "runtime/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace floeberg::pipeline {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2, kSplitStream = 3 };
}

Split split_labeled(std::span<const autolabel::LabeledSegment> labeled,
                    double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::InvalidInput,
          "train fraction must lie in (0, 1)");
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < labeled.size(); ++i)
    if (is_labeled(labeled[i].surface))
      pos.push_back(i);
  Rng rng(derive_seed(seed, kSplitStream));
  rng.shuffle(pos);
  auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(pos.size())));
  if (n_train == 0 && !pos.empty())
    n_train = 1;
  Split s;
  s.train.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(pos.begin() + static_cast<std::ptrdiff_t>(n_train), pos.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<nnet::Window> track_windows(const nnet::Model &model,
                                        std::span<const ingest::Segment> segments) {
  const auto features = ingest::compute_features(segments, model.standardizer);
  std::vector<std::int64_t> idx(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i)
    idx[i] = segments[i].index;
  return nnet::build_sequences(features, idx);
}

TrainOutcome train_classifier(std::span<const autolabel::LabeledSegment> labeled,
                              const TrainSettings &settings) {
  TrainOutcome out;
  out.split = split_labeled(labeled, settings.train_fraction, settings.seed);
  require(!out.split.train.empty(), ErrorKind::InvalidInput,
          "no labeled segments to train on");

  const auto segments = autolabel::segments_of(labeled);
  const auto raw = ingest::raw_features(segments);
  std::vector<ingest::FeatureVector> train_rows;
  train_rows.reserve(out.split.train.size());
  for (auto i : out.split.train)
    train_rows.push_back(raw[i]);

  out.model = nnet::Model::create(settings.arch,
                                  derive_seed(settings.seed, kInitStream));
  out.model.standardizer = ingest::Standardizer::fit(train_rows);
  const auto windows = track_windows(out.model, segments);

  auto gather = [&](const std::vector<std::size_t> &pos, std::vector<nnet::Window> &w,
                    std::vector<int> &y) {
    w.clear();
    y.clear();
    for (auto i : pos) {
      w.push_back(windows[i]);
      y.push_back(class_index(labeled[i].surface));
    }
  };
  std::vector<nnet::Window> tw, vw;
  std::vector<int> ty, vy;
  gather(out.split.train, tw, ty);
  gather(out.split.test, vw, vy);

  nnet::FocalLossParams loss;
  loss.gamma = settings.gamma;
  if (settings.alpha)
    loss.alpha = *settings.alpha;
  else
    loss = nnet::FocalLossParams::inverse_frequency(ty, settings.gamma);

  nnet::TrainConfig tc = settings.train;
  tc.seed = derive_seed(settings.seed, kShuffleStream);
  runtime::Stopwatch clock;
  if (settings.train_workers <= 1) {
    auto r = nnet::train(out.model, tw, ty, tc, loss);
    out.history = std::move(r.history);
    out.warnings = std::move(r.warnings);
  } else {
    dtrain::DistributedConfig dc;
    dc.workers = settings.train_workers;
    dc.batch_mode = settings.batch_mode;
    dc.train = tc;
    auto r = dtrain::train_distributed(out.model, tw, ty, dc, loss);
    out.history = std::move(r.history);
    out.warnings = std::move(r.warnings);
  }
  out.seconds = clock.seconds();
  if (!vw.empty())
    out.test_metrics = nnet::evaluate(out.model, vw, vy);
  return out;
}

std::vector<autolabel::LabeledSegment>
classify_segments(const nnet::Model &model,
                  std::span<const ingest::Segment> segments, std::size_t workers) {
  const auto windows = track_windows(model, segments);
  const auto plan = runtime::partition_with_halo(windows.size(), workers, 0);
  const auto classes = runtime::parallel_map_reduce(
      plan,
      [&](const runtime::Chunk &c) {
        return nnet::predict(model, std::span<const nnet::Window>(windows).subspan(
                                        c.core.begin, c.core.size()));
      },
      [](std::vector<std::vector<int>> &&parts) {
        std::vector<int> all;
        for (auto &p : parts)
          all.insert(all.end(), p.begin(), p.end());
        return all;
      });
  std::vector<autolabel::LabeledSegment> out(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out[i].segment = segments[i];
    out[i].surface = class_from_index(classes[i]);
    out[i].source = autolabel::LabelSource::Auto;
  }
  return out;
}

} // namespace floeberg::pipeline
