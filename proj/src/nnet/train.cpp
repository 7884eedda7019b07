// SPDX-License-Identifier: Apache-2.0
#include "nnet/train.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace floeberg::nnet {

std::vector<Window> build_sequences(std::span<const ingest::FeatureVector> features,
                                    std::span<const std::int64_t> indices) {
  require(indices.empty() || indices.size() == features.size(),
          ErrorKind::InvalidInput, "feature and index counts differ");
  const auto n = static_cast<std::ptrdiff_t>(features.size());
  auto index_of = [&](std::ptrdiff_t i) -> std::int64_t {
    return indices.empty() ? i : indices[static_cast<std::size_t>(i)];
  };
  std::vector<Window> out(features.size());
  constexpr auto R = static_cast<std::ptrdiff_t>(kWindowRadius);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Window &w = out[static_cast<std::size_t>(i)];
    w[kWindowRadius] = features[static_cast<std::size_t>(i)];
    const std::int64_t k = index_of(i);
    for (int dir : {-1, 1}) {
      for (std::ptrdiff_t d = 1; d <= R; ++d) {
        const std::ptrdiff_t slot = R + dir * d;
        const std::ptrdiff_t inner = R + dir * (d - 1);
        // Indices are sorted, so segment k + dir*d can only sit at list
        // position i + dir*m with m <= d.
        const ingest::FeatureVector *found = nullptr;
        for (std::ptrdiff_t m = 1; m <= d; ++m) {
          const std::ptrdiff_t j = i + dir * m;
          if (j < 0 || j >= n)
            break;
          if (index_of(j) == k + dir * d) {
            found = &features[static_cast<std::size_t>(j)];
            break;
          }
        }
        w[static_cast<std::size_t>(slot)] =
            found ? *found : w[static_cast<std::size_t>(inner)];
      }
    }
  }
  return out;
}

TrainResult train(Model &model, std::span<const Window> windows,
                  std::span<const int> labels, const TrainConfig &config,
                  const FocalLossParams &loss) {
  require(windows.size() == labels.size(), ErrorKind::InvalidInput,
          "window and label counts differ");
  require(config.batch_size >= 1, ErrorKind::InvalidInput,
          "batch size must be >= 1");
  TrainResult result;
  model.loss = loss;
  model.dropout = config.dropout;
  if (config.epochs == 0)
    return result;
  require(!windows.empty(), ErrorKind::InvalidInput,
          "training needs at least one labeled sequence");

  std::array<std::size_t, kClassCount> counts{};
  for (int c : labels)
    if (c >= 0 && c < kClassCount)
      ++counts[static_cast<std::size_t>(c)];
  if (std::count(counts.begin(), counts.end(), 0) == kClassCount - 1)
    result.warnings.push_back(
        "training set contains a single class; the classifier cannot learn "
        "to separate surfaces");

  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState adam = AdamState::for_parameters(model.parameters(),
                                             config.learning_rate);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Window> batch;
  std::vector<int> batch_labels;
  std::vector<int> predicted;
  TensorList grads;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(windows[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      const double l = loss_and_gradients(model, batch, batch_labels, loss,
                                          grads, true, &dropout_rng,
                                          &predicted);
      loss_sum += l * static_cast<double>(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k)
        correct += predicted[k] == batch_labels[k];
      adam_step(adam, model.parameters(), grads);
    }
    const double n = static_cast<double>(order.size());
    result.history.push_back({epoch + 1, loss_sum / n,
                              static_cast<double>(correct) / n});
  }
  return result;
}

std::string history_to_csv(std::span<const EpochStats> history) {
  std::string out(kHistoryHeader);
  out += '\n';
  for (const auto &e : history) {
    io::append_int(out, static_cast<std::int64_t>(e.epoch));
    out += ',';
    io::append_double(out, e.loss);
    out += ',';
    io::append_double(out, e.accuracy);
    out += '\n';
  }
  return out;
}

Metrics metrics_from_predictions(std::span<const int> truth,
                                 std::span<const int> predicted) {
  require(truth.size() == predicted.size(), ErrorKind::InvalidInput,
          "truth and prediction counts differ");
  require(!truth.empty(), ErrorKind::InvalidInput,
          "cannot score an empty evaluation set");
  Metrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < kClassCount && predicted[i] >= 0 &&
                predicted[i] < kClassCount,
            ErrorKind::InvalidInput, "class index outside 0..2");
    ++m.confusion[static_cast<std::size_t>(truth[i])]
                 [static_cast<std::size_t>(predicted[i])];
  }
  m.total = static_cast<std::int64_t>(truth.size());
  std::int64_t trace = 0;
  int active = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    trace += m.confusion[c][c];
    std::int64_t support = 0;
    std::int64_t predicted_c = 0;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      support += m.confusion[c][k];
      predicted_c += m.confusion[k][c];
    }
    const double tp = static_cast<double>(m.confusion[c][c]);
    m.precision[c] = predicted_c ? tp / static_cast<double>(predicted_c) : 0.0;
    m.recall[c] = support ? tp / static_cast<double>(support) : 0.0;
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr > 0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    if (support || predicted_c) {
      ++active;
      m.macro_precision += m.precision[c];
      m.macro_recall += m.recall[c];
      m.macro_f1 += m.f1[c];
    }
  }
  m.macro_precision /= active;
  m.macro_recall /= active;
  m.macro_f1 /= active;
  m.accuracy = static_cast<double>(trace) / static_cast<double>(m.total);
  // Single-label multiclass: micro precision = micro recall = accuracy.
  m.micro_precision = m.micro_recall = m.micro_f1 = m.accuracy;
  return m;
}

std::vector<int> predict(const Model &model, std::span<const Window> windows) {
  const auto probs = forward(model, windows, false, nullptr);
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = argmax(probs[i]);
  return out;
}

Metrics evaluate(const Model &model, std::span<const Window> windows,
                 std::span<const int> labels) {
  require(!windows.empty(), ErrorKind::InvalidInput,
          "cannot evaluate on an empty set");
  return metrics_from_predictions(labels, predict(model, windows));
}

std::string metrics_to_csv(const Metrics &m) {
  std::string out = "metric,value\n";
  auto row = [&](const char *name, double v) {
    out += name;
    out += ',';
    io::append_double(out, v);
    out += '\n';
  };
  row("accuracy", m.accuracy);
  row("macro_precision", m.macro_precision);
  row("macro_recall", m.macro_recall);
  row("macro_f1", m.macro_f1);
  row("micro_precision", m.micro_precision);
  row("micro_recall", m.micro_recall);
  row("micro_f1", m.micro_f1);
  static const char *recall_names[] = {"recall_thick_ice", "recall_thin_ice",
                                       "recall_open_water"};
  for (std::size_t c = 0; c < kClassCount; ++c)
    row(recall_names[c], m.recall[c]);
  for (std::size_t t = 0; t < kClassCount; ++t)
    for (std::size_t p = 0; p < kClassCount; ++p) {
      out += "confusion,";
      io::append_int(out, static_cast<std::int64_t>(t));
      out += ',';
      io::append_int(out, static_cast<std::int64_t>(p));
      out += ',';
      io::append_int(out, m.confusion[t][p]);
      out += '\n';
    }
  return out;
}

std::string format_metrics(const Metrics &m) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "accuracy %.4f  precision %.4f  recall %.4f  F1 %.4f  (n=%lld)\n",
                m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1,
                static_cast<long long>(m.total));
  out += buf;
  out += "true \\ predicted   thick      thin       water\n";
  static const char *names[] = {"thick ice  ", "thin ice   ", "open water "};
  for (std::size_t t = 0; t < kClassCount; ++t) {
    std::int64_t row_total = 0;
    for (auto v : m.confusion[t])
      row_total += v;
    out += names[t];
    out += "       ";
    for (std::size_t p = 0; p < kClassCount; ++p) {
      const double frac =
          row_total ? static_cast<double>(m.confusion[t][p]) / row_total : 0.0;
      std::snprintf(buf, sizeof buf, "%6.2f%%   ", 100.0 * frac);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

} // namespace floeberg::nnet
