// SPDX-License-Identifier: Apache-2.0
#include "dtrain/dtrain.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"
#include "runtime/runtime.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <numeric>

namespace floeberg::dtrain {

void Channel::send(std::vector<double> msg) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || queue_.size() < capacity_; });
  require(!closed_, ErrorKind::Internal, "send on a closed channel");
  queue_.push_back(std::move(msg));
  cv_.notify_all();
}

std::vector<double> Channel::receive() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
  require(!queue_.empty(), ErrorKind::Internal, "receive on a closed channel");
  auto msg = std::move(queue_.front());
  queue_.pop_front();
  cv_.notify_all();
  return msg;
}

void Channel::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

WorkerGroup::WorkerGroup(std::size_t workers, std::size_t channel_capacity)
    : k_(workers), capacity_(channel_capacity) {
  require(workers >= 1, ErrorKind::InvalidInput, "worker count must be >= 1");
  require(channel_capacity >= 1, ErrorKind::InvalidInput,
          "channel capacity must be >= 1");
  reopen();
}

void WorkerGroup::reopen() {
  channels_.clear();
  for (std::size_t r = 0; r < k_; ++r)
    channels_.push_back(std::make_unique<Channel>(capacity_));
}

void WorkerGroup::send_right(std::size_t rank, std::vector<double> msg) {
  channels_[rank]->send(std::move(msg));
}

std::vector<double> WorkerGroup::receive_left(std::size_t rank) {
  return channels_[left(rank)]->receive();
}

void WorkerGroup::run(const std::function<void(std::size_t)> &fn) {
  reopen();
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_rank = 0;
  runtime::run_tasks(k_, [&](std::size_t rank) {
    try {
      fn(rank);
    } catch (...) {
      {
        std::lock_guard lock(mu);
        // The rank that failed first is the cause; peers then fail on the
        // closed channels.
        if (!first) {
          first = std::current_exception();
          first_rank = rank;
        }
      }
      for (auto &c : channels_)
        c->close();
    }
  });
  if (first) {
    try {
      std::rethrow_exception(first);
    } catch (const runtime::JobError &) {
      throw;
    } catch (const Error &e) {
      throw runtime::JobError(e.kind(), first_rank, e.what());
    } catch (const std::exception &e) {
      throw runtime::JobError(ErrorKind::Internal, first_rank, e.what());
    }
  }
}

void allreduce_mean_rank(WorkerGroup &group, std::size_t rank,
                         std::vector<double> &data, AllReduceStats *stats) {
  const std::size_t k = group.size();
  const std::size_t n = data.size();
  const std::size_t chunk = (n + k - 1) / k;
  const std::size_t padded = chunk * k;
  if (stats) {
    stats->length = n;
    stats->padded_length = padded;
    stats->steps = 2 * (k - 1);
    stats->elements_sent[rank] = 0;
  }
  if (k == 1)
    return;
  data.resize(padded, 0.0);
  auto slice = [&](std::size_t c) {
    return std::span<double>(data).subspan(c * chunk, chunk);
  };
  auto send = [&](std::size_t c) {
    const auto s = slice(c);
    group.send_right(rank, std::vector<double>(s.begin(), s.end()));
    if (stats)
      stats->elements_sent[rank] += chunk;
  };
  auto receive = [&] {
    auto msg = group.receive_left(rank);
    require(msg.size() == chunk, ErrorKind::InvalidInput,
            "all-reduce: ranks disagree on the tensor length");
    return msg;
  };

  // Scatter-reduce: after K-1 steps rank r holds the full sum of chunk r+1.
  for (std::size_t s = 0; s + 1 < k; ++s) {
    send((rank + k - s) % k);
    const auto in = receive();
    auto dst = slice((rank + 2 * k - s - 1) % k);
    for (std::size_t i = 0; i < chunk; ++i)
      dst[i] += in[i];
  }
  const std::size_t owned = (rank + 1) % k;
  for (double &x : slice(owned))
    x /= static_cast<double>(k);

  // Allgather: circulate the finished chunks.
  for (std::size_t s = 0; s + 1 < k; ++s) {
    send((rank + 1 + k - s) % k);
    const auto in = receive();
    std::copy(in.begin(), in.end(), slice((rank + k - s) % k).begin());
  }
  data.resize(n);
}

void broadcast_rank(WorkerGroup &group, std::size_t rank,
                    std::vector<double> &data) {
  const std::size_t k = group.size();
  if (k == 1)
    return;
  if (rank != 0) {
    auto in = group.receive_left(rank);
    require(in.size() == data.size(), ErrorKind::InvalidInput,
            "broadcast: ranks disagree on the tensor length");
    data = std::move(in);
  }
  if (rank + 1 < k)
    group.send_right(rank, data);
}

AllReduceStats ring_allreduce(WorkerGroup &group,
                              std::vector<std::vector<double>> &tensors) {
  require(tensors.size() == group.size(), ErrorKind::InvalidInput,
          "all-reduce needs one tensor per worker");
  for (const auto &t : tensors)
    require(t.size() == tensors[0].size(), ErrorKind::InvalidInput,
            "all-reduce tensors differ in length");
  AllReduceStats stats;
  stats.elements_sent.assign(group.size(), 0);
  group.run([&](std::size_t rank) {
    // Every rank writes the same scalars; only rank 0 is kept.
    AllReduceStats local;
    local.elements_sent.assign(group.size(), 0);
    allreduce_mean_rank(group, rank, tensors[rank], &local);
    stats.elements_sent[rank] = local.elements_sent[rank];
    if (rank == 0) {
      stats.length = local.length;
      stats.padded_length = local.padded_length;
      stats.steps = local.steps;
    }
  });
  return stats;
}

void broadcast_root(WorkerGroup &group, std::vector<nnet::Model> &replicas) {
  require(replicas.size() == group.size(), ErrorKind::InvalidInput,
          "broadcast needs one replica per worker");
  std::vector<std::vector<double>> flat(replicas.size());
  for (std::size_t r = 0; r < replicas.size(); ++r) {
    require(replicas[r].architecture() == replicas[0].architecture(),
            ErrorKind::ArchitectureMismatch,
            "broadcast replicas have different architectures");
    flat[r] = nnet::flatten(replicas[r].parameters());
  }
  group.run([&](std::size_t rank) { broadcast_rank(group, rank, flat[rank]); });
  for (std::size_t r = 1; r < replicas.size(); ++r) {
    nnet::unflatten(flat[r], replicas[r].parameters());
    replicas[r].standardizer = replicas[0].standardizer;
    replicas[r].loss = replicas[0].loss;
    replicas[r].dropout = replicas[0].dropout;
  }
}

std::uint64_t parameter_checksum(const nnet::Model &model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto &t : model.parameters())
    for (double x : t.data) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof x);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  return h;
}

namespace {

struct RankOutcome {
  double loss_sum = 0.0; // loss times samples
  std::size_t correct = 0;
};

// One rank's share of a synchronous step. `share` is this rank's sample
// count over the step total; gradients are scaled by K * share so that the
// ring mean equals the gradient of the mean loss over the union.
RankOutcome rank_step(WorkerGroup &group, std::size_t rank, nnet::Model &replica,
                      std::span<const nnet::Window> windows,
                      std::span<const int> labels, std::size_t step_total,
                      const nnet::FocalLossParams &loss, nnet::AdamState &adam,
                      Rng *dropout_rng, AllReduceStats *stats) {
  RankOutcome out;
  nnet::TensorList grads = nnet::zeros_like(replica.parameters());
  if (!windows.empty()) {
    std::vector<int> predicted;
    const double l =
        nnet::loss_and_gradients(replica, windows, labels, loss, grads,
                                 dropout_rng != nullptr, dropout_rng, &predicted);
    out.loss_sum = l * static_cast<double>(windows.size());
    for (std::size_t i = 0; i < predicted.size(); ++i)
      out.correct += predicted[i] == labels[i];
  }
  auto flat = nnet::flatten(grads);
  const std::size_t k = group.size();
  if (k > 1) {
    const double scale = static_cast<double>(k * windows.size()) /
                         static_cast<double>(step_total);
    for (double &g : flat)
      g *= scale;
  }
  allreduce_mean_rank(group, rank, flat, stats);
  nnet::unflatten(flat, grads);
  nnet::adam_step(adam, replica.parameters(), grads);
  return out;
}

void check_consistency(const std::vector<nnet::Model> &replicas,
                       std::uint64_t *checksum) {
  const auto ref = parameter_checksum(replicas[0]);
  for (std::size_t r = 1; r < replicas.size(); ++r)
    require(parameter_checksum(replicas[r]) == ref, ErrorKind::Consistency,
            "replica " + std::to_string(r) + " diverged from rank 0");
  if (checksum)
    *checksum = ref;
}

Rng rank_dropout_rng(std::uint64_t seed, std::size_t rank) {
  return Rng(seed ^ 0x9e3779b97f4a7c15ULL ^ (rank * 0xbf58476d1ce4e5b9ULL));
}

} // namespace

StepResult data_parallel_step(WorkerGroup &group,
                              std::vector<nnet::Model> &replicas,
                              std::span<const RankBatch> batches,
                              const nnet::FocalLossParams &loss,
                              std::vector<nnet::AdamState> &adam,
                              std::vector<Rng> *dropout_rngs) {
  const std::size_t k = group.size();
  require(replicas.size() == k && batches.size() == k && adam.size() == k,
          ErrorKind::InvalidInput,
          "data-parallel step needs one replica, batch and optimizer per worker");
  require(!dropout_rngs || dropout_rngs->size() == k, ErrorKind::InvalidInput,
          "one dropout generator per worker");
  check_consistency(replicas, nullptr);
  std::size_t total = 0;
  for (const auto &b : batches) {
    require(b.windows.size() == b.labels.size(), ErrorKind::InvalidInput,
            "window and label counts differ");
    total += b.windows.size();
  }
  require(total > 0, ErrorKind::InvalidInput, "data-parallel step without samples");

  StepResult result;
  result.allreduce.elements_sent.assign(k, 0);
  std::vector<RankOutcome> outcomes(k);
  std::vector<AllReduceStats> stats(k);
  group.run([&](std::size_t rank) {
    stats[rank].elements_sent.assign(k, 0);
    Rng *rng = dropout_rngs ? &(*dropout_rngs)[rank] : nullptr;
    outcomes[rank] = rank_step(group, rank, replicas[rank], batches[rank].windows,
                               batches[rank].labels, total, loss, adam[rank], rng,
                               &stats[rank]);
  });
  check_consistency(replicas, &result.checksum);

  result.allreduce.length = stats[0].length;
  result.allreduce.padded_length = stats[0].padded_length;
  result.allreduce.steps = stats[0].steps;
  double loss_sum = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    result.allreduce.elements_sent[r] = stats[r].elements_sent[r];
    loss_sum += outcomes[r].loss_sum;
    result.correct += outcomes[r].correct;
  }
  result.samples = total;
  result.loss = loss_sum / static_cast<double>(total);
  return result;
}

DistributedResult train_distributed(nnet::Model &model,
                                    std::span<const nnet::Window> windows,
                                    std::span<const int> labels,
                                    const DistributedConfig &config,
                                    const nnet::FocalLossParams &loss) {
  const auto &tc = config.train;
  require(windows.size() == labels.size(), ErrorKind::InvalidInput,
          "window and label counts differ");
  require(tc.batch_size >= 1, ErrorKind::InvalidInput, "batch size must be >= 1");
  WorkerGroup group(config.workers);
  const std::size_t k = group.size();

  DistributedResult result;
  model.loss = loss;
  model.dropout = tc.dropout;
  if (tc.epochs == 0)
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
  const std::size_t global_batch =
      config.batch_mode == BatchMode::Global ? tc.batch_size : tc.batch_size * k;
  if (config.batch_mode == BatchMode::Global && global_batch < k)
    result.warnings.push_back("global batch smaller than the worker count; "
                              "some ranks idle on every step");

  std::vector<nnet::Model> replicas(k, model);
  broadcast_root(group, replicas);
  std::vector<nnet::AdamState> adam;
  for (std::size_t r = 0; r < k; ++r)
    adam.push_back(nnet::AdamState::for_parameters(model.parameters(),
                                                   tc.learning_rate));
  std::vector<Rng> dropout_rngs;
  for (std::size_t r = 0; r < k; ++r)
    dropout_rngs.push_back(rank_dropout_rng(tc.seed, r));

  Rng shuffle_rng(tc.seed);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool use_dropout = tc.dropout > 0.0;

  runtime::Stopwatch clock;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    std::vector<RankOutcome> totals(k);
    // Ranks stay alive for the whole epoch and meet in every all-reduce.
    group.run([&](std::size_t rank) {
      std::vector<nnet::Window> shard;
      std::vector<int> shard_labels;
      for (std::size_t start = 0; start < order.size(); start += global_batch) {
        const std::size_t n = std::min(global_batch, order.size() - start);
        const std::size_t lo = start + rank * n / k;
        const std::size_t hi = start + (rank + 1) * n / k;
        shard.clear();
        shard_labels.clear();
        for (std::size_t i = lo; i < hi; ++i) {
          shard.push_back(windows[order[i]]);
          shard_labels.push_back(labels[order[i]]);
        }
        const auto o = rank_step(group, rank, replicas[rank], shard, shard_labels,
                                 n, loss, adam[rank],
                                 use_dropout ? &dropout_rngs[rank] : nullptr,
                                 nullptr);
        totals[rank].loss_sum += o.loss_sum;
        totals[rank].correct += o.correct;
      }
    });
    check_consistency(replicas, nullptr);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto &t : totals) {
      loss_sum += t.loss_sum;
      correct += t.correct;
    }
    const double n = static_cast<double>(order.size());
    result.history.push_back({epoch + 1, loss_sum / n, static_cast<double>(correct) / n});
    result.samples += order.size();
    result.steps += (order.size() + global_batch - 1) / global_batch;
  }
  result.time_s = clock.seconds();
  model.parameters() = replicas[0].parameters();
  return result;
}

ScalingRow scaling_row(std::size_t workers, const DistributedResult &r,
                       std::size_t epochs) {
  ScalingRow row;
  row.workers = workers;
  row.time_s = r.time_s;
  row.time_per_epoch_s = epochs ? r.time_s / static_cast<double>(epochs) : 0.0;
  row.samples_per_s =
      r.time_s > 0 ? static_cast<double>(r.samples) / r.time_s : 0.0;
  return row;
}

void compute_speedups(std::span<ScalingRow> rows) {
  if (rows.empty())
    return;
  const double base = rows[0].time_s;
  for (auto &r : rows)
    r.speedup = r.time_s > 0 ? base / r.time_s : 0.0;
}

std::string scaling_to_csv(std::span<const ScalingRow> rows) {
  std::string out(kScalingHeader);
  out += '\n';
  for (const auto &r : rows) {
    io::append_int(out, static_cast<std::int64_t>(r.workers));
    for (double v : {r.time_s, r.time_per_epoch_s, r.samples_per_s, r.speedup}) {
      out += ',';
      io::append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

} // namespace floeberg::dtrain
