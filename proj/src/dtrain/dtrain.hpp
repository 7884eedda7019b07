// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/random.hpp"
#include "nnet/adam.hpp"
#include "nnet/model.hpp"
#include "nnet/train.hpp"

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::dtrain {

/// Bounded FIFO of messages between two ranks. `close()` wakes every waiter;
/// later sends and receives on an empty closed channel fail.
class Channel {
public:
  explicit Channel(std::size_t capacity) : capacity_(capacity) {}
  void send(std::vector<double> msg);
  std::vector<double> receive();
  void close();

private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<double>> queue_;
  std::size_t capacity_;
  bool closed_ = false;
};

/// K simulated workers joined in a ring: rank r sends to (r + 1) mod K and
/// receives from (r - 1 + K) mod K.
class WorkerGroup {
public:
  explicit WorkerGroup(std::size_t workers, std::size_t channel_capacity = 2);

  std::size_t size() const noexcept { return k_; }
  std::size_t right(std::size_t rank) const { return (rank + 1) % k_; }
  std::size_t left(std::size_t rank) const { return (rank + k_ - 1) % k_; }

  void send_right(std::size_t rank, std::vector<double> msg);
  std::vector<double> receive_left(std::size_t rank);

  /// Runs fn(rank) on K concurrent contexts. A failing rank closes every
  /// channel so its peers cannot block forever; the first failure (by rank)
  /// is rethrown once all ranks have returned.
  void run(const std::function<void(std::size_t rank)> &fn);

private:
  void reopen();

  std::size_t k_;
  std::size_t capacity_;
  // channels_[r] carries messages from rank r to rank r + 1.
  std::vector<std::unique_ptr<Channel>> channels_;
};

struct AllReduceStats {
  std::size_t length = 0;        // N
  std::size_t padded_length = 0; // N rounded up to a multiple of K
  std::size_t steps = 0;         // 2 (K - 1)
  std::vector<std::size_t> elements_sent; // per rank
};

/// One rank's part of the ring all-reduce; every rank of the group must call
/// it concurrently with equal-length data. On return `data` holds the
/// element-wise mean, bit-identical on every rank. `stats` (may be null) is
/// filled for this rank only: steps, lengths and elements_sent[rank], which
/// must already be sized to K.
void allreduce_mean_rank(WorkerGroup &group, std::size_t rank,
                         std::vector<double> &data, AllReduceStats *stats);

/// Forwards rank 0's data around the ring; on return every rank holds a copy.
void broadcast_rank(WorkerGroup &group, std::size_t rank,
                    std::vector<double> &data);

/// Runs the all-reduce over per-rank tensors (one per worker).
AllReduceStats ring_allreduce(WorkerGroup &group,
                              std::vector<std::vector<double>> &tensors);

/// Overwrites every replica's parameters with those of replica 0.
void broadcast_root(WorkerGroup &group, std::vector<nnet::Model> &replicas);

/// FNV-1a over the raw parameter bytes.
std::uint64_t parameter_checksum(const nnet::Model &model);

/// Per-rank training input of one synchronous step.
struct RankBatch {
  std::vector<nnet::Window> windows;
  std::vector<int> labels;
};

struct StepResult {
  double loss = 0.0; // mean over all samples of the step
  std::size_t samples = 0;
  std::size_t correct = 0;
  AllReduceStats allreduce;
  std::uint64_t checksum = 0;
};

/// One synchronous data-parallel update. Each rank computes mean-reduced
/// gradients on its own batch, the ring averages them, and every rank applies
/// the same Adam step. Ranks are weighted by their share of the samples, so
/// unequal batches still reproduce the mean loss over their union. Replica
/// checksums are compared afterwards; a mismatch is a consistency error.
/// `dropout_rngs` (one per rank) enables training-mode dropout.
StepResult data_parallel_step(WorkerGroup &group,
                              std::vector<nnet::Model> &replicas,
                              std::span<const RankBatch> batches,
                              const nnet::FocalLossParams &loss,
                              std::vector<nnet::AdamState> &adam,
                              std::vector<Rng> *dropout_rngs = nullptr);

enum class BatchMode { Global, PerWorker };

struct DistributedConfig {
  std::size_t workers = 1;
  BatchMode batch_mode = BatchMode::Global;
  nnet::TrainConfig train; // batch_size is global or per worker per batch_mode
};

struct DistributedResult {
  std::vector<nnet::EpochStats> history;
  std::vector<std::string> warnings;
  double time_s = 0.0;
  std::size_t samples = 0; // sample-gradients computed over all epochs
  std::size_t steps = 0;
};

/// Synchronous data-parallel training on `config.workers` ranks. The sample
/// order per epoch is the same as single-process nnet::train, and each
/// global batch is cut into contiguous per-rank shards. With one worker the
/// result equals nnet::train exactly.
DistributedResult train_distributed(nnet::Model &model,
                                    std::span<const nnet::Window> windows,
                                    std::span<const int> labels,
                                    const DistributedConfig &config,
                                    const nnet::FocalLossParams &loss);

struct ScalingRow {
  std::size_t workers = 1;
  double time_s = 0.0;
  double time_per_epoch_s = 0.0;
  double samples_per_s = 0.0;
  double speedup = 1.0;
};

inline constexpr std::string_view kScalingHeader =
    "workers,time_s,time_per_epoch_s,samples_per_s,speedup";

ScalingRow scaling_row(std::size_t workers, const DistributedResult &r,
                       std::size_t epochs);
/// Fills speedup relative to the first row.
void compute_speedups(std::span<ScalingRow> rows);
std::string scaling_to_csv(std::span<const ScalingRow> rows);

} // namespace floeberg::dtrain
