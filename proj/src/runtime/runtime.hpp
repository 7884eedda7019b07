// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "common/error.hpp"

#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace floeberg::runtime {

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const Range &) const = default;
};

struct Chunk {
  std::size_t id = 0;
  Range core; // items this chunk is responsible for
  Range halo; // core widened by the plan's halo, clipped to [0, total)
};

struct ChunkPlan {
  std::size_t total = 0;
  std::size_t halo = 0;
  std::size_t workers = 1;
  std::vector<Chunk> chunks;
};

/// Near-equal core ranges (sizes differ by at most one), one per worker;
/// empty chunks are dropped when workers > total.
ChunkPlan partition_with_halo(std::size_t total, std::size_t workers,
                              std::size_t halo);

/// Wall-clock seconds per phase, in the column layout of the auto-labeling
/// scalability table: load (parse into memory), map (building the per-chunk
/// stage), reduce (the action: chunk tasks run on the pool and their partials
/// are combined in chunk order).
struct PhaseTimings {
  double load_s = 0.0;
  double map_s = 0.0;
  double reduce_s = 0.0;

  double total() const { return load_s + map_s + reduce_s; }
};

std::size_t default_workers();

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }
  void restart() { start_ = std::chrono::steady_clock::now(); }

private:
  std::chrono::steady_clock::time_point start_;
};

/// A chunk task failed; `kind()` is the kind of the original failure.
class JobError : public Error {
public:
  JobError(ErrorKind kind, std::size_t chunk_id, const std::string &what)
      : Error(kind, "chunk " + std::to_string(chunk_id) + ": " + what),
        chunk_id_(chunk_id) {}
  std::size_t chunk_id() const noexcept { return chunk_id_; }

private:
  std::size_t chunk_id_;
};

/// Runs `task(i)` for i in [0, n) on up to n threads (the calling thread
/// takes the last task). The first failure, by index, is rethrown as a
/// JobError after every task has finished.
void run_tasks(std::size_t n, const std::function<void(std::size_t)> &task);

/// Maps every chunk of the plan concurrently and folds the partials in chunk
/// order. `map_fn(const Chunk&) -> Partial`, `reduce_fn(std::vector<Partial>&&)`.
template <typename MapFn, typename ReduceFn>
auto parallel_map_reduce(const ChunkPlan &plan, MapFn &&map_fn,
                         ReduceFn &&reduce_fn, PhaseTimings *timings = nullptr) {
  using Partial = std::invoke_result_t<MapFn &, const Chunk &>;
  Stopwatch clock;
  // Stage construction: one deferred task per chunk.
  std::vector<Partial> partials(plan.chunks.size());
  std::vector<std::function<void()>> stage;
  stage.reserve(plan.chunks.size());
  for (std::size_t i = 0; i < plan.chunks.size(); ++i)
    stage.emplace_back([&, i] { partials[i] = map_fn(plan.chunks[i]); });
  const double map_s = clock.seconds();

  clock.restart();
  run_tasks(stage.size(), [&](std::size_t i) { stage[i](); });
  auto result = reduce_fn(std::move(partials));
  const double reduce_s = clock.seconds();
  if (timings) {
    timings->map_s = map_s;
    timings->reduce_s = reduce_s;
  }
  return result;
}

/// Convenience for the common "map every item, concatenate in order" job.
template <typename T, typename MapFn>
std::vector<T> parallel_transform(std::size_t total, std::size_t workers,
                                  MapFn &&item_fn,
                                  PhaseTimings *timings = nullptr) {
  const auto plan = partition_with_halo(total, workers, 0);
  return parallel_map_reduce(
      plan,
      [&](const Chunk &c) {
        std::vector<T> part;
        part.reserve(c.core.size());
        for (std::size_t i = c.core.begin; i < c.core.end; ++i)
          part.push_back(item_fn(i));
        return part;
      },
      [&](std::vector<std::vector<T>> &&parts) {
        std::vector<T> out;
        out.reserve(total);
        for (auto &p : parts)
          out.insert(out.end(), p.begin(), p.end());
        return out;
      },
      timings);
}

/// Splits `body` (CSV rows without the header) at line boundaries into one
/// piece per worker and parses the pieces concurrently with
/// `parse_piece(std::string_view piece) -> std::vector<Row>`.
/// Rows come back in file order.
template <typename Row, typename ParseFn>
std::vector<Row> parallel_parse(std::string_view body, std::size_t workers,
                                ParseFn &&parse_piece) {
  if (workers < 1)
    workers = 1;
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  for (std::size_t w = 0; w < workers && start < body.size(); ++w) {
    std::size_t end = body.size();
    if (w + 1 < workers) {
      end = start + (body.size() - start) / (workers - w);
      end = body.find('\n', end);
      end = end == std::string_view::npos ? body.size() : end + 1;
    }
    pieces.push_back(body.substr(start, end - start));
    start = end;
  }
  std::vector<std::vector<Row>> parts(pieces.size());
  run_tasks(pieces.size(),
            [&](std::size_t i) { parts[i] = parse_piece(pieces[i]); });
  std::size_t n = 0;
  for (auto &p : parts)
    n += p.size();
  std::vector<Row> out;
  out.reserve(n);
  for (auto &p : parts)
    out.insert(out.end(), std::make_move_iterator(p.begin()),
               std::make_move_iterator(p.end()));
  return out;
}

/// One row of the scaling report.
struct BenchRow {
  std::size_t workers = 1;
  PhaseTimings timings;
  double speedup_load = 1.0;
  double speedup_reduce = 1.0;
};

inline constexpr std::string_view kBenchHeader =
    "workers,load_s,map_s,reduce_s,speedup_load,speedup_reduce";

/// Fills the speedup columns relative to the first row.
void compute_speedups(std::span<BenchRow> rows);
std::string bench_to_csv(std::span<const BenchRow> rows);

} // namespace floeberg::runtime
