// SPDX-License-Identifier: Apache-2.0
#include "runtime/runtime.hpp"

#include "common/text_io.hpp"

#include <algorithm>

namespace floeberg::runtime {

ChunkPlan partition_with_halo(std::size_t total, std::size_t workers,
                              std::size_t halo) {
  require(workers >= 1, ErrorKind::InvalidInput, "workers must be >= 1");
  ChunkPlan plan;
  plan.total = total;
  plan.halo = halo;
  plan.workers = workers;
  const std::size_t n = std::min(workers, total);
  if (n == 0)
    return plan;
  const std::size_t base = total / n;
  const std::size_t extra = total % n;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    Chunk c;
    c.id = i;
    c.core = {begin, begin + len};
    c.halo = {begin > halo ? begin - halo : 0,
              std::min(total, begin + len + halo)};
    plan.chunks.push_back(c);
    begin += len;
  }
  return plan;
}

std::size_t default_workers() {
  const auto n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

void run_tasks(std::size_t n, const std::function<void(std::size_t)> &task) {
  if (n == 0)
    return;
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      threads.emplace_back(guarded, i);
    guarded(n - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i])
      continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const JobError &) {
      throw;
    } catch (const Error &e) {
      throw JobError(e.kind(), i, e.what());
    } catch (const std::exception &e) {
      throw JobError(ErrorKind::Internal, i, e.what());
    } catch (...) {
      throw JobError(ErrorKind::Internal, i, "unknown failure");
    }
  }
}

void compute_speedups(std::span<BenchRow> rows) {
  if (rows.empty())
    return;
  const auto &base = rows.front().timings;
  for (auto &r : rows) {
    r.speedup_load =
        r.timings.load_s > 0 ? base.load_s / r.timings.load_s : 1.0;
    r.speedup_reduce =
        r.timings.reduce_s > 0 ? base.reduce_s / r.timings.reduce_s : 1.0;
  }
}

std::string bench_to_csv(std::span<const BenchRow> rows) {
  std::string out(kBenchHeader);
  out += '\n';
  for (const auto &r : rows) {
    io::append_int(out, static_cast<std::int64_t>(r.workers));
    for (double v : {r.timings.load_s, r.timings.map_s, r.timings.reduce_s,
                     r.speedup_load, r.speedup_reduce}) {
      out += ',';
      io::append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

} // namespace floeberg::runtime
