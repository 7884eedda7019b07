// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "common/error.hpp"
#include "runtime/runtime.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

using namespace floeberg;
using namespace floeberg::runtime;

TEST_CASE("partition_with_halo") {
  SUBCASE("two workers, halo one") {
    const auto p = partition_with_halo(10, 2, 1);
    REQUIRE(p.chunks.size() == 2);
    CHECK(p.chunks[0].core == Range{0, 5});
    CHECK(p.chunks[1].core == Range{5, 10});
    CHECK(p.chunks[0].halo == Range{0, 6});
    CHECK(p.chunks[1].halo == Range{4, 10});
  }
  SUBCASE("more workers than items") {
    const auto p = partition_with_halo(3, 8, 0);
    REQUIRE(p.chunks.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(p.chunks[i].core.size() == 1);
  }
  SUBCASE("zero halo") {
    const auto p = partition_with_halo(17, 4, 0);
    for (const auto &c : p.chunks) CHECK(c.core == c.halo);
  }
  SUBCASE("cores partition and sizes differ by at most one") {
    for (std::size_t total : {0u, 1u, 7u, 100u, 1001u})
      for (std::size_t w : {1u, 2u, 3u, 4u, 7u, 16u}) {
        const auto p = partition_with_halo(total, w, 3);
        std::size_t next = 0, lo = total, hi = 0;
        for (const auto &c : p.chunks) {
          CHECK(c.core.begin == next);
          next = c.core.end;
          lo = std::min(lo, c.core.size());
          hi = std::max(hi, c.core.size());
          CHECK(c.halo.begin == (c.core.begin >= 3 ? c.core.begin - 3 : 0));
          CHECK(c.halo.end == std::min(total, c.core.end + 3));
        }
        CHECK(next == total);
        if (!p.chunks.empty()) CHECK(hi - lo <= 1);
        CHECK(p.chunks.size() <= w);
      }
  }
  CHECK_THROWS_AS(partition_with_halo(10, 0, 0), Error);
}

TEST_CASE("parallel_map_reduce matches sequential application") {
  std::vector<double> data(10007);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::sin(0.37 * i);
  // Three-point moving average needs a halo of one.
  auto smooth = [&](std::size_t i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(data.size() - 1, i + 1);
    return (data[a] + data[i] + data[b]) / 3.0;
  };
  std::vector<double> seq(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) seq[i] = smooth(i);

  for (std::size_t w : {1u, 2u, 3u, 4u, 8u}) {
    PhaseTimings t;
    const auto plan = partition_with_halo(data.size(), w, 1);
    const auto out = parallel_map_reduce(
        plan,
        [&](const Chunk &c) {
          std::vector<double> part;
          for (std::size_t i = c.core.begin; i < c.core.end; ++i) part.push_back(smooth(i));
          return part;
        },
        [](std::vector<std::vector<double>> &&parts) {
          std::vector<double> all;
          for (auto &p : parts) all.insert(all.end(), p.begin(), p.end());
          return all;
        },
        &t);
    CHECK(out == seq);
    CHECK(t.map_s >= 0.0);
    CHECK(t.reduce_s >= 0.0);
  }
  const auto tr = parallel_transform<double>(data.size(), 4, smooth);
  CHECK(tr == seq);
}

TEST_CASE("chunk failures carry the chunk id") {
  const auto plan = partition_with_halo(100, 4, 0);
  try {
    parallel_map_reduce(
        plan,
        [](const Chunk &c) {
          if (c.id == 2) fail(ErrorKind::Numeric, "boom");
          return 0;
        },
        [](std::vector<int> &&) { return 0; });
    FAIL("expected a job error");
  } catch (const JobError &e) {
    CHECK(e.chunk_id() == 2);
    CHECK(e.kind() == ErrorKind::Numeric);
  }
}

TEST_CASE("run_tasks runs each task once") {
  std::vector<std::atomic<int>> hits(13);
  run_tasks(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto &h : hits) CHECK(h.load() == 1);
  run_tasks(0, [](std::size_t) { FAIL("no task expected"); });
}

TEST_CASE("parallel_parse keeps file order") {
  std::string body;
  for (int i = 0; i < 1000; ++i) body += std::to_string(i) + "\n";
  for (std::size_t w : {1u, 2u, 5u, 64u}) {
    const auto rows = parallel_parse<int>(body, w, [](std::string_view piece) {
      std::vector<int> out;
      std::size_t pos = 0;
      while (pos < piece.size()) {
        const auto nl = piece.find('\n', pos);
        out.push_back(std::stoi(std::string(piece.substr(pos, nl - pos))));
        pos = nl + 1;
      }
      return out;
    });
    REQUIRE(rows.size() == 1000);
    for (int i = 0; i < 1000; ++i) CHECK(rows[i] == i);
  }
}

TEST_CASE("bench report") {
  std::vector<BenchRow> rows(2);
  rows[0].workers = 1;
  rows[0].timings = {2.0, 0.1, 8.0};
  rows[1].workers = 4;
  rows[1].timings = {1.0, 0.1, 2.0};
  compute_speedups(rows);
  CHECK(rows[1].speedup_load == 2.0);
  CHECK(rows[1].speedup_reduce == 4.0);
  const auto csv = bench_to_csv(rows);
  CHECK(csv.rfind(std::string(kBenchHeader) + "\n", 0) == 0);
  CHECK(csv.find("\n4,1,0.1,2,2,4\n") != std::string::npos);
}
