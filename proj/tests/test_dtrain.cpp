// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "common/error.hpp"
#include "dtrain/dtrain.hpp"
#include "runtime/runtime.hpp"

#include <cmath>

using namespace floeberg;
using namespace floeberg::dtrain;

namespace {

std::vector<nnet::Window> random_windows(std::size_t n, Rng &rng) {
  std::vector<nnet::Window> out(n);
  for (auto &w : out)
    for (auto &v : w)
      for (auto &x : v) x = rng.normal();
  return out;
}

std::vector<int> random_labels(std::size_t n, Rng &rng) {
  std::vector<int> out(n);
  for (auto &l : out) l = static_cast<int>(rng.index(3));
  return out;
}

double max_weight_diff(const nnet::Model &a, const nnet::Model &b) {
  const auto fa = nnet::flatten(a.parameters());
  const auto fb = nnet::flatten(b.parameters());
  double worst = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i)
    worst = std::max(worst, std::fabs(fa[i] - fb[i]));
  return worst;
}

} // namespace

TEST_CASE("ring all-reduce") {
  SUBCASE("mean of three constant vectors") {
    WorkerGroup g(3);
    std::vector<std::vector<double>> t{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    const auto s = ring_allreduce(g, t);
    for (const auto &v : t) CHECK(v == std::vector<double>{2, 2, 2});
    CHECK(s.steps == 4);
    for (auto e : s.elements_sent) CHECK(e == 4);
  }
  SUBCASE("single worker is the identity") {
    WorkerGroup g(1);
    std::vector<std::vector<double>> t{{0.1, -7.0, 3.5}};
    const auto before = t;
    const auto s = ring_allreduce(g, t);
    CHECK(t == before);
    CHECK(s.steps == 0);
    CHECK(s.elements_sent[0] == 0);
  }
  SUBCASE("random sizes and worker counts") {
    Rng rng(99);
    for (std::size_t k = 1; k <= 8; ++k) {
      WorkerGroup g(k);
      for (int rep = 0; rep < 3; ++rep) {
        const std::size_t n = 1 + rng.index(2000);
        std::vector<std::vector<double>> t(k, std::vector<double>(n));
        for (auto &v : t)
          for (auto &x : v) x = rng.uniform(-1.0, 1.0);
        std::vector<double> mean(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (const auto &v : t) mean[i] += v[i];
          mean[i] /= static_cast<double>(k);
        }
        const auto s = ring_allreduce(g, t);
        for (std::size_t r = 0; r < k; ++r) {
          CHECK(t[r].size() == n);
          CHECK(t[r] == t[0]);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::fabs(t[0][i] - mean[i]));
        CHECK(err < 1e-12);
        const std::size_t padded = (n + k - 1) / k * k;
        CHECK(s.padded_length == padded);
        for (auto e : s.elements_sent) CHECK(e * k == 2 * (k - 1) * padded);
      }
    }
  }
  SUBCASE("length mismatch") {
    WorkerGroup g(2);
    std::vector<std::vector<double>> t{{1, 2}, {1}};
    CHECK_THROWS_AS(ring_allreduce(g, t), Error);
  }
}

TEST_CASE("a failing rank does not hang its peers") {
  WorkerGroup g(4);
  try {
    g.run([&](std::size_t rank) {
      if (rank == 2) fail(ErrorKind::Numeric, "rank failure");
      std::vector<double> v(10, 1.0);
      allreduce_mean_rank(g, rank, v, nullptr);
    });
    FAIL("expected a job error");
  } catch (const runtime::JobError &e) {
    CHECK(e.chunk_id() == 2);
    CHECK(e.kind() == ErrorKind::Numeric);
  }
  // The group is usable again afterwards.
  std::vector<std::vector<double>> t(4, std::vector<double>(5, 2.0));
  ring_allreduce(g, t);
  CHECK(t[3][4] == 2.0);
}

TEST_CASE("broadcast_root") {
  std::vector<nnet::Model> one{nnet::Model::create(nnet::Architecture::Mlp, 1)};
  const auto before = one[0];
  WorkerGroup g1(1);
  broadcast_root(g1, one);
  CHECK(one[0] == before);

  std::vector<nnet::Model> r;
  for (std::uint64_t s = 0; s < 4; ++s)
    r.push_back(nnet::Model::create(nnet::Architecture::Lstm, 10 + s));
  CHECK(parameter_checksum(r[1]) != parameter_checksum(r[0]));
  WorkerGroup g(4);
  broadcast_root(g, r);
  for (const auto &m : r) CHECK(m.parameters() == r[0].parameters());
}

TEST_CASE("data-parallel step") {
  Rng rng(5);
  const auto w = random_windows(32, rng);
  const auto y = random_labels(32, rng);
  const nnet::FocalLossParams fl;
  const auto init = nnet::Model::create(nnet::Architecture::Lstm, 21);

  SUBCASE("K workers match one worker on the union") {
    for (std::size_t k : {2u, 4u}) {
      nnet::Model single = init;
      auto single_adam = nnet::AdamState::for_parameters(single.parameters());
      std::vector<nnet::Model> rep(k, init);
      std::vector<nnet::AdamState> adam(k, single_adam);
      WorkerGroup g(k);
      for (int step = 0; step < 10; ++step) {
        nnet::TensorList grads;
        nnet::loss_and_gradients(single, w, y, fl, grads);
        nnet::adam_step(single_adam, single.parameters(), grads);

        std::vector<RankBatch> b(k);
        for (std::size_t i = 0; i < w.size(); ++i) {
          b[i * k / w.size()].windows.push_back(w[i]);
          b[i * k / w.size()].labels.push_back(y[i]);
        }
        const auto res = data_parallel_step(g, rep, b, fl, adam);
        CHECK(res.samples == 32);
        for (const auto &m : rep) CHECK(parameter_checksum(m) == res.checksum);
      }
      CHECK(max_weight_diff(single, rep[0]) < 1e-9);
    }
  }
  SUBCASE("single worker equals a plain step exactly") {
    nnet::Model single = init;
    auto a = nnet::AdamState::for_parameters(single.parameters());
    nnet::TensorList grads;
    nnet::loss_and_gradients(single, w, y, fl, grads);
    nnet::adam_step(a, single.parameters(), grads);
    std::vector<nnet::Model> rep{init};
    std::vector<nnet::AdamState> adam{nnet::AdamState::for_parameters(init.parameters())};
    WorkerGroup g(1);
    const std::vector<RankBatch> b{{w, y}};
    data_parallel_step(g, rep, b, fl, adam);
    CHECK(rep[0].parameters() == single.parameters());
  }
  SUBCASE("diverged replicas are rejected") {
    std::vector<nnet::Model> rep{init, nnet::Model::create(nnet::Architecture::Lstm, 22)};
    std::vector<nnet::AdamState> adam(2, nnet::AdamState::for_parameters(init.parameters()));
    WorkerGroup g(2);
    const std::vector<RankBatch> b{{w, y}, {w, y}};
    try {
      data_parallel_step(g, rep, b, fl, adam);
      FAIL("expected a consistency error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::Consistency);
    }
  }
}

TEST_CASE("distributed training") {
  Rng rng(6);
  const auto w = random_windows(150, rng);
  const auto y = random_labels(150, rng);
  const auto init = nnet::Model::create(nnet::Architecture::Mlp, 4);
  nnet::TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 31;

  nnet::Model plain = init;
  const auto ref = nnet::train(plain, w, y, tc, {});
  nnet::Model one = init;
  const auto r1 = train_distributed(one, w, y, {1, BatchMode::Global, tc}, {});
  CHECK(one.parameters() == plain.parameters());
  REQUIRE(r1.history.size() == 3);
  CHECK(r1.history[2].loss == ref.history[2].loss);

  tc.dropout = 0.0;
  nnet::Model a = init, b = init;
  train_distributed(a, w, y, {1, BatchMode::Global, tc}, {});
  const auto r4 = train_distributed(b, w, y, {4, BatchMode::Global, tc}, {});
  CHECK(max_weight_diff(a, b) < 1e-9);
  CHECK(r4.steps == 3 * 5);

  std::vector<ScalingRow> rows{scaling_row(1, r1, 3), scaling_row(4, r4, 3)};
  compute_speedups(rows);
  CHECK(rows[0].speedup == 1.0);
  CHECK(scaling_to_csv(rows).rfind(std::string(kScalingHeader) + "\n", 0) == 0);
}
