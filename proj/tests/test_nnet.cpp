// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "common/error.hpp"
#include "common/random.hpp"
#include "nnet/adam.hpp"
#include "nnet/loss.hpp"
#include "nnet/model.hpp"
#include "nnet/model_io.hpp"
#include "nnet/train.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

using namespace floeberg;
using namespace floeberg::nnet;
using ingest::FeatureVector;

namespace {

std::vector<Window> random_windows(std::size_t n, Rng &rng) {
  std::vector<Window> out(n);
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

FeatureVector fv(double a) { return {a, a, a, a, a, a}; }

// Three well separated clusters in the first two features.
void separable(std::size_t n, std::uint64_t seed, std::vector<Window> &w,
               std::vector<int> &y) {
  Rng rng(seed);
  const double cx[3] = {-2.0, 2.0, 0.0};
  const double cy[3] = {-1.5, -1.5, 2.0};
  w.assign(n, {});
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    y[i] = c;
    FeatureVector v{};
    v[0] = cx[c] + 0.3 * rng.normal();
    v[1] = cy[c] + 0.3 * rng.normal();
    w[i].fill(v);
  }
}

} // namespace

TEST_CASE("build_sequences") {
  CHECK(build_sequences({}).empty());
  SUBCASE("single segment") {
    const std::vector<FeatureVector> f{fv(1.0)};
    const auto s = build_sequences(f);
    REQUIRE(s.size() == 1);
    for (const auto &v : s[0]) CHECK(v == fv(1.0));
  }
  SUBCASE("middle of five") {
    std::vector<FeatureVector> f;
    for (int i = 0; i < 5; ++i) f.push_back(fv(i));
    const auto s = build_sequences(f);
    for (int i = 0; i < 5; ++i) CHECK(s[2][i] == fv(i));
  }
  SUBCASE("seven segments, edge padding") {
    std::vector<FeatureVector> f;
    for (int i = 0; i < 7; ++i) f.push_back(fv(i));
    const auto s = build_sequences(f);
    REQUIRE(s.size() == 7);
    const int first[5] = {0, 0, 0, 1, 2};
    const int last[5] = {4, 5, 6, 6, 6};
    for (int i = 0; i < 5; ++i) {
      CHECK(s[0][i] == fv(first[i]));
      CHECK(s[6][i] == fv(last[i]));
    }
  }
  SUBCASE("gaps replicate the neighbor nearer the center") {
    std::vector<FeatureVector> f{fv(0), fv(1), fv(3), fv(4)};
    const std::vector<std::int64_t> idx{0, 1, 3, 4};
    const auto s = build_sequences(f, idx);
    // window of index 1: [-1, 0, 1, 2(gap), 3]
    const int want[5] = {0, 0, 1, 1, 3};
    for (int i = 0; i < 5; ++i) CHECK(s[1][i] == fv(want[i]));
  }
}

TEST_CASE("focal loss") {
  const FocalLossParams fl{};
  const std::array<double, 3> one{0.0, 1.0, 0.0};
  CHECK(focal_loss(one, 1, fl) == 0.0);
  const std::array<double, 3> half{0.5, 0.25, 0.25};
  CHECK(focal_loss(half, 0, fl) == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-15));
  CHECK(std::fabs(focal_loss(half, 0, fl) - 0.173287) < 5e-7);

  FocalLossParams ce;
  ce.gamma = 0.0;
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    const double s = a + b + c;
    const std::array<double, 3> p{a / s, b / s, c / s};
    const int cls = static_cast<int>(rng.index(3));
    CHECK(std::fabs(focal_loss(p, cls, ce) + std::log(p[cls])) < 1e-12);
  }
  std::array<double, 3> g{};
  focal_loss_logit_gradient(one, 1, fl, g);
  for (double x : g) CHECK(x == 0.0);

  // Below the probability floor the loss value is clamped, but the logit
  // gradient keeps its p -> 0 limit -alpha * (delta - p_j).
  FocalLossParams weighted;
  weighted.alpha = {1.0, 2.5, 1.0};
  const std::array<double, 3> wrong{1.0 - 1e-15, 1e-15, 0.0};
  focal_loss_logit_gradient(wrong, 1, weighted, g);
  CHECK(g[0] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(-2.5).epsilon(1e-9));
  CHECK(g[2] == 0.0);
  CHECK(focal_loss(wrong, 1, weighted) == doctest::Approx(-2.5 * std::log(1e-12)));

  const std::vector<int> labels{0, 0, 0, 1};
  const auto inv = FocalLossParams::inverse_frequency(labels);
  CHECK((inv.alpha[0] + inv.alpha[1] + inv.alpha[2]) / 3.0 == doctest::Approx(1.0));
  CHECK(inv.alpha[1] == doctest::Approx(3.0 * inv.alpha[0]));
}

TEST_CASE("forward pass") {
  Rng rng(1);
  const auto batch = random_windows(8, rng);
  for (auto arch : {Architecture::Mlp, Architecture::Lstm}) {
    auto m = Model::create(arch, 42);
    const auto p = forward(m, batch);
    for (const auto &row : p)
      CHECK(std::fabs(row[0] + row[1] + row[2] - 1.0) < 1e-12);
    const auto again = forward(m, batch);
    CHECK(p == again);

    for (auto &t : m.parameters()) t.zero();
    for (const auto &row : forward(m, batch))
      for (double x : row) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("shape mismatch") {
    auto m = Model::create(Architecture::Mlp, 1);
    std::vector<int> labels(3);
    TensorList g;
    CHECK_THROWS_AS(loss_and_gradients(m, batch, labels, {}, g), Error);
  }
  SUBCASE("argmax ignores a shared logit offset") {
    const Probabilities a{0.1, 2.0, -1.0};
    const Probabilities b{100.1, 102.0, 99.0};
    CHECK(argmax(a) == argmax(b));
  }
}

TEST_CASE("architectures") {
  const auto lstm = Model::create(Architecture::Lstm, 0);
  const auto &p = lstm.parameters();
  CHECK(p[0].shape == std::vector<std::size_t>{6, 64});
  CHECK(p[1].shape == std::vector<std::size_t>{16, 64});
  CHECK(p[2].shape == std::vector<std::size_t>{64});
  const std::size_t chain[] = {16, 32, 96, 32, 16, 112, 48, 64, 3};
  REQUIRE(p.size() == 3 + 2 * 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(p[3 + 2 * k].shape == std::vector<std::size_t>{chain[k], chain[k + 1]});
    CHECK(p[4 + 2 * k].shape == std::vector<std::size_t>{chain[k + 1]});
  }
  const auto mlp = Model::create(Architecture::Mlp, 0);
  CHECK(mlp.parameters()[0].shape == std::vector<std::size_t>{6, 32});
  CHECK(mlp.parameters()[2].shape == std::vector<std::size_t>{32, 3});
}

TEST_CASE("gradients match central differences") {
  Rng rng(17);
  const auto batch = random_windows(16, rng);
  const auto labels = random_labels(16, rng);
  FocalLossParams fl;
  fl.alpha = {0.7, 1.1, 1.2};
  for (auto arch : {Architecture::Mlp, Architecture::Lstm}) {
    const auto m = Model::create(arch, 5);
    CHECK(oracle::gradient_check(m, batch, labels, fl) < 1e-5);
  }
}

TEST_CASE("gradient properties") {
  Rng rng(2);
  const auto batch = random_windows(6, rng);
  const auto labels = random_labels(6, rng);
  const auto m = Model::create(Architecture::Lstm, 9);

  SUBCASE("doubling one alpha doubles that class's contribution") {
    for (int c = 0; c < 3; ++c) {
      std::vector<Window> only;
      std::vector<int> only_labels;
      for (std::size_t i = 0; i < batch.size(); ++i)
        if (labels[i] == c) {
          only.push_back(batch[i]);
          only_labels.push_back(c);
        }
      if (only.empty()) continue;
      FocalLossParams a, b;
      b.alpha[c] = 2.0;
      TensorList ga, gb;
      loss_and_gradients(m, only, only_labels, a, ga);
      loss_and_gradients(m, only, only_labels, b, gb);
      for (std::size_t k = 0; k < ga.size(); ++k)
        for (std::size_t i = 0; i < ga[k].size(); ++i)
          CHECK(gb[k][i] == 2.0 * ga[k][i]);
    }
  }
  SUBCASE("one-hot predictions give zero gradient") {
    auto z = Model::create(Architecture::Mlp, 1);
    for (auto &t : z.parameters()) t.zero();
    auto &out_bias = z.parameters()[3];
    out_bias[1] = 1e4;
    std::vector<int> ones(batch.size(), 1);
    TensorList g;
    loss_and_gradients(z, batch, ones, {}, g);
    for (const auto &t : g)
      for (double x : t.data) CHECK(x == 0.0);
  }
}

TEST_CASE("adam") {
  TensorList params{Tensor({1}, 1.0)};
  auto st = AdamState::for_parameters(params);
  TensorList grads{Tensor({1}, 0.5)};
  adam_step(st, params, grads);
  CHECK(st.t == 1);
  CHECK(std::fabs((params[0][0] - 1.0) - -0.003) < 1e-7);

  TensorList p2{Tensor({3}, 0.25)};
  auto s2 = AdamState::for_parameters(p2);
  adam_step(s2, p2, zeros_like(p2));
  CHECK(p2[0].data == std::vector<double>(3, 0.25));

  TensorList bad{Tensor({1}, 0.0)};
  auto s3 = AdamState::for_parameters(bad);
  CHECK_THROWS_AS(adam_step(s3, bad, {Tensor({1}, NAN)}), Error);
}

TEST_CASE("training") {
  std::vector<Window> w;
  std::vector<int> y;
  separable(300, 4, w, y);
  TrainConfig cfg;
  cfg.seed = 12;

  SUBCASE("separable set") {
    auto m = Model::create(Architecture::Mlp, 3);
    const auto r = train(m, w, y, cfg, {});
    REQUIRE(r.history.size() == 20);
    CHECK(r.history.back().loss < r.history.front().loss);
    CHECK(evaluate(m, w, y).accuracy >= 0.99);
    CHECK(r.warnings.empty());
  }
  SUBCASE("deterministic given the seed") {
    auto a = Model::create(Architecture::Lstm, 3);
    auto b = a;
    cfg.epochs = 2;
    train(a, w, y, cfg, {});
    train(b, w, y, cfg, {});
    CHECK(a == b);
  }
  SUBCASE("zero epochs") {
    auto m = Model::create(Architecture::Mlp, 3);
    const auto before = m;
    cfg.epochs = 0;
    CHECK(train(m, w, y, cfg, {}).history.empty());
    CHECK(m.parameters() == before.parameters());
  }
  SUBCASE("single-class set warns") {
    std::vector<int> same(w.size(), 2);
    auto m = Model::create(Architecture::Mlp, 3);
    cfg.epochs = 1;
    CHECK(!train(m, w, same, cfg, {}).warnings.empty());
  }
}

TEST_CASE("metrics") {
  const std::vector<int> truth{0, 0, 1, 2}, pred{0, 1, 1, 2};
  const auto m = metrics_from_predictions(truth, pred);
  CHECK(m.accuracy == 0.75);
  CHECK(m.recall[0] == 0.5);
  CHECK(m.recall[1] == 1.0);
  CHECK(m.recall[2] == 1.0);
  CHECK(m.confusion[0][1] == 1);
  CHECK(m.precision[1] == 0.5);
  CHECK(m.macro_recall == doctest::Approx(2.5 / 3.0));
  CHECK(m.micro_precision == 0.75);

  const auto perfect = metrics_from_predictions(truth, truth);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);

  const auto csv = metrics_to_csv(m);
  CHECK(csv.find("confusion,0,1,1") != std::string::npos);

  const auto model = Model::create(Architecture::Mlp, 0);
  CHECK_THROWS_AS(evaluate(model, {}, {}), Error);
}

TEST_CASE("model persistence") {
  Rng rng(8);
  const auto inputs = random_windows(1000, rng);
  const auto dir = std::filesystem::temp_directory_path() / "floeberg_nnet_test";
  std::filesystem::create_directories(dir);
  for (auto arch : {Architecture::Mlp, Architecture::Lstm}) {
    auto m = Model::create(arch, 77);
    m.standardizer.mean = {1, 2, 3, 4, 5, 6};
    m.loss.alpha = {0.5, 1.25, 1.25};
    const auto path = dir / (std::string(to_string(arch)) + ".bin");
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back == m);
    CHECK(forward(back, inputs) == forward(m, inputs));
  }
  const auto bytes = serialize_model(Model::create(Architecture::Mlp, 1));
  SUBCASE("truncated") {
    const std::span<const std::uint8_t> cut(bytes.data(), bytes.size() - 9);
    CHECK_THROWS_AS(deserialize_model(cut), Error);
  }
  SUBCASE("architecture mismatch") {
    try {
      deserialize_model(bytes, Architecture::Lstm);
      FAIL("expected an error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::ArchitectureMismatch);
    }
  }
  SUBCASE("bad magic") {
    auto copy = bytes;
    copy[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(copy), Error);
  }
  std::filesystem::remove_all(dir);
}
