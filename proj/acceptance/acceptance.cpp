// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 1 4 8`.
#include "autolabel/autolabel.hpp"
#include "common/random.hpp"
#include "dtrain/dtrain.hpp"
#include "geo/projection.hpp"
#include "ingest/photons.hpp"
#include "ingest/synthetic.hpp"
#include "nnet/model_io.hpp"
#include "nnet/train.hpp"
#include "pipeline/workflow.hpp"
#include "runtime/runtime.hpp"
#include "support/oracles.hpp"
#include "surface/surface.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

using namespace floeberg;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char *title;
  double budget_s;
  std::function<Verdict()> run;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) {
  const double d = std::max(std::fabs(a), std::fabs(b));
  return d == 0.0 ? 0.0 : std::fabs(a - b) / d;
}

std::vector<nnet::Window> random_windows(std::size_t n, Rng &rng) {
  std::vector<nnet::Window> out(n);
  for (auto &w : out)
    for (auto &v : w)
      for (auto &x : v)
        x = rng.normal();
  return out;
}

std::vector<int> random_labels(std::size_t n, Rng &rng) {
  std::vector<int> out(n);
  for (auto &l : out)
    l = static_cast<int>(rng.index(kClassCount));
  return out;
}

// A lead as the surface module sees it: heights near a sea level with
// per-sample variances from 2 m segment statistics.
void random_lead(Rng &rng, std::vector<double> &h, std::vector<double> &v) {
  const std::size_t n = 1 + rng.index(40);
  const double level = rng.uniform(-1.0, 1.0);
  h.resize(n);
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = level + 0.05 * rng.normal();
    const double s = rng.uniform(0.02, 0.2);
    v[i] = s * s / static_cast<double>(1 + rng.index(80));
  }
}

// ---- 1 ----------------------------------------------------------------------
Verdict estimator_oracle() {
  Rng rng(101);
  double worst_lead = 0.0, worst_ref = 0.0;
  std::vector<double> h, v;
  for (int rep = 0; rep < 10000; ++rep) {
    random_lead(rng, h, v);
    std::vector<surface::LeadSample> s(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
      s[i] = {h[i], v[i]};
    const auto e = surface::lead_height(s);
    const auto [oh, ov] = oracle::naive_lead(h, v);
    worst_lead = std::max({worst_lead, rel(e.h, oh), rel(e.sigma_sq, ov)});
  }
  for (int rep = 0; rep < 10000; ++rep) {
    random_lead(rng, h, v);
    std::vector<surface::Lead> leads(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      leads[i].h_lead = h[i];
      leads[i].sigma_sq_lead = v[i];
    }
    const auto e = surface::window_reference(leads, surface::Method::NasaWeighted);
    const auto [oh, ov] = oracle::naive_reference(h, v);
    worst_ref = std::max({worst_ref, rel(e.h, oh), rel(e.sigma_sq, ov)});
  }
  std::vector<surface::Lead> example(2);
  example[0].h_lead = 0.0;
  example[0].sigma_sq_lead = 0.01;
  example[1].h_lead = 0.1;
  example[1].sigma_sq_lead = 0.04;
  const auto ex = surface::window_reference(example, surface::Method::NasaWeighted);
  const bool exact = ex.h == 0.02 && ex.sigma_sq == 0.008 &&
                     ex.sigma_sq == 1.0 / (1.0 / 0.01 + 1.0 / 0.04);
  return {worst_lead < 1e-12 && worst_ref < 1e-12 && exact,
          fmt("max rel err lead %.2e, window %.2e (tol 1e-12); example h_ref=%.17g "
              "sigma^2=%.17g",
              worst_lead, worst_ref, ex.h, ex.sigma_sq)};
}

// ---- 2 ----------------------------------------------------------------------
Verdict estimator_properties() {
  Rng rng(202);
  std::size_t convex_bad = 0, shift_bad = 0;
  double worst_shift = 0.0;
  std::vector<double> h, v;
  for (int rep = 0; rep < 100000; ++rep) {
    random_lead(rng, h, v);
    // Dyadic inputs make the shifted heights and their differences exact.
    for (auto &x : h)
      x = std::ldexp(std::round(std::ldexp(x, 30)), -30);
    const double c = std::ldexp(std::round(std::ldexp(rng.uniform(-50.0, 50.0), 20)), -20);
    std::vector<surface::LeadSample> s(h.size()), t(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      s[i] = {h[i], v[i]};
      t[i] = {h[i] + c, v[i]};
    }
    const auto e = surface::lead_height(s);
    const auto lo = *std::min_element(h.begin(), h.end());
    const auto hi = *std::max_element(h.begin(), h.end());
    convex_bad += !(lo <= e.h && e.h <= hi);
    const auto f = surface::lead_height(t);
    // Equality up to the rounding of one addition at the shifted magnitude.
    const double scale = std::max(std::fabs(c), std::fabs(hi)) + std::fabs(lo);
    const double err = std::fabs(f.h - (e.h + c)) / scale;
    worst_shift = std::max(worst_shift, err);
    shift_bad += !(err < 1e-12 && f.sigma_sq == e.sigma_sq);
  }
  return {convex_bad == 0 && shift_bad == 0,
          fmt("10^5 leads: convexity violations %zu; shift violations %zu (sigma^2 "
              "bit-equal, h within 1e-12 of scale, worst %.2e)",
              convex_bad, shift_bad, worst_shift)};
}

// ---- 3 ----------------------------------------------------------------------
Verdict gradient_check() {
  Rng rng(303);
  double worst[2] = {0.0, 0.0};
  nnet::FocalLossParams loss;
  loss.gamma = 2.0;
  loss.alpha = {0.6, 1.1, 1.3};
  for (auto arch : {nnet::Architecture::Mlp, nnet::Architecture::Lstm}) {
    const auto model = nnet::Model::create(arch, 17);
    for (int b = 0; b < 5; ++b) {
      const auto w = random_windows(16, rng);
      const auto y = random_labels(16, rng);
      const double e = oracle::gradient_check(model, w, y, loss, 1e-6);
      auto &slot = worst[arch == nnet::Architecture::Lstm];
      slot = std::max(slot, e);
    }
  }
  return {worst[0] < 1e-5 && worst[1] < 1e-5,
          fmt("5 batches x 16: max rel err MLP %.2e, LSTM %.2e (tol 1e-5)", worst[0],
              worst[1])};
}

// ---- 4 ----------------------------------------------------------------------
Verdict allreduce() {
  Rng rng(404);
  double worst = 0.0;
  std::size_t count_bad = 0, runs = 0;
  for (std::size_t k = 1; k <= 8; ++k) {
    dtrain::WorkerGroup group(k);
    for (int rep = 0; rep < 6; ++rep) {
      const std::size_t n = rep == 0 ? 1 : rep == 1 ? 10000 : 1 + rng.index(10000);
      std::vector<std::vector<double>> t(k, std::vector<double>(n));
      std::vector<long double> sum(n, 0.0L);
      for (auto &x : t)
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = rng.normal() * 10.0;
          sum[i] += x[i];
        }
      const auto stats = dtrain::ring_allreduce(group, t);
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t i = 0; i < n; ++i) {
          const double mean = static_cast<double>(sum[i] / static_cast<long double>(k));
          worst = std::max(worst, std::fabs(t[r][i] - mean));
        }
      // Exactly 2(K-1)/K of the padded payload leaves every worker.
      bool ok = stats.padded_length % k == 0 && stats.padded_length >= n &&
                stats.padded_length < n + k && stats.elements_sent.size() == k;
      for (auto sent : stats.elements_sent)
        ok = ok && sent * k == 2 * (k - 1) * stats.padded_length;
      count_bad += !ok;
      ++runs;
    }
  }
  return {worst < 1e-12 && count_bad == 0,
          fmt("%zu runs, K=1..8, N up to 10^4: max |err| %.2e (tol 1e-12); element "
              "count mismatches %zu",
              runs, worst, count_bad)};
}

// ---- 5 ----------------------------------------------------------------------
Verdict data_parallel() {
  Rng rng(505);
  const nnet::FocalLossParams loss;
  const auto init = nnet::Model::create(nnet::Architecture::Lstm, 55);
  std::string detail;
  bool pass = true;
  for (std::size_t k : {2u, 4u}) {
    nnet::Model single = init;
    auto single_adam = nnet::AdamState::for_parameters(single.parameters());
    std::vector<nnet::Model> rep(k, init);
    std::vector<nnet::AdamState> adam(k, single_adam);
    dtrain::WorkerGroup group(k);
    Rng data(rng.bits());
    for (int step = 0; step < 10; ++step) {
      const auto w = random_windows(32, data);
      const auto y = random_labels(32, data);
      nnet::TensorList grads;
      nnet::loss_and_gradients(single, w, y, loss, grads);
      nnet::adam_step(single_adam, single.parameters(), grads);
      std::vector<dtrain::RankBatch> b(k);
      for (std::size_t i = 0; i < w.size(); ++i) {
        b[i * k / w.size()].windows.push_back(w[i]);
        b[i * k / w.size()].labels.push_back(y[i]);
      }
      dtrain::data_parallel_step(group, rep, b, loss, adam);
    }
    const auto a = nnet::flatten(single.parameters());
    double worst = 0.0;
    for (const auto &m : rep) {
      const auto f = nnet::flatten(m.parameters());
      for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - f[i]));
    }
    pass = pass && worst < 1e-9;
    detail += fmt("%sK=%zu max |dw| %.2e", detail.empty() ? "" : ", ", k, worst);
  }
  return {pass, detail + " after 10 steps of global batch 32, dropout off (tol 1e-9)"};
}

// ---- 6 ----------------------------------------------------------------------
Verdict end_to_end() {
  const auto params = geo::StereoParams::epsg3976();
  const auto spec = ingest::random_track_spec(100000.0, 2024);
  const auto track = ingest::synthesize_track(spec, params);
  const auto segments = ingest::resample_2m(track.photons);
  const auto raster = ingest::rasterize_truth(spec, params);
  const std::size_t workers = runtime::default_workers();
  const auto labeled =
      autolabel::label_parallel(segments, raster, {}, params, workers).labeled;

  pipeline::TrainSettings settings; // LSTM, lr 0.003, batch 32, 20 epochs, 80/20
  settings.seed = 7;
  const auto outcome = pipeline::train_classifier(labeled, settings);
  const double acc = outcome.test_metrics ? outcome.test_metrics->accuracy : 0.0;

  // Accuracy on the held-out split against the generator's classes as well.
  const auto classified = pipeline::classify_segments(outcome.model, segments, workers);
  std::size_t agree = 0;
  for (auto i : outcome.split.test)
    agree += classified[i].surface ==
             track.true_class[static_cast<std::size_t>(segments[i].index)];
  const double truth_acc =
      static_cast<double>(agree) / static_cast<double>(outcome.split.test.size());

  const auto profile = surface::build_profile(classified, {}, workers);
  const auto fb = surface::compute_freeboard(classified, profile, workers);
  double abs_sum = 0.0;
  for (const auto &r : fb)
    abs_sum += std::fabs(r.h_f - track.true_freeboard[static_cast<std::size_t>(r.index)]);
  const double mae = abs_sum / static_cast<double>(fb.size());
  std::size_t photons_per_seg = track.photons.size() / segments.size();
  return {acc >= 0.95 && mae < 0.05,
          fmt("%zu segments (~%zu photons each), held-out accuracy %.4f vs labels, "
              "%.4f vs generator (min 0.95); freeboard MAE %.4f m (max 0.05)",
              segments.size(), photons_per_seg, acc, truth_acc, mae)};
}

// ---- 7 ----------------------------------------------------------------------
Verdict parallel_determinism() {
  const auto params = geo::StereoParams::epsg3976();
  const std::size_t n = 1000000;
  const auto spec = ingest::random_track_spec(2.0 * n, 77);
  const auto segments = ingest::synthesize_segments(spec, params);
  const auto raster = ingest::rasterize_truth(spec, params);

  std::vector<autolabel::LabeledSegment> ref_labeled;
  surface::SeaSurfaceProfile ref_profile;
  std::vector<surface::FreeboardRecord> ref_fb;
  double reduce1 = 0.0, reduce4 = 0.0;
  bool identical = true;
  std::string timing;
  for (std::size_t k : {1u, 2u, 4u}) {
    auto job = autolabel::label_parallel(segments, raster, {}, params, k);
    runtime::PhaseTimings st;
    const auto profile = surface::build_profile(job.labeled, {}, k, &st);
    const auto fb = surface::compute_freeboard(job.labeled, profile, k, &st);
    if (k == 1) {
      ref_labeled = std::move(job.labeled);
      ref_profile = profile;
      ref_fb = fb;
      reduce1 = job.timings.reduce_s;
    } else {
      identical = identical && job.labeled == ref_labeled && profile == ref_profile &&
                  fb == ref_fb;
    }
    if (k == 4)
      reduce4 = job.timings.reduce_s;
    timing += fmt(" w%zu reduce %.3fs", k, job.timings.reduce_s);
  }
  const double speedup = reduce1 / reduce4;
  const unsigned cores = std::thread::hardware_concurrency();
  std::string speed;
  bool pass = identical && segments.size() == n;
  if (cores >= 4) {
    pass = pass && speedup >= 2.5;
    speed = fmt("reduce speedup at 4 workers %.2fx (min 2.5)", speedup);
  } else {
    speed = fmt("reduce speedup at 4 workers %.2fx; speedup clause not applicable "
                "(host has %u hardware thread%s, clause requires >= 4)",
                speedup, cores, cores == 1 ? "" : "s");
  }
  return {pass, fmt("%zu segments, labels/profile/freeboard bit-identical for "
                    "workers 1,2,4: %s;%s; %s",
                    segments.size(), identical ? "yes" : "NO", timing.c_str(),
                    speed.c_str())};
}

// ---- 8 ----------------------------------------------------------------------
Verdict projection() {
  const auto params = geo::StereoParams::epsg3976();
  const geo::SouthPolarStereographic proj(params);
  double worst_rt = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double lat = -89.0 + 34.0 * i / 99.0;
      const double lon = -180.0 + 360.0 * j / 100.0;
      const auto back = proj.inverse(proj.forward({lat, lon}));
      double dlon = std::fabs(back.lon - lon);
      dlon = std::min(dlon, 360.0 - dlon);
      worst_rt = std::max({worst_rt, std::fabs(back.lat - lat), dlon});
    }
  bool pole = true;
  for (double lon : {-180.0, -45.0, 0.0, 90.0, 179.0}) {
    const auto q = proj.forward({-90.0, lon});
    pole = pole && q.x == 0.0 && q.y == 0.0;
  }
  Rng rng(808);
  double worst_oracle = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double lat = rng.uniform(-89.0, -55.0), lon = rng.uniform(-180.0, 180.0);
    const auto q = proj.forward({lat, lon});
    const auto [ox, oy] = oracle::snyder_south_polar(lat, lon);
    worst_oracle = std::max({worst_oracle, std::fabs(q.x - ox), std::fabs(q.y - oy)});
  }
  return {worst_rt < 1e-6 && pole && worst_oracle < 1e-3,
          fmt("round trip max %.2e deg on 10^4 grid (tol 1e-6); pole -> (0,0): %s; "
              "oracle max %.2e m at 20 points (tol 1e-3)",
              worst_rt, pole ? "yes" : "NO", worst_oracle)};
}

// ---- 9 ----------------------------------------------------------------------
Verdict metrics() {
  const std::vector<int> truth{0, 0, 1, 2}, pred{0, 1, 1, 2};
  const auto m = nnet::metrics_from_predictions(truth, pred);
  const bool hand = m.accuracy == 0.75 && m.recall[0] == 0.5 && m.recall[1] == 1.0 &&
                    m.recall[2] == 1.0;

  // evaluate emits a 3x3 confusion matrix whose row-normalized diagonal is
  // the per-class recall.
  Rng rng(909);
  const auto w = random_windows(300, rng);
  const auto y = random_labels(300, rng);
  const auto model = nnet::Model::create(nnet::Architecture::Lstm, 9);
  const auto e = nnet::evaluate(model, w, y);
  const auto p = nnet::predict(model, w);
  bool structure = e.total == 300;
  std::int64_t cells = 0;
  for (int t = 0; t < kClassCount; ++t) {
    std::int64_t row = 0;
    for (int q = 0; q < kClassCount; ++q) {
      std::int64_t expect = 0;
      for (std::size_t i = 0; i < y.size(); ++i)
        expect += y[i] == t && p[i] == q;
      structure = structure && e.confusion[t][q] == expect;
      row += e.confusion[t][q];
    }
    cells += row;
    if (row > 0)
      structure = structure &&
                  e.recall[t] == static_cast<double>(e.confusion[t][t]) /
                                     static_cast<double>(row);
  }
  structure = structure && cells == 300;
  const auto text = nnet::format_metrics(e);
  structure = structure && text.find("thick ice") != std::string::npos &&
              text.find("open water") != std::string::npos;
  return {hand && structure,
          fmt("hand case accuracy %.17g, recalls [%.17g, %.17g, %.17g]; evaluate "
              "confusion 3x3 with recall diagonal: %s",
              m.accuracy, m.recall[0], m.recall[1], m.recall[2],
              structure ? "yes" : "NO")};
}

// ---- 10 ---------------------------------------------------------------------
Verdict persistence() {
  Rng rng(1010);
  const auto inputs = random_windows(1000, rng);
  const auto labels = random_labels(1000, rng);
  const auto dir = std::filesystem::temp_directory_path() /
                   ("floeberg_acceptance_" + std::to_string(rng.bits() % 100000));
  std::filesystem::create_directories(dir);
  bool ok = true;
  for (auto arch : {nnet::Architecture::Mlp, nnet::Architecture::Lstm}) {
    auto m = nnet::Model::create(arch, 1234);
    // A few training steps so the saved state is not the initializer's.
    nnet::TrainConfig tc;
    tc.epochs = 1;
    nnet::train(m, std::span(inputs).first(256), std::span(labels).first(256), tc, {});
    const auto path = dir / (std::string(nnet::to_string(arch)) + ".bin");
    nnet::save_model(m, path);
    const auto back = nnet::load_model(path);
    const auto a = nnet::evaluate(m, inputs, labels);
    const auto b = nnet::evaluate(back, inputs, labels);
    ok = ok && nnet::forward(m, inputs) == nnet::forward(back, inputs) &&
         nnet::predict(m, inputs) == nnet::predict(back, inputs) &&
         a.confusion == b.confusion && a.accuracy == b.accuracy;
  }
  std::filesystem::remove_all(dir);
  return {ok, fmt("MLP and LSTM: probabilities, classes and metrics on 1000 inputs "
                  "bit-identical after reload: %s",
                  ok ? "yes" : "NO")};
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all = {
      {1, "lead/window estimators vs naive oracle", 5, estimator_oracle},
      {2, "lead estimator convexity and shift equivariance", 5, estimator_properties},
      {3, "focal-loss gradient check, MLP and LSTM", 60, gradient_check},
      {4, "ring all-reduce mean and traffic", 10, allreduce},
      {5, "data-parallel equivalence K=2,4", 60, data_parallel},
      {6, "end-to-end 100 km synthetic track", 600, end_to_end},
      {7, "parallel determinism on 10^6 segments", 300, parallel_determinism},
      {8, "projection round trip, pole and oracle", 5, projection},
      {9, "confusion-matrix metrics", 5, metrics},
      {10, "model persistence", 5, persistence},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i)
    wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto &c : all) {
    if (!wanted.empty() && !wanted.contains(c.id))
      continue;
    runtime::Stopwatch clock;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception &e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double t = clock.seconds();
    const bool pass = v.pass && t < c.budget_s;
    failed += !pass;
    std::printf("%s criterion %d: %s | %s | %.2f s (budget %.0f s)\n",
                pass ? "PASS" : "FAIL", c.id, c.title, v.detail.c_str(), t, c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
