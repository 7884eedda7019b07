// SPDX-License-Identifier: Apache-2.0
#include "pipeline/commands.hpp"

#include "autolabel/autolabel.hpp"
#include "common/error.hpp"
#include "common/text_io.hpp"
#include "dtrain/dtrain.hpp"
#include "geo/raster.hpp"
#include "ingest/features.hpp"
#include "ingest/synthetic.hpp"
#include "nnet/model_io.hpp"
#include "pipeline/svg.hpp"
#include "pipeline/workflow.hpp"
#include "runtime/runtime.hpp"
#include "surface/surface.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace floeberg::pipeline {

namespace fs = std::filesystem;
using autolabel::LabeledSegment;

const std::vector<std::string_view> &command_names() {
  static const std::vector<std::string_view> names = {
      "synth", "ingest", "label", "train", "classify",
      "surface", "freeboard", "bench", "report"};
  return names;
}

namespace {

// Sibling of `primary` named "<stem><suffix>".
fs::path sibling(const fs::path &primary, std::string_view suffix) {
  return primary.parent_path() / (primary.stem().string() + std::string(suffix));
}

void write_product(CommandResult &r, const fs::path &path, std::string_view text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  io::write_file_atomic(path, text);
  r.products.push_back(path);
}

void line(CommandResult &r, const std::string &text) {
  r.log += text;
  r.log += '\n';
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string timings_text(const runtime::PhaseTimings &t) {
  return "load_s=" + fmt(t.load_s) + " map_s=" + fmt(t.map_s) +
         " reduce_s=" + fmt(t.reduce_s);
}

std::vector<LabeledSegment> load_labeled(const fs::path &p, std::size_t workers,
                                         runtime::PhaseTimings *t = nullptr) {
  runtime::Stopwatch clock;
  auto out = autolabel::load_labeled_csv(p, workers);
  if (t)
    t->load_s = clock.seconds();
  return out;
}

surface::ProfileConfig profile_config(const PipelineConfig &c) {
  surface::ProfileConfig p;
  p.method = surface::parse_method(c.text("method"));
  p.window_length = c.real("window");
  p.stride = c.real("stride");
  p.min_lead_length = c.count("min_lead_length");
  return p;
}

nnet::Architecture architecture(const PipelineConfig &c) {
  return c.text("classifier") == "mlp" ? nnet::Architecture::Mlp
                                       : nnet::Architecture::Lstm;
}

std::string class_counts(std::span<const LabeledSegment> l) {
  std::array<std::size_t, 4> n{};
  for (const auto &x : l)
    ++n[class_code(x.surface)];
  return "thick_ice=" + std::to_string(n[1]) + " thin_ice=" + std::to_string(n[2]) +
         " open_water=" + std::to_string(n[3]) + " unlabeled=" + std::to_string(n[0]);
}

// ---- commands ---------------------------------------------------------------

CommandResult cmd_synth(const PipelineConfig &c) {
  CommandResult r;
  ingest::SyntheticTrackSpec spec;
  if (auto p = c.path("spec")) {
    spec = ingest::load_track_spec(*p);
    if (c.is_set("seed"))
      spec.seed = c.seed();
  } else {
    spec = ingest::random_track_spec(c.real("length"), c.seed(),
                                     c.real("thick_freeboard"),
                                     c.real("thin_freeboard"));
  }
  line(r, "seed: " + std::to_string(spec.seed));
  const auto params = geo::StereoParams::epsg3976();
  const double bin = c.real("bin");
  const auto track = ingest::synthesize_track(spec, params, bin);
  const auto out = c.output_path("photons.csv");
  write_product(r, out, ingest::photons_to_csv(track.photons));

  std::string truth = "index,class,freeboard\n";
  for (std::size_t k = 0; k < track.true_class.size(); ++k) {
    io::append_int(truth, static_cast<std::int64_t>(k));
    truth += ',';
    io::append_int(truth, class_code(track.true_class[k]));
    truth += ',';
    io::append_double(truth, track.true_freeboard[k]);
    truth += '\n';
  }
  write_product(r, sibling(out, ".truth.csv"), truth);
  write_product(r, sibling(out, ".raster.asc"),
                ingest::rasterize_truth(spec, params).serialize());
  write_product(r, sibling(out, ".spec.csv"), ingest::track_spec_to_text(spec));
  line(r, "photons: " + std::to_string(track.photons.size()));
  line(r, "spans: " + std::to_string(spec.spans.size()));
  return r;
}

CommandResult cmd_ingest(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  runtime::Stopwatch clock;
  const auto photons = ingest::load_photons_csv(c.input_path("photons", "photons.csv"));
  runtime::PhaseTimings t;
  t.load_s = clock.seconds();
  clock.restart();
  const auto seg = ingest::resample_2m(photons, c.real("bin"),
                                       static_cast<int>(c.integer("min_confidence")));
  t.reduce_s = clock.seconds();
  write_product(r, c.output_path("segments.csv"), ingest::segments_to_csv(seg));
  line(r, "photons: " + std::to_string(photons.size()));
  line(r, "segments: " + std::to_string(seg.size()));
  line(r, "timings: " + timings_text(t));
  return r;
}

geo::ShiftVector configured_shift(const PipelineConfig &c, CommandResult &r) {
  const auto shifts = c.path("shifts");
  const auto &pair = c.text("pair_id");
  if (!shifts) {
    require(pair.empty(), ErrorKind::InvalidInput,
            "pair_id given without a shifts table");
    return {};
  }
  require(!pair.empty(), ErrorKind::InvalidInput,
          "a shifts table needs pair_id to select a row");
  const auto table = geo::load_shift_table(*shifts);
  const auto &entry = geo::find_pair(table, pair, c.real("max_time_diff"));
  geo::ShiftConvention conv;
  conv.moves_track = c.boolean("shift_moves_track");
  conv.flip_east = c.boolean("flip_east");
  conv.flip_north = c.boolean("flip_north");
  const auto s = conv.to_raster_shift(entry.shift);
  line(r, "shift: " + entry.shift_text + " -> dx=" + fmt(s.dx) + " dy=" + fmt(s.dy));
  return s;
}

CommandResult cmd_label(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  const auto workers = c.workers();
  runtime::Stopwatch clock;
  const auto segments = ingest::load_segments_csv(c.input_path("segments", "segments.csv"));
  const auto raster = geo::LabelRaster::load(c.input_path("raster", "photons.raster.asc"));
  const double load_s = clock.seconds();
  const auto shift = configured_shift(c, r);
  auto job = autolabel::label_parallel(segments, raster, shift,
                                       geo::StereoParams::epsg3976(), workers);
  job.timings.load_s = load_s;
  if (auto p = c.path("overrides")) {
    const auto spans = autolabel::load_overrides(*p);
    job.labeled = autolabel::apply_overrides(std::move(job.labeled), spans);
    line(r, "overrides: " + std::to_string(spans.size()));
  }
  write_product(r, c.output_path("labeled.csv"), autolabel::labeled_to_csv(job.labeled));
  line(r, "segments: " + std::to_string(job.labeled.size()));
  line(r, "classes: " + class_counts(job.labeled));
  line(r, "workers: " + std::to_string(workers));
  line(r, "timings: " + timings_text(job.timings));
  return r;
}

std::array<double, kClassCount> parse_alpha(const std::string &text) {
  std::vector<std::string_view> f;
  io::split_fields(text, f);
  require(f.size() == kClassCount, ErrorKind::InvalidInput,
          "alpha must be inverse_frequency or three comma-separated weights");
  std::array<double, kClassCount> a{};
  for (int i = 0; i < kClassCount; ++i) {
    a[i] = io::parse_double(f[i], "alpha");
    require(a[i] >= 0.0 && std::isfinite(a[i]), ErrorKind::InvalidInput,
            "alpha weights must be finite and >= 0");
  }
  return a;
}

TrainSettings train_settings(const PipelineConfig &c) {
  TrainSettings s;
  s.arch = architecture(c);
  s.train.batch_size = c.count("batch_size");
  s.train.epochs = c.count("epochs");
  s.train.dropout = c.real("dropout");
  s.train.learning_rate = c.real("learning_rate");
  s.train_fraction = c.real("train_fraction");
  s.gamma = c.real("gamma");
  if (c.text("alpha") != "inverse_frequency")
    s.alpha = parse_alpha(c.text("alpha"));
  s.train_workers = c.count("train_workers");
  s.batch_mode = c.text("batch_mode") == "per_worker" ? dtrain::BatchMode::PerWorker
                                                      : dtrain::BatchMode::Global;
  s.seed = c.seed();
  return s;
}

CommandResult cmd_train(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  const auto labeled = load_labeled(c.input_path("labeled", "labeled.csv"), c.workers());
  const auto outcome = train_classifier(labeled, train_settings(c));
  const auto out = c.output_path("model.bin");
  if (out.has_parent_path())
    fs::create_directories(out.parent_path());
  nnet::save_model(outcome.model, out);
  r.products.push_back(out);
  write_product(r, sibling(out, "_history.csv"), nnet::history_to_csv(outcome.history));
  line(r, std::string("classifier: ") + nnet::to_string(outcome.model.architecture()));
  line(r, "train_segments: " + std::to_string(outcome.split.train.size()));
  line(r, "test_segments: " + std::to_string(outcome.split.test.size()));
  line(r, "train_seconds: " + fmt(outcome.seconds));
  for (const auto &w : outcome.warnings)
    line(r, "warning: " + w);
  if (!outcome.history.empty())
    line(r, "final_loss: " + fmt(outcome.history.back().loss) +
                " train_accuracy: " + fmt(outcome.history.back().accuracy));
  if (outcome.test_metrics) {
    write_product(r, sibling(out, "_metrics.csv"),
                  nnet::metrics_to_csv(*outcome.test_metrics));
    r.log += nnet::format_metrics(*outcome.test_metrics);
  }
  return r;
}

CommandResult cmd_classify(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  std::optional<nnet::Architecture> expected;
  if (c.is_set("classifier"))
    expected = architecture(c);
  const auto model = nnet::load_model(c.input_path("model", "model.bin"), expected);
  const auto workers = c.workers();

  std::vector<ingest::Segment> segments;
  std::vector<LabeledSegment> reference;
  if (c.is_set("photons")) {
    const auto photons = ingest::load_photons_csv(*c.path("photons"));
    segments = ingest::resample_2m(photons, c.real("bin"),
                                   static_cast<int>(c.integer("min_confidence")));
    line(r, "photons: " + std::to_string(photons.size()));
  } else if (c.is_set("labeled")) {
    reference = load_labeled(*c.path("labeled"), workers);
    segments = autolabel::segments_of(reference);
  } else {
    segments = ingest::load_segments_csv(c.input_path("segments", "segments.csv"));
  }
  runtime::Stopwatch clock;
  const auto classified = classify_segments(model, segments, workers);
  const double seconds = clock.seconds();
  const auto out = c.output_path("classified.csv");
  write_product(r, out, autolabel::labeled_to_csv(classified));
  line(r, "segments: " + std::to_string(classified.size()));
  line(r, "classes: " + class_counts(classified));
  line(r, "inference_seconds: " + fmt(seconds));
  if (!reference.empty()) {
    std::vector<int> truth, pred;
    for (std::size_t i = 0; i < reference.size(); ++i)
      if (is_labeled(reference[i].surface)) {
        truth.push_back(class_index(reference[i].surface));
        pred.push_back(class_index(classified[i].surface));
      }
    if (!truth.empty()) {
      const auto m = nnet::metrics_from_predictions(truth, pred);
      write_product(r, sibling(out, "_metrics.csv"), nnet::metrics_to_csv(m));
      r.log += nnet::format_metrics(m);
    }
  }
  return r;
}

CommandResult cmd_surface(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  runtime::PhaseTimings t;
  const auto labeled =
      load_labeled(c.input_path("classified", "classified.csv"), c.workers(), &t);
  const auto profile = surface::build_profile(labeled, profile_config(c), c.workers(), &t);
  write_product(r, c.output_path("windows.csv"), surface::windows_to_csv(profile.windows));
  std::size_t filled = 0;
  for (const auto &w : profile.windows)
    filled += w.interpolated;
  line(r, "method: " + std::string(surface::to_string(profile.method)));
  line(r, "windows: " + std::to_string(profile.windows.size()) +
              " interpolated: " + std::to_string(filled));
  line(r, "timings: " + timings_text(t));
  return r;
}

CommandResult cmd_freeboard(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  runtime::PhaseTimings t;
  const auto labeled =
      load_labeled(c.input_path("classified", "classified.csv"), c.workers(), &t);
  const auto profile = surface::build_profile(labeled, profile_config(c), c.workers(), &t);
  const auto records = surface::compute_freeboard(labeled, profile, c.workers(), &t);
  const auto out = c.output_path("freeboard.csv");
  write_product(r, out, surface::freeboard_to_csv(records));
  const auto hist = surface::freeboard_histogram(records, c.real("hist_bin"));
  write_product(r, sibling(out, "_hist.csv"), surface::histogram_to_csv(hist));
  double ice_sum = 0.0;
  std::size_t ice_n = 0, negative = 0;
  for (const auto &x : records) {
    negative += x.negative;
    if (x.surface == SurfaceClass::ThickIce || x.surface == SurfaceClass::ThinIce) {
      ice_sum += x.h_f;
      ++ice_n;
    }
  }
  line(r, "records: " + std::to_string(records.size()) +
              " negative: " + std::to_string(negative));
  if (ice_n)
    line(r, "mean_ice_freeboard_m: " + fmt(ice_sum / static_cast<double>(ice_n)));
  line(r, "timings: " + timings_text(t));
  return r;
}

std::vector<std::size_t> worker_list(const PipelineConfig &c) {
  std::vector<std::string_view> f;
  io::split_fields(c.text("bench_workers"), f);
  std::vector<std::size_t> out;
  for (auto v : f) {
    const auto w = io::parse_int(v, "bench_workers");
    require(w >= 1, ErrorKind::InvalidInput, "bench worker counts must be >= 1");
    out.push_back(static_cast<std::size_t>(w));
  }
  require(!out.empty(), ErrorKind::InvalidInput, "bench_workers is empty");
  return out;
}

CommandResult cmd_bench(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  const auto workers = worker_list(c);
  const auto n = c.count("bench_segments");
  const double bin = c.real("bin");
  const auto spec = ingest::random_track_spec(static_cast<double>(n) * bin, c.seed(),
                                              c.real("thick_freeboard"),
                                              c.real("thin_freeboard"));
  const auto params = geo::StereoParams::epsg3976();
  const auto segments = ingest::synthesize_segments(spec, params, bin);
  const auto &target = c.text("bench_target");
  line(r, "target: " + target);
  line(r, "segments: " + std::to_string(segments.size()));

  if (target == "train") {
    nnet::Model model = nnet::Model::create(architecture(c), derive_seed(c.seed(), 1));
    const auto raw = ingest::raw_features(segments);
    model.standardizer = ingest::Standardizer::fit(raw);
    const auto windows = track_windows(model, segments);
    std::vector<int> labels;
    for (const auto &s : segments)
      labels.push_back(class_index(spec.span_at(s.center_along_track).surface));
    std::vector<dtrain::ScalingRow> rows;
    const auto epochs = c.count("bench_epochs");
    for (auto k : workers) {
      nnet::Model m = model;
      dtrain::DistributedConfig dc;
      dc.workers = k;
      dc.batch_mode = c.text("batch_mode") == "per_worker" ? dtrain::BatchMode::PerWorker
                                                           : dtrain::BatchMode::Global;
      dc.train.epochs = epochs;
      dc.train.batch_size = c.count("batch_size");
      dc.train.learning_rate = c.real("learning_rate");
      dc.train.dropout = c.real("dropout");
      dc.train.seed = derive_seed(c.seed(), 2);
      const auto res = dtrain::train_distributed(
          m, windows, labels, dc,
          nnet::FocalLossParams::inverse_frequency(labels, c.real("gamma")));
      rows.push_back(dtrain::scaling_row(k, res, epochs));
      line(r, "workers " + std::to_string(k) + ": time_s=" + fmt(res.time_s));
    }
    dtrain::compute_speedups(rows);
    write_product(r, c.output_path("scaling.csv"), dtrain::scaling_to_csv(rows));
    return r;
  }

  std::vector<LabeledSegment> truth_labeled;
  geo::LabelRaster raster;
  if (target == "label")
    raster = ingest::rasterize_truth(spec, params);
  else
    for (const auto &s : segments)
      truth_labeled.push_back({s, spec.span_at(s.center_along_track).surface,
                               autolabel::LabelSource::Auto});
  const auto text = target == "label" ? ingest::segments_to_csv(segments)
                                      : autolabel::labeled_to_csv(truth_labeled);

  std::vector<runtime::BenchRow> rows;
  for (auto k : workers) {
    runtime::BenchRow row;
    row.workers = k;
    if (target == "label") {
      runtime::Stopwatch clock;
      const auto body = text.substr(text.find('\n') + 1);
      const auto parsed = runtime::parallel_parse<ingest::Segment>(
          body, k, [](std::string_view piece) {
            return ingest::parse_segments_csv(std::string(ingest::kSegmentHeader) +
                                              "\n" + std::string(piece));
          });
      row.timings.load_s = clock.seconds();
      const auto job = autolabel::label_parallel(parsed, raster, {}, params, k);
      row.timings.map_s = job.timings.map_s;
      row.timings.reduce_s = job.timings.reduce_s;
    } else {
      runtime::Stopwatch clock;
      const auto labeled = autolabel::parse_labeled_csv(text, k);
      row.timings.load_s = clock.seconds();
      const auto profile = surface::build_profile(labeled, profile_config(c), k,
                                                  &row.timings);
      surface::compute_freeboard(labeled, profile, k, &row.timings);
    }
    line(r, "workers " + std::to_string(k) + ": " + timings_text(row.timings));
    rows.push_back(row);
  }
  runtime::compute_speedups(rows);
  write_product(r, c.output_path("bench.csv"), runtime::bench_to_csv(rows));
  return r;
}

CommandResult cmd_report(const PipelineConfig &c) {
  CommandResult r;
  line(r, "seed: " + std::to_string(c.seed()));
  const auto labeled = load_labeled(c.input_path("classified", "classified.csv"), 1);
  const auto records =
      surface::parse_freeboard_csv(io::read_file(c.input_path("freeboard", "freeboard.csv")));
  const fs::path dir = c.path("output").value_or(fs::path(c.text("output_dir")));
  write_product(r, dir / "elevation.svg", elevation_scatter_svg(labeled));
  write_product(r, dir / "freeboard_hist.svg",
                histogram_svg(surface::freeboard_histogram(records, c.real("hist_bin"))));
  line(r, "segments: " + std::to_string(labeled.size()));
  line(r, "freeboard_records: " + std::to_string(records.size()));
  return r;
}

} // namespace

CommandResult run_command(std::string_view command, const PipelineConfig &config) {
  config.validate();
  if (command == "synth") return cmd_synth(config);
  if (command == "ingest") return cmd_ingest(config);
  if (command == "label") return cmd_label(config);
  if (command == "train") return cmd_train(config);
  if (command == "classify") return cmd_classify(config);
  if (command == "surface") return cmd_surface(config);
  if (command == "freeboard") return cmd_freeboard(config);
  if (command == "bench") return cmd_bench(config);
  if (command == "report") return cmd_report(config);
  fail(ErrorKind::InvalidInput, "unknown command '" + std::string(command) + "'");
}

} // namespace floeberg::pipeline
