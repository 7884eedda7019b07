// SPDX-License-Identifier: Apache-2.0
#include "pipeline/config.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"
#include "runtime/runtime.hpp"
#include "surface/surface.hpp"

#include <algorithm>
#include <cmath>

namespace floeberg::pipeline {

const std::vector<KeySpec> &config_keys() {
  using enum ValueKind;
  static const std::vector<KeySpec> keys = {
      // inputs and outputs
      {"output_dir", Path, ".", "directory for default inputs and products"},
      {"output", Path, "", "primary product path (-o)"},
      {"spec", Path, "", "synthetic track spec (synth)"},
      {"photons", Path, "", "photon CSV"},
      {"segments", Path, "", "segment CSV"},
      {"raster", Path, "", "classified image, ESRI ASCII grid"},
      {"shifts", Path, "", "track/image pairing table"},
      {"pair_id", Text, "", "row of the pairing table to apply"},
      {"overrides", Path, "", "manual label corrections"},
      {"labeled", Path, "", "auto-labeled segment CSV (train input)"},
      {"classified", Path, "", "classified segment CSV (surface input)"},
      {"model", Path, "", "model file"},
      {"freeboard", Path, "", "freeboard CSV (report input)"},
      // synthetic tracks
      {"length", Real, "100000", "random synthetic track length, meters"},
      {"thick_freeboard", Real, "0.3", "random spec thick-ice freeboard, m"},
      {"thin_freeboard", Real, "0.08", "random spec thin-ice freeboard, m"},
      // resampling
      {"bin", Real, "2", "resampling bin, meters"},
      {"min_confidence", Integer, "4", "lowest photon confidence kept"},
      // alignment
      {"max_time_diff", Real, "80", "pairing tolerance, minutes"},
      {"shift_moves_track", Boolean, "false", "shift descriptors move the track"},
      {"flip_east", Boolean, "false", "E means -x"},
      {"flip_north", Boolean, "false", "N means -y"},
      // classifier
      {"classifier", Text, "lstm", "mlp or lstm"},
      {"gamma", Real, "2", "focal loss gamma"},
      {"alpha", Text, "inverse_frequency", "inverse_frequency or a,b,c"},
      {"train_fraction", Real, "0.8", "share of labeled segments used to train"},
      {"epochs", Integer, "20", "training epochs"},
      {"batch_size", Integer, "32", "mini-batch size"},
      {"learning_rate", Real, "0.003", "Adam learning rate"},
      {"dropout", Real, "0.2", "LSTM output dropout"},
      {"train_workers", Integer, "1", "simulated data-parallel ranks"},
      {"batch_mode", Text, "global", "global or per_worker"},
      // sea surface
      {"method", Text, "nasa_weighted",
       "nasa_weighted, min_elev, avg_elev or nearest_min_elev"},
      {"window", Real, "10000", "sea-surface window length, meters"},
      {"stride", Real, "5000", "window spacing, meters"},
      {"min_lead_length", Integer, "1", "shortest lead, segments"},
      {"hist_bin", Real, "0.02", "freeboard histogram bin, meters"},
      // execution
      {"workers", Integer, "0", "worker threads, 0 = all cores"},
      {"seed", Integer, "0", "seed for every random choice"},
      {"bench_target", Text, "label", "label, surface or train"},
      {"bench_segments", Integer, "1000000", "synthetic segments per bench run"},
      {"bench_workers", Text, "1,2,4", "worker counts to measure"},
      {"bench_epochs", Integer, "1", "epochs per train bench run"},
  };
  return keys;
}

namespace {

void check_value(const KeySpec &k, std::string_view v) {
  const auto where = "config key '" + std::string(k.key) + "'";
  switch (k.kind) {
  case ValueKind::Real: {
    const double x = io::parse_double(v, where);
    require(std::isfinite(x), ErrorKind::InvalidInput, where + " must be finite");
    break;
  }
  case ValueKind::Integer:
    io::parse_int(v, where);
    break;
  case ValueKind::Boolean:
    require(v == "true" || v == "false" || v == "1" || v == "0",
            ErrorKind::InvalidInput, where + " must be true or false");
    break;
  default:
    break;
  }
}

} // namespace

PipelineConfig::PipelineConfig() {
  for (const auto &k : config_keys())
    values_.emplace(std::string(k.key), std::string(k.default_value));
}

const KeySpec &PipelineConfig::spec(std::string_view key) const {
  for (const auto &k : config_keys())
    if (k.key == key)
      return k;
  fail(ErrorKind::InvalidInput, "unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  const auto &k = spec(key);
  value = io::trim(value);
  check_value(k, value);
  values_[std::string(key)] = std::string(value);
  explicit_.insert(std::string(key));
}

bool PipelineConfig::is_set(std::string_view key) const {
  spec(key);
  return explicit_.contains(key);
}

void PipelineConfig::merge(std::string_view text) {
  io::LineCursor lines(text);
  std::string_view line;
  while (lines.next(line)) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorKind::Parse,
            "config line " + std::to_string(lines.line_number()) +
                ": expected 'key = value'");
    try {
      set(io::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error &e) {
      fail(e.kind(),
           "config line " + std::to_string(lines.line_number()) + ": " + e.what());
    }
  }
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig c;
  c.merge(text);
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path &path) {
  return parse(io::read_file(path));
}

const std::string &PipelineConfig::text(std::string_view key) const {
  spec(key);
  return values_.find(key)->second;
}

double PipelineConfig::real(std::string_view key) const {
  return io::parse_double(text(key), key);
}

std::int64_t PipelineConfig::integer(std::string_view key) const {
  return io::parse_int(text(key), key);
}

std::size_t PipelineConfig::count(std::string_view key) const {
  const auto v = integer(key);
  require(v >= 0, ErrorKind::InvalidInput,
          "config key '" + std::string(key) + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

bool PipelineConfig::boolean(std::string_view key) const {
  const auto &v = text(key);
  return v == "true" || v == "1";
}

std::optional<std::filesystem::path>
PipelineConfig::path(std::string_view key) const {
  const auto &v = text(key);
  if (v.empty())
    return std::nullopt;
  return std::filesystem::path(v);
}

std::filesystem::path
PipelineConfig::input_path(std::string_view key,
                           std::string_view fallback_name) const {
  if (auto p = path(key))
    return *p;
  return std::filesystem::path(text("output_dir")) / fallback_name;
}

std::filesystem::path
PipelineConfig::output_path(std::string_view default_name) const {
  if (auto p = path("output"))
    return *p;
  return std::filesystem::path(text("output_dir")) / default_name;
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string &msg) {
    require(ok, ErrorKind::InvalidInput, "config: " + msg);
  };
  const double tf = real("train_fraction");
  check(tf > 0.0 && tf < 1.0, "train_fraction must lie in (0, 1)");
  check(real("bin") > 0.0, "bin must be positive");
  const auto mc = integer("min_confidence");
  check(mc >= 0 && mc <= 4, "min_confidence must lie in 0..4");
  check(real("length") > 0.0, "length must be positive");
  check(real("max_time_diff") >= 0.0, "max_time_diff must be >= 0");
  check(text("classifier") == "mlp" || text("classifier") == "lstm",
        "classifier must be mlp or lstm");
  check(real("gamma") >= 0.0, "gamma must be >= 0");
  check(integer("epochs") >= 0, "epochs must be >= 0");
  check(integer("batch_size") >= 1, "batch_size must be >= 1");
  check(real("learning_rate") > 0.0, "learning_rate must be positive");
  const double d = real("dropout");
  check(d >= 0.0 && d < 1.0, "dropout must lie in [0, 1)");
  check(integer("train_workers") >= 1, "train_workers must be >= 1");
  check(text("batch_mode") == "global" || text("batch_mode") == "per_worker",
        "batch_mode must be global or per_worker");
  try {
    surface::parse_method(text("method"));
  } catch (const Error &) {
    check(false, "method must be nasa_weighted, min_elev, avg_elev or nearest_min_elev");
  }
  check(real("window") > 0.0, "window must be positive");
  check(real("stride") > 0.0, "stride must be positive");
  check(integer("min_lead_length") >= 1, "min_lead_length must be >= 1");
  check(real("hist_bin") > 0.0, "hist_bin must be positive");
  check(integer("workers") >= 0, "workers must be >= 0");
  check(integer("bench_segments") >= 1, "bench_segments must be >= 1");
  check(integer("bench_epochs") >= 1, "bench_epochs must be >= 1");
  const auto &bt = text("bench_target");
  check(bt == "label" || bt == "surface" || bt == "train",
        "bench_target must be label, surface or train");
}

std::size_t PipelineConfig::workers() const {
  const auto w = count("workers");
  return w == 0 ? runtime::default_workers() : w;
}

std::uint64_t PipelineConfig::seed() const {
  return static_cast<std::uint64_t>(integer("seed"));
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto &k : config_keys()) {
    out += k.key;
    out += " = ";
    out += values_.find(k.key)->second;
    out += '\n';
  }
  return out;
}

} // namespace floeberg::pipeline
