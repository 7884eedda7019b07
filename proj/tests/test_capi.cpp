// SPDX-License-Identifier: Apache-2.0
// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "floeberg/floeberg.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Context {
  floeberg_context *ctx = nullptr;
  Context() { REQUIRE(floeberg_context_new(&ctx) == FLOEBERG_OK); }
  ~Context() { floeberg_context_free(ctx); }
  floeberg_status set(const char *k, const std::string &v) {
    return floeberg_context_set(ctx, k, v.c_str());
  }
};

fs::path temp_dir(const char *tag) {
  auto p = fs::temp_directory_path() /
           (std::string("floeberg_capi_") + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST_CASE("exit codes follow the error class") {
  CHECK(floeberg_exit_code(FLOEBERG_OK) == 0);
  CHECK(floeberg_exit_code(FLOEBERG_MISSING_INPUT) == 2);
  for (auto s : {FLOEBERG_INVALID_INPUT, FLOEBERG_OUT_OF_SCOPE, FLOEBERG_PARSE,
                 FLOEBERG_NO_REFERENCE, FLOEBERG_CONSISTENCY,
                 FLOEBERG_ARCHITECTURE_MISMATCH})
    CHECK(floeberg_exit_code(s) == 3);
  for (auto s : {FLOEBERG_NUMERIC, FLOEBERG_IO, FLOEBERG_INTERNAL})
    CHECK(floeberg_exit_code(s) == 1);
  CHECK(std::string(floeberg_status_name(FLOEBERG_NO_REFERENCE)) == "no_reference");
}

TEST_CASE("projection through the C boundary") {
  double x = 1, y = 1;
  REQUIRE(floeberg_project(-90.0, 0.0, &x, &y) == FLOEBERG_OK);
  CHECK(std::fabs(x) < 1e-9);
  CHECK(std::fabs(y) < 1e-9);
  REQUIRE(floeberg_project(-75.0, -170.0, &x, &y) == FLOEBERG_OK);
  CHECK(std::fabs(x - -283720.1972631617) < 1e-3);
  CHECK(std::fabs(y - -1609057.1965969192) < 1e-3);
  double lat = 0, lon = 0;
  REQUIRE(floeberg_unproject(x, y, &lat, &lon) == FLOEBERG_OK);
  CHECK(std::fabs(lat + 75.0) < 1e-9);
  CHECK(std::fabs(lon + 170.0) < 1e-9);

  CHECK(floeberg_project(10.0, 0.0, &x, &y) == FLOEBERG_OUT_OF_SCOPE);
  CHECK(std::string(floeberg_last_error()).size() > 0);
  CHECK(floeberg_project(-80.0, 0.0, nullptr, &y) == FLOEBERG_INVALID_INPUT);
  REQUIRE(floeberg_project(-80.0, 0.0, &x, &y) == FLOEBERG_OK);
  CHECK(std::string(floeberg_last_error()).empty());
}

TEST_CASE("shift parsing") {
  double dx = 0, dy = 0;
  REQUIRE(floeberg_parse_shift("1200 m / S", &dx, &dy) == FLOEBERG_OK);
  CHECK(dx == 0.0);
  CHECK(dy == doctest::Approx(-1200.0));
  CHECK(floeberg_parse_shift("sideways", &dx, &dy) != FLOEBERG_OK);
}

TEST_CASE("lead height and window reference worked examples") {
  const double h[] = {0.0, 0.1};
  const double v[] = {0.01, 0.01};
  double est = 0, var = 0;
  REQUIRE(floeberg_lead_height(h, v, 2, &est, &var) == FLOEBERG_OK);
  CHECK(std::fabs(est - 0.0268941) < 5e-8);
  CHECK(std::fabs(var - 0.0060678) < 5e-8);

  const double w[] = {0.01, 0.04};
  REQUIRE(floeberg_window_reference(h, w, 2, &est, &var) == FLOEBERG_OK);
  CHECK(std::fabs(est - 0.02) < 1e-15);
  CHECK(std::fabs(var - 0.008) < 1e-15);

  CHECK(floeberg_window_reference(h, w, 0, &est, &var) == FLOEBERG_NO_REFERENCE);
  CHECK(floeberg_lead_height(nullptr, v, 2, &est, &var) == FLOEBERG_INVALID_INPUT);
}

TEST_CASE("context: configuration and command errors") {
  Context c;
  CHECK(c.set("no_such_key", "1") == FLOEBERG_INVALID_INPUT);
  CHECK(c.set("epochs", "many") == FLOEBERG_PARSE);
  CHECK(c.set("train_fraction", "2") == FLOEBERG_OK);
  CHECK(floeberg_context_run(c.ctx, "train") == FLOEBERG_INVALID_INPUT);
  CHECK(c.set("train_fraction", "0.8") == FLOEBERG_OK);
  CHECK(floeberg_context_run(c.ctx, "dance") == FLOEBERG_INVALID_INPUT);
  CHECK(c.set("output_dir", "/nonexistent/floeberg") == FLOEBERG_OK);
  CHECK(floeberg_context_run(c.ctx, "ingest") == FLOEBERG_MISSING_INPUT);
  CHECK(std::string(floeberg_last_error()).find("not found") != std::string::npos);
  CHECK(floeberg_context_load_config(c.ctx, "/nonexistent.cfg") ==
        FLOEBERG_MISSING_INPUT);

  std::vector<std::string> names;
  for (const char *p = floeberg_command_names(); *p; p += names.back().size() + 1)
    names.emplace_back(p);
  CHECK(names.size() == 9);
  CHECK(names.front() == "synth");
  CHECK(floeberg_config_key_count() > 30);
}

TEST_CASE("context: config file merges, later settings win") {
  const auto dir = temp_dir("cfg");
  std::ofstream(dir / "run.cfg") << "seed = 5\nlength = 1000\n";
  Context c;
  REQUIRE(c.set("output_dir", dir.string()) == FLOEBERG_OK);
  REQUIRE(floeberg_context_load_config(c.ctx, (dir / "run.cfg").c_str()) == FLOEBERG_OK);
  REQUIRE(floeberg_context_run(c.ctx, "synth") == FLOEBERG_OK);
  CHECK(std::string(floeberg_context_log(c.ctx)).starts_with("seed: 5\n"));
  CHECK(floeberg_context_product_count(c.ctx) == 4);
  CHECK(fs::exists(floeberg_context_product(c.ctx, 0)));
  CHECK(floeberg_context_product(c.ctx, 99) == nullptr);
  REQUIRE(c.set("seed", "9") == FLOEBERG_OK);
  REQUIRE(floeberg_context_run(c.ctx, "synth") == FLOEBERG_OK);
  CHECK(std::string(floeberg_context_log(c.ctx)).starts_with("seed: 9\n"));
  fs::remove_all(dir);
}

TEST_CASE("model handle: train, load, predict") {
  const auto dir = temp_dir("model");
  Context c;
  REQUIRE(c.set("output_dir", dir.string()) == FLOEBERG_OK);
  REQUIRE(c.set("length", "4000") == FLOEBERG_OK);
  REQUIRE(c.set("epochs", "2") == FLOEBERG_OK);
  for (const char *cmd : {"synth", "ingest", "label", "train"})
    REQUIRE_MESSAGE(floeberg_context_run(c.ctx, cmd) == FLOEBERG_OK, floeberg_last_error());

  floeberg_model *m = nullptr;
  CHECK(floeberg_model_load((dir / "absent.bin").c_str(), &m) == FLOEBERG_MISSING_INPUT);
  CHECK(m == nullptr);
  REQUIRE(floeberg_model_load((dir / "model.bin").c_str(), &m) == FLOEBERG_OK);
  CHECK(floeberg_model_architecture(m) == 2);
  const std::size_t per = floeberg_model_sequence_length(m) * floeberg_model_feature_count();
  CHECK(per == 30);

  const std::size_t n = 7;
  std::vector<double> windows(n * per);
  for (std::size_t i = 0; i < windows.size(); ++i)
    windows[i] = std::sin(0.37 * static_cast<double>(i));
  std::vector<double> probs(n * 3);
  std::vector<std::uint8_t> classes(n);
  REQUIRE(floeberg_model_predict(m, windows.data(), n, probs.data(), classes.data()) ==
          FLOEBERG_OK);
  for (std::size_t i = 0; i < n; ++i) {
    const double *p = &probs[i * 3];
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
    const int best = p[1] > p[0] ? (p[2] > p[1] ? 2 : 1) : (p[2] > p[0] ? 2 : 0);
    CHECK(classes[i] == best + 1);
  }
  CHECK(floeberg_model_predict(nullptr, windows.data(), n, nullptr, nullptr) ==
        FLOEBERG_INVALID_INPUT);
  floeberg_model_free(m);
  fs::remove_all(dir);
}
