// SPDX-License-Identifier: Apache-2.0
// Drives the installed command-line tool as a subprocess.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string output; // stdout and stderr interleaved
};

Outcome run(const fs::path &dir, const std::string &args) {
  const std::string cmd =
      "cd '" + dir.string() + "' && '" FLOEBERG_CLI "' " + args + " 2>&1";
  Outcome o;
  FILE *p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p))
    o.output.append(buf, n);
  const int raw = ::pclose(p);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char *tag) {
    path = fs::temp_directory_path() /
           (std::string("floeberg_cli_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// A short track: thick floes (0.30 m) and thin ice (0.08 m) between leads.
const char *kSpec = "length,6000\n"
                    "density,25\n"
                    "noise_sigma,0.1\n"
                    "seed,1\n"
                    "span,0,1200,1,0.3\n"
                    "span,1200,1400,3,0\n"
                    "span,1400,2600,2,0.08\n"
                    "span,2600,2800,3,0\n"
                    "span,2800,4400,1,0.3\n"
                    "span,4400,4600,3,0\n"
                    "span,4600,6000,2,0.08\n";

} // namespace

TEST_CASE("synth is deterministic for a fixed spec and seed") {
  TempDir d("synth");
  std::ofstream(d.path / "spec.csv") << kSpec;
  const auto a = run(d.path, "synth --spec spec.csv --seed 7 -o track.csv");
  REQUIRE_MESSAGE(a.status == 0, a.output);
  CHECK(a.output.find("seed: 7") != std::string::npos);
  const auto first = slurp(d.path / "track.csv");
  fs::rename(d.path / "track.csv", d.path / "first.csv");
  REQUIRE(run(d.path, "synth --spec spec.csv --seed 7 -o track.csv").status == 0);
  CHECK(slurp(d.path / "track.csv") == first);
  REQUIRE(run(d.path, "synth --spec spec.csv --seed 8 -o other.csv").status == 0);
  CHECK(slurp(d.path / "other.csv") != first);
}

TEST_CASE("exit statuses") {
  TempDir d("exit");
  CHECK(run(d.path, "ingest").status == 2);
  CHECK(run(d.path, "ingest --photons nothing.csv").status == 2);
  CHECK(run(d.path, "levitate").status == 3);
  CHECK(run(d.path, "ingest --no-such-flag").status == 3);
  CHECK(run(d.path, "train --train_fraction 1.5").status == 3);
  CHECK(run(d.path, "ingest --set bin").status == 3);
  CHECK(run(d.path, "--help").status == 0);

  // Config file first, flags on top.
  std::ofstream(d.path / "run.cfg") << "seed = 5\nlength = 500\n";
  auto r = run(d.path, "synth --config run.cfg");
  CHECK(r.status == 0);
  CHECK(r.output.find("seed: 5") != std::string::npos);
  r = run(d.path, "synth --config run.cfg --seed 6");
  CHECK(r.output.find("seed: 6") != std::string::npos);
  r = run(d.path, "synth --config run.cfg --set seed=11");
  CHECK(r.output.find("seed: 11") != std::string::npos);
  CHECK(run(d.path, "synth --config absent.cfg").status == 2);
}

TEST_CASE("freeboard without open water fails with a sea-surface message") {
  TempDir d("nowater");
  std::ofstream(d.path / "ice.csv") << "length,1000\nseed,2\nspan,0,1000,1,0.3\n";
  REQUIRE(run(d.path, "synth --spec ice.csv").status == 0);
  REQUIRE(run(d.path, "ingest").status == 0);
  REQUIRE(run(d.path, "label").status == 0);
  const auto r = run(d.path, "freeboard --classified labeled.csv");
  CHECK(r.status == 3);
  CHECK(r.output.find("no sea-surface reference") != std::string::npos);
}

TEST_CASE("full chain recovers the generator's ice freeboards") {
  TempDir d("chain");
  std::ofstream(d.path / "spec.csv") << kSpec;
  for (const char *step :
       {"synth --spec spec.csv", "ingest", "label", "train --workers 2", "classify",
        "surface", "freeboard", "report"}) {
    const auto r = run(d.path, step);
    REQUIRE_MESSAGE(r.status == 0, step << ": " << r.output);
  }
  for (const char *f : {"photons.csv", "segments.csv", "labeled.csv", "model.bin",
                        "classified.csv", "windows.csv", "freeboard.csv",
                        "freeboard_hist.csv", "elevation.svg", "freeboard_hist.svg"})
    CHECK_MESSAGE(fs::exists(d.path / f), f);

  // Mode of the 0.02 m freeboard histogram per ice class.
  std::ifstream in(d.path / "freeboard.csv");
  std::string line;
  std::getline(in, line);
  std::map<int, std::map<long, int>> hist;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    REQUIRE(f.size() == 10);
    const int cls = std::stoi(f[4]);
    ++hist[cls][static_cast<long>(std::floor(std::stod(f[8]) / 0.02))];
  }
  auto mode = [&](int cls) {
    long best = 0;
    int count = -1;
    for (auto [bin, n] : hist[cls])
      if (n > count)
        best = bin, count = n;
    return (static_cast<double>(best) + 0.5) * 0.02;
  };
  CHECK(std::fabs(mode(1) - 0.3) < 0.05);
  CHECK(std::fabs(mode(2) - 0.08) < 0.05);

  // Every command is idempotent on its products.
  const auto before = slurp(d.path / "freeboard.csv");
  REQUIRE(run(d.path, "freeboard --workers 3").status == 0);
  CHECK(slurp(d.path / "freeboard.csv") == before);
}
