// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "support.hpp"
#include "treeskel/io.hpp"
#include "treeskel/scale.hpp"

namespace fs = std::filesystem;
using namespace treeskel;
using testing::read_bytes;
using testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const TempDir& tmp, const std::string& args, const std::string& env = "") {
  const fs::path out = tmp / "stdout.txt";
  const fs::path err = tmp / "stderr.txt";
  const std::string cmd =
      env + " '" + TREESKEL_CLI + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_bytes(out), read_bytes(err)};
}

/// Scene fixture written once per test; the config paths are absolute.
struct Scene {
  TempDir tmp{"cli"};
  fs::path dir = tmp / "scene";
  std::string config;

  explicit Scene(int seed = 3) {
    const Run r = cli(tmp, "make-scene '" + dir.string() + "' --seed " + std::to_string(seed));
    REQUIRE(r.code == 0);
    config = "--config '" + (dir / "treeskel.ini").string() + "'";
  }
  std::string out(const std::string& name) const {
    return " --out '" + (tmp / name).string() + "'";
  }
};

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  TempDir tmp("cli");
  CHECK(cli(tmp, "").code == 2);
  CHECK(cli(tmp, "restore --no-such-flag").code == 2);
  CHECK(cli(tmp, "--help").code == 0);
  CHECK(cli(tmp, "eval --set contraction.nope=1").code == 2);
  CHECK(cli(tmp, "eval --set bogus").code == 2);
}

TEST_CASE("restore on the fixture scene") {
  Scene s;
  const Run r = cli(s.tmp, "restore " + s.config + s.out("o"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(s.tmp / "o" / "restore" / "restored.ply"));
  CHECK(fs::exists(s.tmp / "o" / "restore" / "model" / "images.txt"));
  const std::string report = read_bytes(s.tmp / "o" / "restore" / "report.txt");
  CHECK(count_lines(report) == 4);
  for (const char* step : {"step=align", "step=roi", "step=sor", "step=sky"})
    CHECK(report.find(step) != std::string::npos);
  CHECK(report.find("skipped") == std::string::npos);
  CHECK(r.out == report);

  const Run skip = cli(s.tmp, "restore " + s.config + s.out("o2") + " --skip-sky");
  REQUIRE(skip.code == 0);
  CHECK(skip.out.find("step=sky status=skipped") != std::string::npos);
  CHECK(count_lines(read_bytes(s.tmp / "o2" / "restore" / "report.txt")) == 4);
}

TEST_CASE("restore without a camera model exits 2") {
  Scene s;
  const Run r = cli(s.tmp, "restore " + s.config + " --colmap '' " + s.out("o"));
  CHECK(r.code == 2);
  CHECK(r.err.find("restore:") != std::string::npos);
  CHECK_FALSE(fs::exists(s.tmp / "o"));
  // With cropping off the same invocation succeeds.
  CHECK(cli(s.tmp, "restore " + s.config + " --colmap '' --set restore.crop_roi=false" + s.out("o"))
            .code == 0);
}

TEST_CASE("scale prints the estimate exactly") {
  Scene s;
  const Run r = cli(s.tmp, "scale " + s.config + s.out("o"));
  REQUIRE(r.code == 0);
  const auto cams = io::read_colmap_model(s.dir / "sparse");
  const auto markers = io::read_marker_detections(s.dir / "markers.txt");
  const auto est = scale::estimate_scale(markers, cams, 0.2);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, est.scale);
  const std::string want = "s=" + std::string(buf, res.ptr) + " ";
  CHECK(r.out.find(want) != std::string::npos);
  CHECK(r.out.find("residual_4=") != std::string::npos);
  CHECK(est.scale == doctest::Approx(2.5).epsilon(0.01));
  CHECK(fs::exists(s.tmp / "o" / "scale" / "scaled.ply"));
  CHECK(fs::exists(s.tmp / "o" / "scale" / "model" / "cameras.txt"));
}

TEST_CASE("scale with one marker view exits 2") {
  Scene s;
  const std::string markers = read_bytes(s.dir / "markers.txt");
  testing::write_text(s.tmp / "one.txt", markers.substr(0, markers.find('\n') + 1));
  const Run r = cli(s.tmp, "scale " + s.config + " --markers '" + (s.tmp / "one.txt").string() +
                               "'" + s.out("o"));
  CHECK(r.code == 2);
  CHECK(r.err.find("N_J >= 2") != std::string::npos);
}

TEST_CASE("scale dry run writes nothing") {
  Scene s;
  const Run r = cli(s.tmp, "scale " + s.config + " --dry-run" + s.out("dry"));
  CHECK(r.code == 0);
  CHECK(r.out.find("step=estimate s=") != std::string::npos);
  CHECK_FALSE(fs::exists(s.tmp / "dry"));
}

TEST_CASE("semantic skeletonization yields no degree-2 nodes, deterministically") {
  Scene s;
  const std::string base = "skeletonize " + s.config + " --semantic --lambda-t 10 --seed 5";
  REQUIRE(cli(s.tmp, base + s.out("a")).code == 0);
  REQUIRE(cli(s.tmp, base + s.out("b")).code == 0);
  const auto g = io::read_graph(s.tmp / "a" / "skeleton" / "graph.txt", io::GraphFormat::kEdgeList);
  CHECK(g.node_count() >= 2);
  CHECK(g.is_tree());
  for (auto d : g.degrees()) CHECK(d != 2);
  for (const char* f : {"contracted.ply", "graph.txt", "graph.obj", "mst.txt",
                        "contraction_log.txt", "report.txt"}) {
    const std::string a = read_bytes(s.tmp / "a" / "skeleton" / f);
    CHECK_MESSAGE(!a.empty(), f);
    CHECK_MESSAGE(a == read_bytes(s.tmp / "b" / "skeleton" / f), f);
  }
}

TEST_CASE("semantic on an unlabeled cloud warns and matches LBC") {
  Scene s;
  std::string labels;
  const auto cloud = io::read_ply(s.dir / "cloud.ply");
  for (std::size_t i = 0; i < cloud.size(); ++i) labels += "2\n";
  testing::write_text(s.tmp / "labels.txt", labels);
  const std::string base =
      "skeletonize " + s.config + " --labels '" + (s.tmp / "labels.txt").string() + "'";
  const Run sem = cli(s.tmp, base + " --semantic" + s.out("sem"));
  REQUIRE(sem.code == 0);
  CHECK(sem.err.find("warning") != std::string::npos);
  REQUIRE(cli(s.tmp, base + s.out("lbc")).code == 0);
  CHECK(read_bytes(s.tmp / "sem" / "skeleton" / "contracted.ply") ==
        read_bytes(s.tmp / "lbc" / "skeleton" / "contracted.ply"));

  // No trunk or branch labels at all: falls back to every point, with a warning.
  std::string none;
  for (std::size_t i = 0; i < cloud.size(); ++i) none += "255\n";
  testing::write_text(s.tmp / "none.txt", none);
  const Run all = cli(s.tmp, "skeletonize " + s.config +
                                 " --dry-run --set contraction.max_iterations=2 --labels '" +
                                 (s.tmp / "none.txt").string() + "'" + s.out("n"));
  CHECK(all.code == 0);
  CHECK(all.err.find("warning: no trunk or branch labels") != std::string::npos);
}

TEST_CASE("eval quick run gives a four-row summary") {
  TempDir tmp("cli");
  const Run r = cli(tmp, "eval --trees 1 --quick --out '" + (tmp / "o").string() + "'");
  REQUIRE(r.code == 0);
  const std::string summary = read_bytes(tmp / "o" / "eval" / "summary.txt");
  CHECK(count_lines(summary) == 5);
  for (const char* row : {"LBC with noise ", "S-LBC with noise ", "LBC with noise & occlusion",
                          "S-LBC with noise & occlusion"})
    CHECK(summary.find(row) != std::string::npos);
  CHECK(count_lines(read_bytes(tmp / "o" / "eval" / "scores.csv")) == 5);
  CHECK(fs::exists(tmp / "o" / "eval" / "trees" / "tree0_skeleton.txt"));
}

TEST_CASE("eval rejects non-positive trunk weight") {
  TempDir tmp("cli");
  CHECK(cli(tmp, "eval --lambda-t 0").code == 2);
  CHECK(cli(tmp, "eval --lambda-t -3").code == 2);
  CHECK(cli(tmp, "eval --trees 0").code == 2);
}

TEST_CASE("environment overrides config and flags override environment") {
  Scene s;
  const std::string cmd = "eval " + s.config + " --print-config";
  const Run plain = cli(s.tmp, cmd);
  CHECK(plain.out.find("lambda_trunk = 10\n") != std::string::npos);
  const Run env = cli(s.tmp, cmd, "TREESKEL_CONTRACTION_LAMBDA_TRUNK=4");
  CHECK(env.out.find("lambda_trunk = 4\n") != std::string::npos);
  const Run flag = cli(s.tmp, cmd + " --lambda-t 7", "TREESKEL_CONTRACTION_LAMBDA_TRUNK=4");
  CHECK(flag.out.find("lambda_trunk = 7\n") != std::string::npos);
  CHECK(flag.out.find("d_aruco = 0.2\n") != std::string::npos);
}

TEST_CASE("pipeline end to end, then resume from scale") {
  Scene s;
  const Run r = cli(s.tmp, "pipeline " + s.config + s.out("p"));
  REQUIRE(r.code == 0);
  for (const char* f : {"restore/restored.ply", "restore/report.txt", "restore/model/images.txt",
                        "scale/scaled.ply", "scale/report.txt", "scale/model/cameras.txt",
                        "skeleton/contracted.ply", "skeleton/graph.txt", "skeleton/graph.obj",
                        "skeleton/contraction_log.txt", "skeleton/report.txt"})
    CHECK_MESSAGE(fs::exists(s.tmp / "p" / f), f);
  const std::string restored = read_bytes(s.tmp / "p" / "restore" / "restored.ply");
  const std::string scaled = read_bytes(s.tmp / "p" / "scale" / "scaled.ply");
  const std::string contracted = read_bytes(s.tmp / "p" / "skeleton" / "contracted.ply");

  const Run resume = cli(s.tmp, "pipeline " + s.config + s.out("p") + " --from-stage scale");
  REQUIRE(resume.code == 0);
  CHECK(resume.out.find("stage=restore") == std::string::npos);
  CHECK(resume.out.find("stage=scale") != std::string::npos);
  CHECK(read_bytes(s.tmp / "p" / "restore" / "restored.ply") == restored);
  CHECK(read_bytes(s.tmp / "p" / "scale" / "scaled.ply") == scaled);
  CHECK(read_bytes(s.tmp / "p" / "skeleton" / "contracted.ply") == contracted);

  CHECK(cli(s.tmp, "pipeline " + s.config + s.out("fresh") + " --from-stage scale").code == 2);
}

TEST_CASE("pipeline without d_aruco fails before any work") {
  Scene s;
  const std::string ini = read_bytes(s.dir / "treeskel.ini");
  std::string stripped = ini.substr(0, ini.find("[scale]")) + ini.substr(ini.find("[output]"));
  testing::write_text(s.dir / "no_scale.ini", stripped);
  const Run r =
      cli(s.tmp, "pipeline --config '" + (s.dir / "no_scale.ini").string() + "'" + s.out("p"));
  CHECK(r.code == 2);
  CHECK(r.err.find("d_aruco") != std::string::npos);
  CHECK(r.out.empty());
  CHECK_FALSE(fs::exists(s.tmp / "p"));
}

TEST_CASE("inputs are never modified") {
  Scene s;
  const std::string before = read_bytes(s.dir / "cloud.ply");
  REQUIRE(cli(s.tmp, "pipeline " + s.config + s.out("p")).code == 0);
  CHECK(read_bytes(s.dir / "cloud.ply") == before);
}
