// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

// treeskel: restore, scale and skeletonize tree point clouds, or run the
// synthetic LBC / S-LBC comparison.

#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treeskel/config.hpp"
#include "treeskel/error.hpp"
#include "treeskel/pipeline.hpp"
#include "treeskel/scene.hpp"

namespace {

using treeskel::ConfigMap;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool semantic = false;
  std::optional<double> lambda_t;
  std::optional<double> d_aruco;
  bool skip_sky = false;
  std::optional<std::string> from_stage;
  std::optional<int> trees;
  bool dry_run = false;
  bool quick = false;
  std::optional<std::string> out, cloud, colmap, markers, sky, labels;
  std::vector<std::string> sets;
  bool print_config = false;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "key=value config file with [sections]");
  app.add_option("--seed", f.seed, "global RNG seed");
  app.add_flag("--semantic", f.semantic, "use S-LBC (semantic weighting) instead of LBC");
  app.add_option("--lambda-t", f.lambda_t, "trunk weight for S-LBC");
  app.add_option("--d-aruco", f.d_aruco, "marker side length in meters");
  app.add_flag("--skip-sky", f.skip_sky, "skip sky-silhouette removal");
  app.add_option("--from-stage", f.from_stage, "pipeline start: restore, scale or skeletonize");
  app.add_option("--trees", f.trees, "number of synthetic trees for eval");
  app.add_flag("--dry-run", f.dry_run, "run without writing artifacts");
  app.add_flag("--quick", f.quick, "smaller synthetic trees for eval");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--cloud", f.cloud, "input PLY");
  app.add_option("--colmap", f.colmap, "COLMAP text model directory");
  app.add_option("--markers", f.markers, "marker detection file");
  app.add_option("--sky", f.sky, "sky color samples file");
  app.add_option("--labels", f.labels, "per-point label override (one code per line)");
  app.add_option("--set", f.sets, "override any config key: section.key=value");
  app.add_flag("--print-config", f.print_config, "print the effective config and exit");
}

ConfigMap build_map(const Flags& f) {
  ConfigMap map;
  if (!f.config.empty()) map = treeskel::load_config_file(f.config);
  treeskel::apply_env_overrides(map);
  auto put = [&map](const char* key, const auto& v) {
    if (v) {
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>) {
        map[key] = *v;
      } else {
        map[key] = std::to_string(*v);
      }
    }
  };
  put("general.seed", f.seed);
  put("general.from_stage", f.from_stage);
  put("eval.trees", f.trees);
  put("output.dir", f.out);
  put("input.cloud", f.cloud);
  put("input.colmap", f.colmap);
  put("input.markers", f.markers);
  put("input.sky_samples", f.sky);
  put("input.labels", f.labels);
  // std::to_string would round doubles to 6 decimals.
  auto put_double = [&map](const char* key, const std::optional<double>& v) {
    if (!v) return;
    std::ostringstream ss;
    ss << std::setprecision(17) << *v;
    map[key] = ss.str();
  };
  put_double("contraction.lambda_trunk", f.lambda_t);
  put_double("scale.d_aruco", f.d_aruco);
  if (f.semantic) map["contraction.semantic"] = "true";
  if (f.skip_sky) map["restore.skip_sky"] = "true";
  if (f.dry_run) map["general.dry_run"] = "true";
  if (f.quick) map["eval.quick"] = "true";
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw treeskel::InputError("--set expects section.key=value, got '" + s + "'");
    }
    std::string key = s.substr(0, eq);
    if (key.find('.') == std::string::npos) key = "general." + key;
    map[key] = s.substr(eq + 1);
  }
  return map;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treeskel: tree point cloud restoration, scaling and skeletonization"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* restore = app.add_subcommand("restore", "align, crop, denoise and de-sky a cloud");
  CLI::App* scale = app.add_subcommand("scale", "estimate metric scale from marker detections");
  CLI::App* skel =
      app.add_subcommand("skeletonize", "LBC / S-LBC contraction plus graph extraction");
  CLI::App* eval = app.add_subcommand("eval", "synthetic LBC vs S-LBC comparison");
  CLI::App* pipe = app.add_subcommand("pipeline", "restore -> scale -> skeletonize");
  CLI::App* make_scene = app.add_subcommand("make-scene", "write a synthetic fixture scene");
  std::string scene_dir;
  std::uint64_t scene_seed = 1;
  make_scene->add_option("dir", scene_dir, "output directory")->required();
  make_scene->add_option("--seed", scene_seed, "scene seed");
  for (CLI::App* sub : {restore, scale, skel, eval, pipe}) add_common(*sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (make_scene->parsed()) {
      treeskel::scene::SceneParams p;
      p.seed = scene_seed;
      const auto s = treeskel::scene::make_scene(p);
      treeskel::scene::write_scene(s, scene_dir);
      std::cout << "wrote scene to " << scene_dir << " (" << s.cloud.size() << " points, "
                << s.markers.size() << " marker views, " << s.meters_per_unit << " m per unit)\n";
      return 0;
    }

    const treeskel::PipelineConfig cfg = treeskel::config_from_map(build_map(flags));
    if (flags.print_config) {
      treeskel::write_config(treeskel::config_to_map(cfg), std::cout);
      return 0;
    }
    if (restore->parsed()) treeskel::pipeline::cmd_restore(cfg, std::cout);
    if (scale->parsed()) treeskel::pipeline::cmd_scale(cfg, std::cout);
    if (skel->parsed()) treeskel::pipeline::cmd_skeletonize(cfg, std::cout, std::cerr);
    if (eval->parsed()) treeskel::pipeline::cmd_eval(cfg, std::cout);
    if (pipe->parsed()) treeskel::pipeline::cmd_pipeline(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return treeskel::pipeline::exit_code(e);
  }
  return 0;
}
