// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>

#include "treeskel/error.hpp"
#include "treeskel/io.hpp"
#include "treeskel/restore.hpp"
#include "treeskel/topology.hpp"

namespace treeskel::pipeline {
namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string vec(const Vec3& v) { return num(v.x()) + "," + num(v.y()) + "," + num(v.z()); }

void emit(StageReport& report, std::ostream& log, const std::string& record) {
  report.add(record);
  log << report.lines.back() << '\n';
}

std::size_t count_label(const LabeledPointCloud& cloud, SemanticLabel label) {
  return static_cast<std::size_t>(std::count(cloud.labels.begin(), cloud.labels.end(), label));
}

/// Runs `fn`, prefixing any error message with the stage name.
template <typename Fn>
auto in_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw InputError(prefix + e.what());
  }
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw InputError(std::string("no ") + what + " given");
  if (!std::filesystem::exists(p)) {
    throw InputError(std::string(what) + " '" + p.string() + "' does not exist");
  }
}

void write_model_dir(const CameraModel& cams, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_colmap_model(cams, dir);
}

void write_restore(const RestoreResult& r, const Layout& out) {
  std::filesystem::create_directories(out.restore_dir());
  io::write_ply(r.cloud, out.restored_cloud());
  if (r.has_cameras) write_model_dir(r.cameras, out.restored_model());
  r.report.write(out.restore_dir() / "report.txt");
}

void write_scale(const ScaleResult& r, const Layout& out) {
  std::filesystem::create_directories(out.scale_dir());
  io::write_ply(r.cloud, out.scaled_cloud());
  write_model_dir(r.cameras, out.scaled_model());
  r.report.write(out.scale_dir() / "report.txt");
}

void write_skeleton(const SkeletonResult& r, const Layout& out) {
  const auto dir = out.skeleton_dir();
  std::filesystem::create_directories(dir);
  io::write_ply(r.contraction.cloud, dir / "contracted.ply");
  topology::export_graph(r.graph, dir / "graph.txt", io::GraphFormat::kEdgeList);
  topology::export_graph(r.graph, dir / "graph.obj", io::GraphFormat::kObj);
  topology::export_graph(r.mst, dir / "mst.txt", io::GraphFormat::kEdgeList);
  std::ofstream log(dir / "contraction_log.txt");
  if (!log) throw InputError("cannot write '" + (dir / "contraction_log.txt").string() + "'");
  for (const auto& rec : r.contraction.log) {
    log << "iteration=" << rec.iteration << " w_l=" << num(rec.contraction_weight)
        << " w_h_mean=" << num(rec.mean_attraction_weight)
        << " volume_ratio=" << num(rec.volume_ratio) << " isolated=" << rec.isolated
        << " trunk_rows=" << rec.semantic_rows << '\n';
  }
  r.report.write(dir / "report.txt");
}

void check_restore_inputs(const PipelineConfig& c) {
  require_file(c.input.cloud, "input cloud");
  if (!c.input.labels.empty()) require_file(c.input.labels, "label file");
  if (c.crop_roi) {
    if (c.input.colmap.empty()) {
      throw InputError(
          "ROI crop needs a camera model (set input.colmap or restore.crop_roi = false)");
    }
    require_file(c.input.colmap, "camera model");
  } else if (!c.input.colmap.empty()) {
    require_file(c.input.colmap, "camera model");
  }
  if (!c.skip_sky) {
    if (c.input.sky_samples.empty()) {
      throw InputError("sky removal needs input.sky_samples (or --skip-sky)");
    }
    require_file(c.input.sky_samples, "sky samples");
  }
}

void check_scale_inputs(const PipelineConfig& c) {
  if (!(c.d_aruco > 0.0))
    throw InputError("scale.d_aruco (marker side in meters) must be set and positive");
  require_file(c.input.markers, "marker detections");
}

}  // namespace

void StageReport::add(const std::string& record) {
  lines.push_back("stage=" + stage + " " + record);
}

void StageReport::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& l : lines) out << l << '\n';
}

LabeledPointCloud load_input_cloud(const PipelineConfig& config) {
  require_file(config.input.cloud, "input cloud");
  LabeledPointCloud cloud = io::read_ply(config.input.cloud);
  if (!config.input.labels.empty()) {
    const auto labels = io::read_label_file(config.input.labels);
    if (labels.size() != cloud.size()) {
      throw InputError("label file has " + std::to_string(labels.size()) + " entries for " +
                       std::to_string(cloud.size()) + " points");
    }
    cloud.labels = labels;
  }
  return cloud;
}

RestoreResult restore_stage(const LabeledPointCloud& cloud, const CameraModel* cameras,
                            const std::vector<Vec3>* sky_samples, const PipelineConfig& config,
                            std::ostream& log) {
  cloud.validate();
  if (cloud.size() < 3) throw InputError("cloud has fewer than 3 points");
  if (config.crop_roi && cameras == nullptr) {
    throw InputError(
        "ROI crop needs a camera model (set input.colmap or restore.crop_roi = false)");
  }
  if (!config.skip_sky && sky_samples == nullptr) {
    throw InputError("sky removal needs sky samples (or --skip-sky)");
  }
  restore::RestoreParams params = config.restore;
  params.seed = config.seed;
  params.validate();

  RestoreResult r;
  r.has_cameras = cameras != nullptr;
  const restore::GroundPlane plane = restore::fit_ground_plane(cloud, params);
  restore::Alignment al =
      restore::align_to_ground(cloud, cameras != nullptr ? *cameras : CameraModel{}, plane);
  emit(r.report, log,
       "step=align in=" + std::to_string(cloud.size()) + " out=" + std::to_string(al.cloud.size()) +
           " inliers=" + std::to_string(plane.inliers.size()) + " normal=" + vec(plane.normal) +
           " offset=" + num(plane.offset) + " flipped=" + (al.flipped ? "1" : "0"));
  r.cameras = std::move(al.cameras);
  LabeledPointCloud cur = std::move(al.cloud);

  if (config.crop_roi) {
    LabeledPointCloud next = restore::crop_roi(cur, r.cameras);
    emit(r.report, log,
         "step=roi in=" + std::to_string(cur.size()) + " out=" + std::to_string(next.size()) +
             " removed=" + std::to_string(cur.size() - next.size()));
    cur = std::move(next);
  } else {
    emit(r.report, log, "step=roi status=skipped");
  }

  {
    if (cur.size() <= static_cast<std::size_t>(params.sor_k)) {
      throw InputError("too few points left for outlier removal");
    }
    LabeledPointCloud next =
        restore::statistical_outlier_removal(cur, params.sor_k, params.sor_std_ratio);
    emit(r.report, log,
         "step=sor in=" + std::to_string(cur.size()) + " out=" + std::to_string(next.size()) +
             " removed=" + std::to_string(cur.size() - next.size()));
    cur = std::move(next);
  }

  if (config.skip_sky) {
    emit(r.report, log, "step=sky status=skipped");
  } else {
    const auto centroids = restore::sky_color_centroids(*sky_samples, params);
    LabeledPointCloud next = restore::remove_sky_silhouette(cur, *sky_samples, params);
    emit(r.report, log,
         "step=sky in=" + std::to_string(cur.size()) + " out=" + std::to_string(next.size()) +
             " removed=" + std::to_string(cur.size() - next.size()) +
             " clusters=" + std::to_string(centroids.size()));
    cur = std::move(next);
  }
  r.cloud = std::move(cur);
  return r;
}

ScaleResult scale_stage(const LabeledPointCloud& cloud, const CameraModel& cameras,
                        const std::vector<MarkerObservation>& markers, const PipelineConfig& config,
                        std::ostream& log) {
  if (!(config.d_aruco > 0.0))
    throw InputError("scale.d_aruco (marker side in meters) must be set and positive");
  cameras.validate();
  ScaleResult r;
  r.estimate = scale::estimate_scale(markers, cameras, config.d_aruco);
  const auto& e = r.estimate;
  std::string rec = "step=estimate s=" + num(e.scale) + " mean_side=" + num(e.mean_side) +
                    " views=" + std::to_string(e.views);
  for (int k = 0; k < 4; ++k)
    rec += " residual_" + std::to_string(k + 1) + "=" + num(e.residuals[k]);
  emit(r.report, log, rec);
  r.cloud = cloud;
  r.cameras = cameras;
  scale::apply_scale(r.cloud, r.cameras, e.scale);
  emit(r.report, log,
       "step=apply points=" + std::to_string(r.cloud.size()) +
           " poses=" + std::to_string(r.cameras.poses.size()));
  return r;
}

SkeletonResult skeleton_stage(const LabeledPointCloud& cloud, const PipelineConfig& config,
                              std::ostream& log, std::ostream& warn) {
  cloud.validate();
  config.contraction.validate();
  SkeletonResult r;

  std::vector<std::size_t> tree_idx;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == SemanticLabel::kTrunk || cloud.labels[i] == SemanticLabel::kBranch) {
      tree_idx.push_back(i);
    }
  }
  LabeledPointCloud input;
  if (tree_idx.empty()) {
    warn << "warning: no trunk or branch labels; skeletonizing all " << cloud.size() << " points\n";
    input = cloud;
  } else {
    input = cloud.subset(tree_idx);
  }
  const std::size_t trunk = count_label(input, SemanticLabel::kTrunk);
  if (config.semantic && trunk == 0) {
    warn << "warning: --semantic given but no point is labeled trunk; S-LBC reduces to LBC\n";
  }
  const std::size_t selected = input.size();
  if (config.skeleton_voxel_size > 0.0) {
    input = evaluate::voxel_downsample(input, config.skeleton_voxel_size);
  }
  emit(r.report, log,
       "step=select in=" + std::to_string(cloud.size()) + " tree=" + std::to_string(selected) +
           " voxel=" + num(config.skeleton_voxel_size) + " out=" + std::to_string(input.size()) +
           " trunk=" + std::to_string(count_label(input, SemanticLabel::kTrunk)));
  if (input.size() <= config.contraction.k) {
    throw InputError(
        "only " + std::to_string(input.size()) +
        " points to skeletonize; need more than k = " + std::to_string(config.contraction.k));
  }

  r.contraction = config.semantic ? contraction::contract_slbc(input, config.contraction)
                                  : contraction::contract_lbc(input, config.contraction);
  const auto& last = r.contraction.log.back();
  emit(r.report, log,
       std::string("step=contract algorithm=") + (config.semantic ? "S-LBC" : "LBC") +
           " lambda_t=" + num(config.semantic ? config.contraction.lambda_trunk : 1.0) +
           " iterations=" + std::to_string(r.contraction.log.size()) + " converged=" +
           (r.contraction.converged ? "1" : "0") + " volume_ratio=" + num(last.volume_ratio) +
           " isolated=" + std::to_string(last.isolated));

  const auto& pts = r.contraction.cloud.positions;
  const std::size_t n_samples = config.fps_count > 0 ? std::min(config.fps_count, pts.size())
                                                     : topology::default_fps_count(pts.size());
  const auto picks = topology::farthest_point_sampling(pts, n_samples);
  std::vector<Vec3> samples;
  samples.reserve(picks.size());
  for (std::size_t i : picks) samples.push_back(pts[i]);
  r.mst = topology::minimum_spanning_tree(samples);
  r.graph = topology::simplify_graph(r.mst);
  emit(r.report, log,
       "step=graph samples=" + std::to_string(samples.size()) + " mst_edges=" +
           std::to_string(r.mst.edge_count()) + " nodes=" + std::to_string(r.graph.node_count()) +
           " edges=" + std::to_string(r.graph.edge_count()) +
           " length=" + num(r.graph.total_length()));
  return r;
}

RestoreResult cmd_restore(const PipelineConfig& config, std::ostream& log) {
  return in_stage("restore", [&] {
    config.validate();
    check_restore_inputs(config);
    const LabeledPointCloud cloud = load_input_cloud(config);
    std::optional<CameraModel> cams;
    if (!config.input.colmap.empty()) cams = io::read_colmap_model(config.input.colmap);
    std::optional<std::vector<Vec3>> sky;
    if (!config.skip_sky) sky = io::read_sky_samples(config.input.sky_samples);
    RestoreResult r =
        restore_stage(cloud, cams ? &*cams : nullptr, sky ? &*sky : nullptr, config, log);
    if (!config.dry_run) write_restore(r, Layout{config.output_dir});
    return r;
  });
}

ScaleResult cmd_scale(const PipelineConfig& config, std::ostream& log) {
  return in_stage("scale", [&] {
    config.validate();
    check_scale_inputs(config);
    require_file(config.input.colmap, "camera model");
    const LabeledPointCloud cloud = load_input_cloud(config);
    const CameraModel cams = io::read_colmap_model(config.input.colmap);
    const auto markers = io::read_marker_detections(config.input.markers);
    ScaleResult r = scale_stage(cloud, cams, markers, config, log);
    if (!config.dry_run) write_scale(r, Layout{config.output_dir});
    return r;
  });
}

SkeletonResult cmd_skeletonize(const PipelineConfig& config, std::ostream& log,
                               std::ostream& warn) {
  return in_stage("skeletonize", [&] {
    config.validate();
    const LabeledPointCloud cloud = load_input_cloud(config);
    SkeletonResult r = skeleton_stage(cloud, config, log, warn);
    if (!config.dry_run) write_skeleton(r, Layout{config.output_dir});
    return r;
  });
}

evaluate::ComparisonReport cmd_eval(const PipelineConfig& config, std::ostream& log) {
  return in_stage("eval", [&] {
    config.validate();
    evaluate::DatasetParams dataset = config.eval;
    dataset.seed = config.seed;
    if (config.quick) {
      dataset.tree.point_density = std::min(dataset.tree.point_density, 3000.0);
      dataset.tree.branch_levels = std::min(dataset.tree.branch_levels, 1);
    }
    const Layout out{config.output_dir};
    const std::filesystem::path artifacts =
        config.dry_run ? std::filesystem::path{} : out.eval_dir() / "trees";
    evaluate::ComparisonReport report =
        evaluate::run_comparison(dataset, config.contraction, artifacts);
    report.write_summary(log);
    if (!config.dry_run) {
      std::ofstream rows(out.eval_dir() / "scores.csv");
      std::ofstream summary(out.eval_dir() / "summary.txt");
      if (!rows || !summary) throw InputError("cannot write to '" + out.eval_dir().string() + "'");
      report.write_rows(rows);
      report.write_summary(summary);
    }
    return report;
  });
}

void cmd_pipeline(const PipelineConfig& config, std::ostream& log, std::ostream& warn) {
  const Layout out{config.output_dir};
  const Stage first = config.from_stage;
  const bool run_restore = first == Stage::kRestore;
  const bool run_scale = first != Stage::kSkeletonize;

  // Everything that can be checked up front is, before any work.
  in_stage("pipeline", [&] {
    config.validate();
    if (run_restore) check_restore_inputs(config);
    if (run_scale) check_scale_inputs(config);
    if (run_restore && run_scale && config.input.colmap.empty()) {
      throw InputError("the scale stage needs a camera model (input.colmap)");
    }
    if (first == Stage::kScale) {
      require_file(out.restored_cloud(), "restore output");
      require_file(out.restored_model(), "restored camera model");
    }
    if (first == Stage::kSkeletonize) {
      require_file(out.scaled_cloud(), "scale output");
    }
    if (!config.input.labels.empty()) require_file(config.input.labels, "label file");
  });

  LabeledPointCloud cloud;
  CameraModel cams;
  // Later stages read the persisted artifacts so a resumed run matches a full one.
  if (run_restore) {
    RestoreResult r = cmd_restore(config, log);
    cloud = std::move(r.cloud);
    cams = std::move(r.cameras);
  }
  if (run_scale && (!run_restore || !config.dry_run)) {
    in_stage("scale", [&] {
      cloud = io::read_ply(out.restored_cloud());
      cams = io::read_colmap_model(out.restored_model());
      return 0;
    });
  }

  if (run_scale) {
    ScaleResult r = in_stage("scale", [&] {
      const auto markers = io::read_marker_detections(config.input.markers);
      ScaleResult s = scale_stage(cloud, cams, markers, config, log);
      if (!config.dry_run) write_scale(s, out);
      return s;
    });
    cloud = std::move(r.cloud);
  }
  if (!run_scale || !config.dry_run) {
    in_stage("skeletonize", [&] {
      cloud = io::read_ply(out.scaled_cloud());
      return 0;
    });
  }

  in_stage("skeletonize", [&] {
    SkeletonResult s = skeleton_stage(cloud, config, log, warn);
    if (!config.dry_run) write_skeleton(s, out);
    return 0;
  });
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const InputError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 3;
  return 1;
}

}  // namespace treeskel::pipeline
