// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "treeskel/config.hpp"
#include "treeskel/contraction.hpp"
#include "treeskel/evaluate.hpp"
#include "treeskel/scale.hpp"
#include "treeskel/types.hpp"

namespace treeskel::pipeline {

/// Stable artifact locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path restore_dir() const { return root / "restore"; }
  std::filesystem::path restored_cloud() const { return restore_dir() / "restored.ply"; }
  std::filesystem::path restored_model() const { return restore_dir() / "model"; }
  std::filesystem::path scale_dir() const { return root / "scale"; }
  std::filesystem::path scaled_cloud() const { return scale_dir() / "scaled.ply"; }
  std::filesystem::path scaled_model() const { return scale_dir() / "model"; }
  std::filesystem::path skeleton_dir() const { return root / "skeleton"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
};

/// One "key=value ..." record per major step, as printed and saved.
struct StageReport {
  std::string stage;
  std::vector<std::string> lines;

  void add(const std::string& record);
  void write(const std::filesystem::path& path) const;
};

struct RestoreResult {
  LabeledPointCloud cloud;
  CameraModel cameras;
  bool has_cameras = false;
  StageReport report{"restore", {}};
};

struct ScaleResult {
  scale::ScaleEstimate estimate;
  LabeledPointCloud cloud;
  CameraModel cameras;
  StageReport report{"scale", {}};
};

struct SkeletonResult {
  contraction::ContractionResult contraction;
  SkeletonGraph mst;
  SkeletonGraph graph;  // simplified
  StageReport report{"skeletonize", {}};
};

/// In-memory stage bodies. `log` receives report records as they happen,
/// `warn` any warnings. Nothing is written to disk here.
RestoreResult restore_stage(const LabeledPointCloud& cloud, const CameraModel* cameras,
                            const std::vector<Vec3>* sky_samples, const PipelineConfig& config,
                            std::ostream& log);
ScaleResult scale_stage(const LabeledPointCloud& cloud, const CameraModel& cameras,
                        const std::vector<MarkerObservation>& markers, const PipelineConfig& config,
                        std::ostream& log);
SkeletonResult skeleton_stage(const LabeledPointCloud& cloud, const PipelineConfig& config,
                              std::ostream& log, std::ostream& warn);

/// Reads config.input.cloud and applies the label override, if any.
LabeledPointCloud load_input_cloud(const PipelineConfig& config);

/// Commands: load inputs named by the config, run, and write artifacts
/// under config.output_dir unless dry_run is set. Errors are rethrown with
/// the stage name prefixed, keeping their type.
RestoreResult cmd_restore(const PipelineConfig& config, std::ostream& log);
ScaleResult cmd_scale(const PipelineConfig& config, std::ostream& log);
SkeletonResult cmd_skeletonize(const PipelineConfig& config, std::ostream& log, std::ostream& warn);
evaluate::ComparisonReport cmd_eval(const PipelineConfig& config, std::ostream& log);

/// restore -> scale -> skeletonize, starting at config.from_stage. Every
/// input the requested stages need is checked before any work starts.
void cmd_pipeline(const PipelineConfig& config, std::ostream& log, std::ostream& warn);

/// Process exit status for an exception: 2 input/usage, 3 numerical, 1
/// anything else.
int exit_code(const std::exception& e);

}  // namespace treeskel::pipeline
