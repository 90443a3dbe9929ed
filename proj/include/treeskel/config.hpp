// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "treeskel/contraction.hpp"
#include "treeskel/evaluate.hpp"
#include "treeskel/restore.hpp"

namespace treeskel {

/// Flat view of a config file: "section.key" -> raw value.
using ConfigMap = std::map<std::string, std::string>;

/// Parses
///
///   # comment
///   [section]
///   key = value
///
/// Keys outside any section live in "general". Relative paths are left
/// alone here; see load_config_file.
ConfigMap parse_config(std::istream& in, const std::string& source = "<config>");

/// parse_config plus resolution of relative [input]/[output] paths against
/// the file's directory.
ConfigMap load_config_file(const std::filesystem::path& path);

/// Every key the pipeline understands, in "section.key" form.
const std::vector<std::string>& known_config_keys();

/// "contraction.lambda_trunk" -> "TREESKEL_CONTRACTION_LAMBDA_TRUNK".
std::string env_var_name(const std::string& key);

using EnvLookup = std::function<const char*(const char*)>;

/// Overwrites entries from TREESKEL_<SECTION>_<KEY> variables.
void apply_env_overrides(ConfigMap& map, const EnvLookup& lookup);
void apply_env_overrides(ConfigMap& map);

enum class Stage { kRestore, kScale, kSkeletonize };

Stage parse_stage(const std::string& name);
std::string_view stage_name(Stage s);

struct PipelineConfig {
  struct Inputs {
    std::filesystem::path cloud;
    std::filesystem::path colmap;
    std::filesystem::path markers;
    std::filesystem::path sky_samples;
    std::filesystem::path labels;  // optional per-point label override
  } input;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 7;

  restore::RestoreParams restore;
  bool crop_roi = true;
  bool skip_sky = false;

  /// Marker side length in meters; <= 0 means unset.
  double d_aruco = 0.0;

  contraction::ContractionParams contraction;
  bool semantic = false;
  /// Voxel size applied before contraction; 0 disables.
  double skeleton_voxel_size = 0.015;
  /// FPS sample count; 0 selects the default.
  std::size_t fps_count = 0;

  evaluate::DatasetParams eval;
  bool quick = false;

  bool dry_run = false;
  Stage from_stage = Stage::kRestore;

  /// Range checks that do not depend on which stages run.
  void validate() const;
};

/// Defaults overlaid with `map`. Unknown keys and malformed values throw
/// InputError naming the key.
PipelineConfig config_from_map(const ConfigMap& map);

/// Inverse of config_from_map; every known key is present.
ConfigMap config_to_map(const PipelineConfig& config);

void write_config(const ConfigMap& map, std::ostream& out);

}  // namespace treeskel
