// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "treeskel/error.hpp"

namespace treeskel {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw InputError("config key '" + key + "': expected " + want + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "an integer");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::size_t>(n);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, v, "an unsigned integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string key;
  bool is_path;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define TS_PATH(k, member)                                                                      \
  Field {                                                                                       \
    k, true, [](PipelineConfig& c, const std::string&, const std::string& v) { c.member = v; }, \
        [](const PipelineConfig& c) { return c.member.string(); }                               \
  }
#define TS_DOUBLE(k, member)                                                       \
  Field {                                                                          \
    k, false,                                                                      \
        [](PipelineConfig& c, const std::string& key, const std::string& v) {      \
          c.member = to_double(key, v);                                            \
        },                                                                         \
        [](const PipelineConfig& c) { return fmt(static_cast<double>(c.member)); } \
  }
#define TS_BOOL(k, member)                                                    \
  Field {                                                                     \
    k, false,                                                                 \
        [](PipelineConfig& c, const std::string& key, const std::string& v) { \
          c.member = to_bool(key, v);                                         \
        },                                                                    \
        [](const PipelineConfig& c) { return fmt(c.member); }                 \
  }
#define TS_INT(k, member)                                                     \
  Field {                                                                     \
    k, false,                                                                 \
        [](PipelineConfig& c, const std::string& key, const std::string& v) { \
          c.member = static_cast<decltype(c.member)>(to_int(key, v));         \
        },                                                                    \
        [](const PipelineConfig& c) { return std::to_string(c.member); }      \
  }
#define TS_COUNT(k, member)                                                   \
  Field {                                                                     \
    k, false,                                                                 \
        [](PipelineConfig& c, const std::string& key, const std::string& v) { \
          c.member = static_cast<decltype(c.member)>(to_count(key, v));       \
        },                                                                    \
        [](const PipelineConfig& c) { return std::to_string(c.member); }      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      TS_PATH("input.cloud", input.cloud),
      TS_PATH("input.colmap", input.colmap),
      TS_PATH("input.markers", input.markers),
      TS_PATH("input.sky_samples", input.sky_samples),
      TS_PATH("input.labels", input.labels),
      TS_PATH("output.dir", output_dir),
      Field{"general.seed", false,
            [](PipelineConfig& c, const std::string& key, const std::string& v) {
              c.seed = to_u64(key, v);
            },
            [](const PipelineConfig& c) { return std::to_string(c.seed); }},
      TS_BOOL("general.dry_run", dry_run),
      Field{"general.from_stage", false,
            [](PipelineConfig& c, const std::string&, const std::string& v) {
              c.from_stage = parse_stage(v);
            },
            [](const PipelineConfig& c) { return std::string(stage_name(c.from_stage)); }},
      TS_DOUBLE("restore.ransac_threshold", restore.ransac_threshold),
      TS_INT("restore.ransac_iterations", restore.ransac_iterations),
      TS_INT("restore.sor_k", restore.sor_k),
      TS_DOUBLE("restore.sor_std_ratio", restore.sor_std_ratio),
      TS_DOUBLE("restore.dbscan_eps", restore.dbscan_eps),
      TS_INT("restore.dbscan_min_pts", restore.dbscan_min_pts),
      TS_DOUBLE("restore.sky_color_tolerance", restore.sky_color_tolerance),
      TS_BOOL("restore.crop_roi", crop_roi),
      TS_BOOL("restore.skip_sky", skip_sky),
      TS_DOUBLE("scale.d_aruco", d_aruco),
      TS_DOUBLE("contraction.initial_contraction_weight", contraction.initial_contraction_weight),
      TS_DOUBLE("contraction.initial_attraction_weight", contraction.initial_attraction_weight),
      TS_DOUBLE("contraction.contraction_amplification", contraction.contraction_amplification),
      TS_DOUBLE("contraction.max_contraction_weight", contraction.max_contraction_weight),
      TS_DOUBLE("contraction.max_attraction_gain", contraction.max_attraction_gain),
      TS_INT("contraction.max_iterations", contraction.max_iterations),
      TS_DOUBLE("contraction.volume_ratio_threshold", contraction.volume_ratio_threshold),
      TS_DOUBLE("contraction.degenerate_ratio", contraction.degenerate_ratio),
      TS_COUNT("contraction.k", contraction.k),
      TS_DOUBLE("contraction.lambda_trunk", contraction.lambda_trunk),
      TS_BOOL("contraction.semantic", semantic),
      TS_DOUBLE("skeleton.voxel_size", skeleton_voxel_size),
      TS_COUNT("skeleton.fps_count", fps_count),
      TS_INT("eval.trees", eval.trees),
      TS_BOOL("eval.quick", quick),
      TS_DOUBLE("eval.noise_factor", eval.noise_factor),
      TS_COUNT("eval.hole_count", eval.hole_count),
      TS_DOUBLE("eval.hole_radius", eval.hole_radius),
      TS_DOUBLE("eval.voxel_size", eval.voxel_size),
      TS_DOUBLE("eval.skeleton_spacing", eval.skeleton_spacing),
      TS_DOUBLE("eval.trunk_height", eval.tree.trunk_height),
      TS_DOUBLE("eval.trunk_radius", eval.tree.trunk_radius),
      TS_INT("eval.branch_levels", eval.tree.branch_levels),
      TS_INT("eval.branches_per_level", eval.tree.branches_per_level),
      TS_DOUBLE("eval.length_decay", eval.tree.length_decay),
      TS_DOUBLE("eval.radius_decay", eval.tree.radius_decay),
      TS_DOUBLE("eval.point_density", eval.tree.point_density),
  };
  return table;
}

#undef TS_PATH
#undef TS_DOUBLE
#undef TS_BOOL
#undef TS_INT
#undef TS_COUNT

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap map;
  std::string section = "general";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ParseError(where + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(where + "empty key");
    map[section + "." + key] = trim(line.substr(eq + 1));
  }
  return map;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  ConfigMap map = parse_config(in, path.string());
  const std::filesystem::path base = path.parent_path();
  for (auto& [key, value] : map) {
    const Field* f = find_field(key);
    if (f == nullptr || !f->is_path || value.empty()) continue;
    const std::filesystem::path p(value);
    if (p.is_relative()) value = (base / p).lexically_normal().string();
  }
  return map;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

std::string env_var_name(const std::string& key) {
  std::string out = "TREESKEL_";
  for (char c : key) {
    out.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

void apply_env_overrides(ConfigMap& map, const EnvLookup& lookup) {
  for (const auto& key : known_config_keys()) {
    if (const char* v = lookup(env_var_name(key).c_str())) map[key] = v;
  }
}

void apply_env_overrides(ConfigMap& map) {
  apply_env_overrides(map, [](const char* name) { return std::getenv(name); });
}

Stage parse_stage(const std::string& name) {
  const std::string s = lower(name);
  if (s == "restore") return Stage::kRestore;
  if (s == "scale") return Stage::kScale;
  if (s == "skeletonize" || s == "skeleton") return Stage::kSkeletonize;
  throw InputError("unknown stage '" + name + "' (expected restore, scale or skeletonize)");
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kRestore:
      return "restore";
    case Stage::kScale:
      return "scale";
    case Stage::kSkeletonize:
      return "skeletonize";
  }
  return "?";
}

void PipelineConfig::validate() const {
  restore.validate();
  contraction.validate();
  if (d_aruco < 0.0) throw InputError("scale.d_aruco must be positive");
  if (skeleton_voxel_size < 0.0) throw InputError("skeleton.voxel_size must be non-negative");
  if (eval.trees < 1) throw InputError("eval.trees must be at least 1");
  if (!(eval.noise_factor >= 0.0) || !(eval.hole_radius >= 0.0) || !(eval.voxel_size > 0.0) ||
      !(eval.skeleton_spacing > 0.0)) {
    throw InputError("eval noise, hole radius, voxel size and spacing must be in range");
  }
  eval.tree.validate();
}

PipelineConfig config_from_map(const ConfigMap& map) {
  PipelineConfig cfg;
  // The global seed goes first so section-specific seeds could follow it.
  if (auto it = map.find("general.seed"); it != map.end()) {
    find_field("general.seed")->set(cfg, it->first, it->second);
  }
  for (const auto& [key, value] : map) {
    const Field* f = find_field(key);
    if (f == nullptr) throw InputError("unknown config key '" + key + "'");
    f->set(cfg, key, value);
  }
  cfg.restore.seed = cfg.seed;
  cfg.eval.seed = cfg.seed;
  return cfg;
}

ConfigMap config_to_map(const PipelineConfig& config) {
  ConfigMap map;
  for (const auto& f : fields()) map[f.key] = f.get(config);
  return map;
}

void write_config(const ConfigMap& map, std::ostream& out) {
  std::string section;
  for (const auto& [key, value] : map) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
}

}  // namespace treeskel
