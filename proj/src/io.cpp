// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <Eigen/Geometry>

#include "treeskel/error.hpp"

namespace treeskel::io {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_for_write(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

/// Splits on whitespace and commas.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, long long& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::string at_line(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

// ---------------------------------------------------------------------------
// PLY

enum class ScalarType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

std::optional<ScalarType> scalar_type(const std::string& name) {
  static const std::map<std::string, ScalarType> kTypes = {
      {"char", ScalarType::kI8},     {"int8", ScalarType::kI8},     {"uchar", ScalarType::kU8},
      {"uint8", ScalarType::kU8},    {"short", ScalarType::kI16},   {"int16", ScalarType::kI16},
      {"ushort", ScalarType::kU16},  {"uint16", ScalarType::kU16},  {"int", ScalarType::kI32},
      {"int32", ScalarType::kI32},   {"uint", ScalarType::kU32},    {"uint32", ScalarType::kU32},
      {"float", ScalarType::kF32},   {"float32", ScalarType::kF32}, {"double", ScalarType::kF64},
      {"float64", ScalarType::kF64},
  };
  auto it = kTypes.find(name);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::kI8:
    case ScalarType::kU8:
      return 1;
    case ScalarType::kI16:
    case ScalarType::kU16:
      return 2;
    case ScalarType::kI32:
    case ScalarType::kU32:
    case ScalarType::kF32:
      return 4;
    case ScalarType::kF64:
      return 8;
  }
  return 0;
}

bool is_integral(ScalarType t) { return t != ScalarType::kF32 && t != ScalarType::kF64; }

template <typename T>
T load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double load_scalar(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::kI8:
      return load<std::int8_t>(p);
    case ScalarType::kU8:
      return load<std::uint8_t>(p);
    case ScalarType::kI16:
      return load<std::int16_t>(p);
    case ScalarType::kU16:
      return load<std::uint16_t>(p);
    case ScalarType::kI32:
      return load<std::int32_t>(p);
    case ScalarType::kU32:
      return load<std::uint32_t>(p);
    case ScalarType::kF32:
      return load<float>(p);
    case ScalarType::kF64:
      return load<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  ScalarType type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  std::size_t stride() const {
    std::size_t s = 0;
    for (const auto& p : properties) s += scalar_size(p.type);
    return s;
  }
};

struct PlyHeader {
  PlyFormat format = PlyFormat::kAscii;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;  // byte offset of the first body byte
  std::size_t body_line = 0;    // 1-based line number of the first body line
};

PlyHeader parse_ply_header(const std::string& data, const std::filesystem::path& path) {
  PlyHeader header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_format = false;
  bool done = false;
  while (!done) {
    if (pos >= data.size()) {
      throw ParseError(at_line(path, line_no) + "PLY header is missing end_header");
    }
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    ++line_no;
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (line_no == 1) {
      if (keyword != "ply")
        throw ParseError(at_line(path, 1) + "not a PLY file (missing 'ply' magic)");
      continue;
    }
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        header.format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        header.format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw ParseError(at_line(path, line_no) + "unsupported PLY format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      PlyElement el;
      long long count = -1;
      std::string count_str;
      ls >> el.name >> count_str;
      if (el.name.empty() || !parse_int(count_str, count) || count < 0) {
        throw ParseError(at_line(path, line_no) + "malformed element declaration");
      }
      el.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(el));
    } else if (keyword == "property") {
      if (header.elements.empty()) {
        throw ParseError(at_line(path, line_no) + "property declared before any element");
      }
      std::string type_name, name;
      ls >> type_name;
      if (type_name == "list") {
        throw ParseError(at_line(path, line_no) + "unsupported property type 'list'");
      }
      ls >> name;
      auto type = scalar_type(type_name);
      if (!type) {
        throw ParseError(at_line(path, line_no) + "unsupported property type '" + type_name + "'");
      }
      if (name.empty()) throw ParseError(at_line(path, line_no) + "property without a name");
      header.elements.back().properties.push_back({name, *type});
    } else if (keyword == "end_header") {
      done = true;
    } else {
      throw ParseError(at_line(path, line_no) + "unknown PLY header keyword '" + keyword + "'");
    }
  }
  if (!have_format) throw ParseError(at_line(path, line_no) + "PLY header has no format line");
  header.body_offset = pos;
  header.body_line = line_no + 1;
  return header;
}

struct VertexLayout {
  int x = -1, y = -1, z = -1, r = -1, g = -1, b = -1, label = -1;
};

VertexLayout vertex_layout(const PlyElement& el, const std::filesystem::path& path) {
  VertexLayout lay;
  for (int i = 0; i < static_cast<int>(el.properties.size()); ++i) {
    const auto& n = el.properties[i].name;
    if (n == "x")
      lay.x = i;
    else if (n == "y")
      lay.y = i;
    else if (n == "z")
      lay.z = i;
    else if (n == "red" || n == "r")
      lay.r = i;
    else if (n == "green" || n == "g")
      lay.g = i;
    else if (n == "blue" || n == "b")
      lay.b = i;
    else if (n == "label")
      lay.label = i;
  }
  if (lay.x < 0 || lay.y < 0 || lay.z < 0) {
    throw ParseError(path.string() + ": vertex element lacks x, y, z properties");
  }
  if (lay.label >= 0 && !is_integral(el.properties[lay.label].type)) {
    throw ParseError(path.string() + ": label property must be an integer type");
  }
  return lay;
}

double color_value(ScalarType type, double raw) {
  if (type == ScalarType::kU8) return raw / 255.0;
  if (type == ScalarType::kU16) return raw / 65535.0;
  return std::clamp(raw, 0.0, 1.0);
}

void append_vertex(LabeledPointCloud& cloud, const PlyElement& el, const VertexLayout& lay,
                   const std::vector<double>& v, const std::string& where) {
  Vec3 p(v[lay.x], v[lay.y], v[lay.z]);
  if (!p.allFinite()) throw ParseError(where + "non-finite vertex coordinate");
  Vec3 rgb = Vec3::Zero();
  if (lay.r >= 0) rgb.x() = color_value(el.properties[lay.r].type, v[lay.r]);
  if (lay.g >= 0) rgb.y() = color_value(el.properties[lay.g].type, v[lay.g]);
  if (lay.b >= 0) rgb.z() = color_value(el.properties[lay.b].type, v[lay.b]);
  if ((rgb.array() < 0.0).any() || (rgb.array() > 1.0).any()) {
    throw ParseError(where + "color component outside the property range");
  }
  SemanticLabel label = SemanticLabel::kUnlabeled;
  if (lay.label >= 0) label = label_from_code(static_cast<int>(v[lay.label]));
  cloud.push_back(p, rgb, label);
}

LabeledPointCloud read_ply_ascii(const std::string& data, const PlyHeader& header,
                                 const std::filesystem::path& path) {
  LabeledPointCloud cloud;
  std::size_t pos = header.body_offset;
  std::size_t line_no = header.body_line - 1;
  auto next_line = [&](std::string& line) {
    // Blank lines carry no records.
    while (pos < data.size()) {
      std::size_t end = data.find('\n', pos);
      if (end == std::string::npos) end = data.size();
      line = data.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  std::string line;
  for (const auto& el : header.elements) {
    const bool is_vertex = el.name == "vertex";
    VertexLayout lay;
    if (is_vertex) {
      lay = vertex_layout(el, path);
      cloud.reserve(el.count);
    }
    std::vector<double> values(el.properties.size());
    for (std::size_t i = 0; i < el.count; ++i) {
      if (!next_line(line)) {
        throw ParseError(at_line(path, line_no) + "element '" + el.name + "' declares " +
                         std::to_string(el.count) + " records but the file ends after " +
                         std::to_string(i));
      }
      if (!is_vertex) continue;
      const auto tokens = tokenize(line);
      if (tokens.size() != el.properties.size()) {
        throw ParseError(at_line(path, line_no) + "expected " +
                         std::to_string(el.properties.size()) + " values, found " +
                         std::to_string(tokens.size()));
      }
      for (std::size_t k = 0; k < tokens.size(); ++k) {
        if (!parse_double(tokens[k], values[k])) {
          throw ParseError(at_line(path, line_no) + "non-numeric value '" + tokens[k] + "'");
        }
      }
      append_vertex(cloud, el, lay, values, at_line(path, line_no));
    }
    if (is_vertex) return cloud;
  }
  throw ParseError(path.string() + ": PLY file has no vertex element");
}

LabeledPointCloud read_ply_binary(const std::string& data, const PlyHeader& header,
                                  const std::filesystem::path& path) {
  LabeledPointCloud cloud;
  std::size_t offset = header.body_offset;
  for (const auto& el : header.elements) {
    const std::size_t stride = el.stride();
    const std::size_t need = stride * el.count;
    if (data.size() < offset || data.size() - offset < need) {
      const std::size_t have =
          data.size() > offset ? (data.size() - offset) / std::max<std::size_t>(stride, 1) : 0;
      throw ParseError(path.string() + ": byte " + std::to_string(data.size()) + ": element '" +
                       el.name + "' declares " + std::to_string(el.count) +
                       " records but the file holds " + std::to_string(have));
    }
    if (el.name != "vertex") {
      offset += need;
      continue;
    }
    const VertexLayout lay = vertex_layout(el, path);
    cloud.reserve(el.count);
    std::vector<double> values(el.properties.size());
    for (std::size_t i = 0; i < el.count; ++i) {
      const std::size_t rec = offset + i * stride;
      std::size_t o = rec;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        values[k] = load_scalar(el.properties[k].type, data.data() + o);
        o += scalar_size(el.properties[k].type);
      }
      append_vertex(cloud, el, lay, values, path.string() + ": byte " + std::to_string(rec) + ": ");
    }
    return cloud;
  }
  throw ParseError(path.string() + ": PLY file has no vertex element");
}

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

}  // namespace

LabeledPointCloud read_ply(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const PlyHeader header = parse_ply_header(data, path);
  if (header.format == PlyFormat::kAscii) return read_ply_ascii(data, header, path);
  return read_ply_binary(data, header, path);
}

void write_ply(const LabeledPointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format) {
  cloud.validate();
  std::ostringstream out;
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property uchar label\nend_header\n";
  if (format == PlyFormat::kAscii) {
    out << std::setprecision(std::numeric_limits<float>::max_digits10);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      const Vec3& c = cloud.colors[i];
      out << static_cast<float>(p.x()) << ' ' << static_cast<float>(p.y()) << ' '
          << static_cast<float>(p.z()) << ' ' << int{to_byte(c.x())} << ' ' << int{to_byte(c.y())}
          << ' ' << int{to_byte(c.z())} << ' ' << int{label_code(cloud.labels[i])} << '\n';
    }
  } else {
    std::string rec(16, '\0');
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const float xyz[3] = {static_cast<float>(cloud.positions[i].x()),
                            static_cast<float>(cloud.positions[i].y()),
                            static_cast<float>(cloud.positions[i].z())};
      std::memcpy(rec.data(), xyz, sizeof(xyz));
      rec[12] = static_cast<char>(to_byte(cloud.colors[i].x()));
      rec[13] = static_cast<char>(to_byte(cloud.colors[i].y()));
      rec[14] = static_cast<char>(to_byte(cloud.colors[i].z()));
      rec[15] = static_cast<char>(label_code(cloud.labels[i]));
      out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    }
  }
  auto file = open_for_write(path, true);
  const std::string bytes = out.str();
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw InputError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// COLMAP text model

CameraModel read_colmap_model(const std::filesystem::path& dir) {
  const auto cameras_path = dir / "cameras.txt";
  const auto images_path = dir / "images.txt";
  CameraModel model;
  std::map<long long, Intrinsics> cameras;

  const auto cam_lines = split_lines(read_file(cameras_path));
  for (std::size_t i = 0; i < cam_lines.size(); ++i) {
    const auto tokens = tokenize(strip_comment(cam_lines[i]));
    if (tokens.empty()) continue;
    const std::string where = at_line(cameras_path, i + 1);
    if (tokens.size() < 4) throw ParseError(where + "camera record needs at least 4 fields");
    long long id = 0, w = 0, h = 0;
    if (!parse_int(tokens[0], id) || !parse_int(tokens[2], w) || !parse_int(tokens[3], h)) {
      throw ParseError(where + "non-numeric camera id or size");
    }
    std::vector<double> params;
    for (std::size_t k = 4; k < tokens.size(); ++k) {
      double v = 0.0;
      if (!parse_double(tokens[k], v)) throw ParseError(where + "non-numeric camera parameter");
      params.push_back(v);
    }
    Intrinsics k;
    const std::string& name = tokens[1];
    if (name == "PINHOLE") {
      if (params.size() != 4) throw ParseError(where + "PINHOLE expects 4 parameters");
      k = {params[0], params[1], params[2], params[3]};
    } else if (name == "SIMPLE_PINHOLE") {
      if (params.size() != 3) throw ParseError(where + "SIMPLE_PINHOLE expects 3 parameters");
      k = {params[0], params[0], params[1], params[2]};
    } else {
      throw InputError(where + "unsupported camera model '" + name + "'");
    }
    if (!cameras.empty() && !(cameras.begin()->second == k)) {
      throw InputError(where + "images with differing intrinsics are not supported");
    }
    cameras[id] = k;
    model.intrinsics = k;
    model.width = static_cast<int>(w);
    model.height = static_cast<int>(h);
  }
  if (cameras.empty()) throw InputError(cameras_path.string() + ": no cameras");

  // Each image occupies two lines; the second (2D points) may be empty, so
  // only comment lines are dropped before pairing.
  const auto raw = split_lines(read_file(images_path));
  std::vector<std::pair<std::size_t, std::string>> lines;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!raw[i].empty() && raw[i][0] == '#') continue;
    lines.emplace_back(i + 1, raw[i]);
  }
  for (std::size_t i = 0; i < lines.size(); i += 2) {
    const auto tokens = tokenize(lines[i].second);
    const std::string where = at_line(images_path, lines[i].first);
    if (tokens.empty()) {
      // Trailing blank line.
      if (i + 1 >= lines.size()) break;
      throw ParseError(where + "expected an image record");
    }
    if (tokens.size() < 9) throw ParseError(where + "image record needs at least 9 fields");
    long long id = 0, cam = 0;
    double v[7];
    if (!parse_int(tokens[0], id) || !parse_int(tokens[8], cam)) {
      throw ParseError(where + "non-numeric image or camera id");
    }
    for (int k = 0; k < 7; ++k) {
      if (!parse_double(tokens[1 + k], v[k])) throw ParseError(where + "non-numeric pose value");
    }
    if (!cameras.contains(cam)) throw InputError(where + "unknown camera id " + tokens[8]);
    const double qnorm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (std::abs(qnorm - 1.0) > 1e-6) {
      throw InputError(where + "quaternion norm deviates from 1 by more than 1e-6");
    }
    const Eigen::Quaterniond q(v[0] / qnorm, v[1] / qnorm, v[2] / qnorm, v[3] / qnorm);
    const Mat3 world_to_cam = q.toRotationMatrix();
    const Vec3 t(v[4], v[5], v[6]);
    CameraPose pose;
    pose.image_id = static_cast<int>(id);
    pose.name = tokens.size() > 9 ? tokens[9] : std::string{};
    pose.rotation = world_to_cam.transpose();
    pose.origin = -(world_to_cam.transpose() * t);
    model.poses.push_back(std::move(pose));
  }
  model.validate();
  return model;
}

void write_colmap_model(const CameraModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_for_write(dir / "cameras.txt", false);
    out << std::setprecision(17);
    out << "# Camera list with one line of data per camera:\n"
        << "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
        << "1 PINHOLE " << model.width << ' ' << model.height << ' ' << model.intrinsics.fx << ' '
        << model.intrinsics.fy << ' ' << model.intrinsics.cx << ' ' << model.intrinsics.cy << '\n';
  }
  auto out = open_for_write(dir / "images.txt", false);
  out << std::setprecision(17);
  out << "# Image list with two lines of data per image:\n"
      << "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
      << "#   POINTS2D[] as (X, Y, POINT3D_ID)\n";
  for (const auto& pose : model.poses) {
    const Mat3 world_to_cam = pose.rotation.transpose();
    Eigen::Quaterniond q(world_to_cam);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    const Vec3 t = -(world_to_cam * pose.origin);
    out << pose.image_id << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' '
        << t.x() << ' ' << t.y() << ' ' << t.z() << " 1 "
        << (pose.name.empty() ? "image" + std::to_string(pose.image_id) : pose.name) << "\n\n";
  }
}

// ---------------------------------------------------------------------------
// Marker detections, sky samples, label overrides

std::vector<MarkerObservation> read_marker_detections(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<MarkerObservation> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = tokenize(strip_comment(lines[i]));
    if (tokens.empty()) continue;
    const std::string where = at_line(path, i + 1);
    if (tokens.size() != 9) {
      throw ParseError(where + "expected image id and 8 corner coordinates, found " +
                       std::to_string(tokens.size()) + " fields");
    }
    MarkerObservation obs;
    long long id = 0;
    if (!parse_int(tokens[0], id))
      throw ParseError(where + "non-numeric image id '" + tokens[0] + "'");
    obs.image_id = static_cast<int>(id);
    for (int k = 0; k < 4; ++k) {
      double u = 0.0, v = 0.0;
      if (!parse_double(tokens[1 + 2 * k], u) || !parse_double(tokens[2 + 2 * k], v)) {
        throw ParseError(where + "non-numeric corner coordinate");
      }
      obs.corners[k] = Vec2(u, v);
    }
    try {
      obs.validate();
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
    out.push_back(obs);
  }
  return out;
}

void write_marker_detections(const std::vector<MarkerObservation>& obs,
                             const std::filesystem::path& path) {
  auto out = open_for_write(path, false);
  out << std::setprecision(17) << "# image_id u1 v1 u2 v2 u3 v3 u4 v4\n";
  for (const auto& o : obs) {
    out << o.image_id;
    for (const auto& c : o.corners) out << ' ' << c.x() << ' ' << c.y();
    out << '\n';
  }
}

std::vector<Vec3> read_sky_samples(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = tokenize(strip_comment(lines[i]));
    if (tokens.empty()) continue;
    const std::string where = at_line(path, i + 1);
    if (tokens.size() != 3) throw ParseError(where + "expected an `r g b` triple");
    Vec3 c;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tokens[k], c[k])) throw ParseError(where + "non-numeric color value");
    }
    if ((c.array() < 0.0).any() || (c.array() > 1.0).any()) {
      throw ParseError(where + "color component outside [0,1]");
    }
    out.push_back(c);
  }
  return out;
}

void write_sky_samples(const std::vector<Vec3>& samples, const std::filesystem::path& path) {
  auto out = open_for_write(path, false);
  out << std::setprecision(17);
  for (const auto& c : samples) out << c.x() << ' ' << c.y() << ' ' << c.z() << '\n';
}

std::vector<SemanticLabel> read_label_file(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<SemanticLabel> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = tokenize(strip_comment(lines[i]));
    if (tokens.empty()) continue;
    long long code = 0;
    if (tokens.size() != 1 || !parse_int(tokens[0], code)) {
      throw ParseError(at_line(path, i + 1) + "expected one integer label code");
    }
    out.push_back(label_from_code(static_cast<int>(code)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graphs

void write_graph(const SkeletonGraph& graph, const std::filesystem::path& path,
                 GraphFormat format) {
  auto out = open_for_write(path, false);
  out << std::setprecision(17);
  for (const auto& p : graph.nodes) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  const char tag = format == GraphFormat::kObj ? 'l' : 'e';
  const std::size_t base = format == GraphFormat::kObj ? 1 : 0;
  for (const auto& [a, b] : graph.edges) out << tag << ' ' << a + base << ' ' << b + base << '\n';
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

SkeletonGraph read_graph(const std::filesystem::path& path, GraphFormat format) {
  const auto lines = split_lines(read_file(path));
  const std::string edge_tag = format == GraphFormat::kObj ? "l" : "e";
  const long long base = format == GraphFormat::kObj ? 1 : 0;
  SkeletonGraph g;
  std::vector<std::pair<long long, long long>> raw_edges;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tokens = tokenize(strip_comment(lines[i]));
    if (tokens.empty()) continue;
    const std::string where = at_line(path, i + 1);
    if (tokens[0] == "v") {
      Vec3 p;
      if (tokens.size() < 4) throw ParseError(where + "vertex needs 3 coordinates");
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(tokens[1 + k], p[k])) throw ParseError(where + "non-numeric coordinate");
      }
      g.nodes.push_back(p);
    } else if (tokens[0] == edge_tag) {
      long long a = 0, b = 0;
      if (tokens.size() != 3 || !parse_int(tokens[1], a) || !parse_int(tokens[2], b)) {
        throw ParseError(where + "edge needs two integer indices");
      }
      raw_edges.emplace_back(a - base, b - base);
    } else if (format == GraphFormat::kObj) {
      continue;  // other OBJ records carry nothing we use
    } else {
      throw ParseError(where + "unknown record '" + tokens[0] + "'");
    }
  }
  for (const auto& [a, b] : raw_edges) {
    const auto n = static_cast<long long>(g.nodes.size());
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ParseError(path.string() + ": edge index out of range");
    }
    g.edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return g;
}

}  // namespace treeskel::io
