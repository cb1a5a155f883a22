#include "gsr/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) throw Error("cannot serialize a non-finite value");
  std::string s = fmt::format("{:.{}f}", v, digits);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

double quantize(double v, int digits) { return std::strtod(fixed(v, digits).c_str(), nullptr); }

std::string quoted(const std::string& s) { return Json(s).dump(); }

std::string pad(int n) { return std::string(static_cast<std::size_t>(n), ' '); }

// ----------------------------------------------------------------- parsing

std::string child(const std::string& path, const std::string& key) {
  std::string esc;
  for (char c : key) {
    if (c == '~') esc += "~0";
    else if (c == '/') esc += "~1";
    else esc += c;
  }
  return path + "/" + esc;
}

std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaViolation(path, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 2e9) return static_cast<int>(v);
  }
  throw SchemaViolation(path, "expected an integer");
}

std::optional<int> parse_int_key(const std::string& key) {
  if (key.empty() || key.size() > 9) return std::nullopt;
  if (!std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  return std::stoi(key);
}

std::optional<int> jersey(const Json& j, const std::string& path) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "null" || s.empty()) return std::nullopt;
    if (auto v = parse_int_key(s)) return v;
    throw SchemaViolation(path, "jersey number is not numeric");
  }
  const int v = integer(j, path);
  if (v < 0) throw SchemaViolation(path, "negative jersey number");
  return v;
}

AthleteRecord parse_athlete(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaViolation(path, "expected an object");
  AthleteRecord a;
  bool has_bbox = false, has_role = false;
  for (const auto& [key, v] : j.items()) {
    const std::string p = child(path, key);
    if (key == "bbox_ltwh") {
      if (!v.is_array() || v.size() != 4) throw SchemaViolation(p, "expected 4 numbers");
      a.bbox = {number(v[0], child(p, 0)), number(v[1], child(p, 1)), number(v[2], child(p, 2)),
                number(v[3], child(p, 3))};
      has_bbox = true;
    } else if (key == "track_id") {
      if (!v.is_null()) a.trackId = integer(v, p);
    } else if (key == "jersey_number") {
      a.jerseyNumber = jersey(v, p);
    } else if (key == "legibility_score") {
      if (!v.is_null()) a.legibilityScore = number(v, p);
    } else if (key == "role") {
      if (!v.is_string()) throw SchemaViolation(p, "expected a string");
      a.role = v.get<std::string>();
      has_role = true;
    } else if (key == "team") {
      if (v.is_null()) continue;
      if (!v.is_string()) throw SchemaViolation(p, "expected a string or null");
      a.team = parse_team(v.get<std::string>());
      if (!a.team) throw SchemaViolation(p, "team must be left or right");
    } else if (key == "confidence") {
      if (!v.is_null()) a.confidence = number(v, p);
    } else {
      a.extras[key] = v;
    }
  }
  if (!has_bbox) throw SchemaViolation(child(path, "bbox_ltwh"), "missing");
  if (!has_role) throw SchemaViolation(child(path, "role"), "missing");
  return a;
}

std::map<int, KeypointAnnotation> parse_keypoints(const Json& j, const std::string& path) {
  std::map<int, KeypointAnnotation> out;
  if (j.is_array() && j.empty()) return out;
  if (!j.is_object()) throw SchemaViolation(path, "expected an object keyed by keypoint id");
  for (const auto& [key, v] : j.items()) {
    const std::string p = child(path, key);
    auto id = parse_int_key(key);
    if (!id) throw SchemaViolation(p, "keypoint id must be a non-negative integer");
    if (!v.is_object()) throw SchemaViolation(p, "expected an object");
    KeypointAnnotation k;
    if (!v.contains("x") || !v.contains("y")) throw SchemaViolation(p, "missing x or y");
    k.x = number(v["x"], child(p, "x"));
    k.y = number(v["y"], child(p, "y"));
    if (v.contains("p")) k.p = number(v["p"], child(p, "p"));
    out[*id] = k;
  }
  return out;
}

std::map<std::string, std::vector<Vec2>> parse_lines(const Json& j, const std::string& path) {
  std::map<std::string, std::vector<Vec2>> out;
  if (j.is_array() && j.empty()) return out;
  if (!j.is_object()) throw SchemaViolation(path, "expected an object keyed by line name");
  for (const auto& [key, v] : j.items()) {
    const std::string p = child(path, key);
    if (!v.is_array()) throw SchemaViolation(p, "expected an array of points");
    auto& pts = out[key];
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string pi = child(p, i);
      const Json& q = v[i];
      if (q.is_object()) {
        if (!q.contains("x") || !q.contains("y")) throw SchemaViolation(pi, "missing x or y");
        pts.emplace_back(number(q["x"], child(pi, "x")), number(q["y"], child(pi, "y")));
      } else if (q.is_array() && q.size() == 2) {
        pts.emplace_back(number(q[0], child(pi, 0)), number(q[1], child(pi, 1)));
      } else {
        throw SchemaViolation(pi, "expected {x, y}");
      }
    }
  }
  return out;
}

template <int R, int C>
Eigen::Matrix<double, R, C> parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != R) throw SchemaViolation(path, fmt::format("expected {} rows", R));
  Eigen::Matrix<double, R, C> m;
  for (int r = 0; r < R; ++r) {
    const std::string pr = child(path, r);
    if (!j[r].is_array() || j[r].size() != C)
      throw SchemaViolation(pr, fmt::format("expected {} columns", C));
    for (int c = 0; c < C; ++c) m(r, c) = number(j[r][c], child(pr, c));
  }
  return m;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaViolation("", std::string("malformed JSON: ") + e.what());
  }
}

// ----------------------------------------------------------------- writing

std::string bbox_text(const BBox& b) {
  return fmt::format("[{}, {}, {}, {}]", fixed(b.left, decimals::bbox), fixed(b.top, decimals::bbox),
                     fixed(b.width, decimals::bbox), fixed(b.height, decimals::bbox));
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : "null"; }

std::string jersey_text(const std::optional<int>& v) {
  return v ? quoted(std::to_string(*v)) : "null";
}

void append_extras(std::string& out, const Json& extras) {
  for (const auto& [key, v] : extras.items()) out += fmt::format(", {}: {}", quoted(key), v.dump());
}

std::string athlete_text(const AthleteRecord& a) {
  std::string out = fmt::format("{{\"bbox_ltwh\": {}, \"track_id\": {}, \"jersey_number\": {}",
                                bbox_text(a.bbox), opt_int(a.trackId), jersey_text(a.jerseyNumber));
  out += ", \"legibility_score\": ";
  out += a.legibilityScore ? fixed(*a.legibilityScore, decimals::legibility) : "null";
  out += fmt::format(", \"role\": {}, \"team\": {}", quoted(a.role),
                     a.team ? quoted(std::string(to_string(*a.team))) : "null");
  if (a.confidence) out += ", \"confidence\": " + fixed(*a.confidence, decimals::confidence);
  append_extras(out, a.extras);
  return out + "}";
}

std::string pretrain_athlete_text(const PretrainAthlete& a) {
  return fmt::format("{{\"bbox_ltwh\": {}, \"track_id\": {}, \"jersey_number\": {}, \"role\": {}}}",
                     bbox_text(a.bbox), opt_int(a.trackId), jersey_text(a.jerseyNumber),
                     quoted(a.role));
}

template <typename Items>
std::string block(const Items& items, char open, char close, int indent) {
  if (items.empty()) return std::string{open, close};
  std::string out(1, open);
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += "\n" + pad(indent + 2) + items[i];
    if (i + 1 < items.size()) out += ",";
  }
  return out + "\n" + pad(indent) + close;
}

std::string keypoints_text(const std::map<int, KeypointAnnotation>& kps, int indent) {
  std::vector<std::string> items;
  for (const auto& [id, k] : kps)
    items.push_back(fmt::format("\"{}\": {{\"x\": {}, \"y\": {}, \"p\": {}}}", id,
                                fixed(k.x, decimals::keypoint), fixed(k.y, decimals::keypoint),
                                fixed(k.p, decimals::confidence)));
  return block(items, '{', '}', indent);
}

std::string lines_text(const std::map<std::string, std::vector<Vec2>>& lines, int indent) {
  std::vector<std::string> items;
  for (const auto& [name, pts] : lines) {
    std::string s = quoted(name) + ": [";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += ", ";
      s += fmt::format("{{\"x\": {}, \"y\": {}}}", fixed(pts[i].x(), decimals::line),
                       fixed(pts[i].y(), decimals::line));
    }
    items.push_back(s + "]");
  }
  return block(items, '{', '}', indent);
}

template <typename M>
std::string matrix_text(const M& m, int digits) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += r ? ", [" : "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + fixed(m(r, c), digits);
    out += "]";
  }
  return out + "]";
}

std::string object_text(const std::vector<std::pair<std::string, std::string>>& fields, int indent) {
  std::vector<std::string> items;
  for (const auto& [k, v] : fields) items.push_back(quoted(k) + ": " + v);
  return block(items, '{', '}', indent);
}

void append_extensions(std::vector<std::pair<std::string, std::string>>& fields, const Json& ext) {
  for (const auto& [key, v] : ext.items()) fields.emplace_back(key, v.dump());
}

bool vec_equal(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool keypoints_equal(const std::map<int, KeypointAnnotation>& a,
                     const std::map<int, KeypointAnnotation>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const auto& l, const auto& r) {
    return l.first == r.first && l.second.x == r.second.x && l.second.y == r.second.y &&
           l.second.p == r.second.p;
  });
}

bool lines_equal(const std::map<std::string, std::vector<Vec2>>& a,
                 const std::map<std::string, std::vector<Vec2>>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const auto& l, const auto& r) {
    return l.first == r.first && vec_equal(l.second, r.second);
  });
}

}  // namespace

// ------------------------------------------------------------------- frames

FrameAnnotation frame_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaViolation(path, "expected an object");
  FrameAnnotation a;
  std::optional<Mat3> K;
  std::optional<Mat34> Rt;
  for (const auto& [key, v] : j.items()) {
    const std::string p = child(path, key);
    if (key == "athletes") {
      if (!v.is_array()) throw SchemaViolation(p, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) a.athletes.push_back(parse_athlete(v[i], child(p, i)));
    } else if (key == "keypoints") {
      a.keypoints = parse_keypoints(v, p);
    } else if (key == "lines") {
      a.lines = parse_lines(v, p);
    } else if (key == "K") {
      if (!v.is_null()) K = parse_matrix<3, 3>(v, p);
    } else if (key == "Rt") {
      if (!v.is_null()) Rt = parse_matrix<3, 4>(v, p);
    } else if (key == "valid_cam_params") {
      if (!v.is_boolean()) throw SchemaViolation(p, "expected a boolean");
      a.validCamParams = v.get<bool>();
    } else {
      a.extensions[key] = v;
    }
  }
  if (K.has_value() != Rt.has_value())
    throw SchemaViolation(child(path, K ? "Rt" : "K"), "K and Rt must appear together");
  if (K) a.camera = CameraParams::from_K_Rt(*K, *Rt);
  return a;
}

FrameAnnotation parse_frame(std::string_view jsonText) { return frame_from_json(parse_json(jsonText)); }

std::string write_frame(const FrameAnnotation& a, int indent) {
  std::vector<std::string> athletes;
  for (const auto& r : a.athletes) athletes.push_back(athlete_text(r));
  std::vector<std::pair<std::string, std::string>> fields{
      {"athletes", block(athletes, '[', ']', indent + 2)},
      {"keypoints", keypoints_text(a.keypoints, indent + 2)},
      {"lines", lines_text(a.lines, indent + 2)},
  };
  if (a.camera) {
    fields.emplace_back("K", matrix_text(a.camera->K(), decimals::K));
    fields.emplace_back("Rt", matrix_text(a.camera->Rt(), decimals::Rt));
  }
  fields.emplace_back("valid_cam_params", a.validCamParams ? "true" : "false");
  append_extensions(fields, a.extensions);
  return object_text(fields, indent);
}

PretrainFrameAnnotation to_pretrain_subset(const FrameAnnotation& a, double legibilityThreshold) {
  PretrainFrameAnnotation out;
  for (const auto& r : a.athletes) {
    PretrainAthlete p{r.bbox, r.trackId, r.jerseyNumber, r.role};
    if (r.legibilityScore && *r.legibilityScore < legibilityThreshold) p.jerseyNumber.reset();
    out.athletes.push_back(p);
  }
  out.keypoints = a.keypoints;
  out.lines = a.lines;
  return out;
}

std::string write_pretrain_frame(const PretrainFrameAnnotation& a, int indent) {
  std::vector<std::string> athletes;
  for (const auto& r : a.athletes) athletes.push_back(pretrain_athlete_text(r));
  return object_text({{"athletes", block(athletes, '[', ']', indent + 2)},
                      {"keypoints", keypoints_text(a.keypoints, indent + 2)},
                      {"lines", lines_text(a.lines, indent + 2)}},
                     indent);
}

FrameAnnotation canonicalize(const FrameAnnotation& a) {
  FrameAnnotation c = a;
  for (auto& r : c.athletes) {
    r.bbox = {quantize(r.bbox.left, decimals::bbox), quantize(r.bbox.top, decimals::bbox),
              quantize(r.bbox.width, decimals::bbox), quantize(r.bbox.height, decimals::bbox)};
    if (r.legibilityScore) r.legibilityScore = quantize(*r.legibilityScore, decimals::legibility);
    if (r.confidence) r.confidence = quantize(*r.confidence, decimals::confidence);
  }
  for (auto& [id, k] : c.keypoints) {
    k.x = quantize(k.x, decimals::keypoint);
    k.y = quantize(k.y, decimals::keypoint);
    k.p = quantize(k.p, decimals::confidence);
  }
  for (auto& [name, pts] : c.lines)
    for (auto& q : pts) q = Vec2(quantize(q.x(), decimals::line), quantize(q.y(), decimals::line));
  if (c.camera) {
    Mat3 K = c.camera->K();
    Mat34 Rt = c.camera->Rt();
    for (int i = 0; i < 9; ++i) K.data()[i] = quantize(K.data()[i], decimals::K);
    for (int i = 0; i < 12; ++i) Rt.data()[i] = quantize(Rt.data()[i], decimals::Rt);
    c.camera = CameraParams::from_K_Rt(K, Rt);
  }
  return c;
}

bool structurally_equal(const FrameAnnotation& a, const FrameAnnotation& b) {
  if (a.athletes.size() != b.athletes.size()) return false;
  for (std::size_t i = 0; i < a.athletes.size(); ++i) {
    const auto& x = a.athletes[i];
    const auto& y = b.athletes[i];
    if (!(x.bbox == y.bbox && x.trackId == y.trackId && x.jerseyNumber == y.jerseyNumber &&
          x.legibilityScore == y.legibilityScore && x.role == y.role && x.team == y.team &&
          x.confidence == y.confidence && x.extras == y.extras))
      return false;
  }
  if (!keypoints_equal(a.keypoints, b.keypoints) || !lines_equal(a.lines, b.lines)) return false;
  if (a.camera.has_value() != b.camera.has_value()) return false;
  if (a.camera && (a.camera->K() != b.camera->K() || a.camera->Rt() != b.camera->Rt())) return false;
  return a.validCamParams == b.validCamParams && a.extensions == b.extensions;
}

bool structurally_equal(const PretrainFrameAnnotation& a, const PretrainFrameAnnotation& b) {
  if (a.athletes.size() != b.athletes.size()) return false;
  for (std::size_t i = 0; i < a.athletes.size(); ++i) {
    const auto& x = a.athletes[i];
    const auto& y = b.athletes[i];
    if (!(x.bbox == y.bbox && x.trackId == y.trackId && x.jerseyNumber == y.jerseyNumber &&
          x.role == y.role))
      return false;
  }
  return keypoints_equal(a.keypoints, b.keypoints) && lines_equal(a.lines, b.lines);
}

std::vector<ValidationIssue> validate_frame(const FrameAnnotation& a, ImageSize size) {
  std::vector<ValidationIssue> issues;
  for (std::size_t i = 0; i < a.athletes.size(); ++i) {
    const auto& b = a.athletes[i].bbox;
    if (!(b.width > 0.0 && b.height > 0.0))
      issues.push_back({fmt::format("/athletes/{}/bbox_ltwh", i), "non-positive box size"});
    const auto& l = a.athletes[i].legibilityScore;
    if (l && !(*l >= 0.0 && *l <= 1.0))
      issues.push_back({fmt::format("/athletes/{}/legibility_score", i), "outside [0, 1]"});
  }
  for (const auto& [id, k] : a.keypoints) {
    if (!(k.x >= 0.0 && k.x <= size.width && k.y >= 0.0 && k.y <= size.height))
      issues.push_back({fmt::format("/keypoints/{}", id), "outside the image (pixel coordinates expected)"});
    if (!(k.p >= 0.0 && k.p <= 1.0)) issues.push_back({fmt::format("/keypoints/{}/p", id), "outside [0, 1]"});
  }
  for (const auto& [name, pts] : a.lines)
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!(pts[i].x() >= 0.0 && pts[i].x() <= 1.0 && pts[i].y() >= 0.0 && pts[i].y() <= 1.0))
        issues.push_back({child("/lines", name) + "/" + std::to_string(i),
                          "outside [0, 1] (normalized coordinates expected)"});
  return issues;
}

// -------------------------------------------------------------------- clips

ClipAnnotation parse_clip(std::string_view jsonText) {
  const Json j = parse_json(jsonText);
  if (!j.is_object()) throw SchemaViolation("", "expected an object");
  ClipAnnotation clip;
  bool has_w = false, has_h = false;
  for (const auto& [key, v] : j.items()) {
    const std::string p = child("", key);
    if (key == "image_width") {
      clip.size.width = integer(v, p);
      has_w = true;
    } else if (key == "image_height") {
      clip.size.height = integer(v, p);
      has_h = true;
    } else if (key == "frames") {
      if (!v.is_object()) throw SchemaViolation(p, "expected an object keyed by frame index");
      for (const auto& [fk, fv] : v.items()) {
        auto idx = parse_int_key(fk);
        if (!idx) throw SchemaViolation(child(p, fk), "frame index must be a non-negative integer");
        clip.frames[*idx] = frame_from_json(fv, child(p, fk));
      }
    } else {
      clip.extensions[key] = v;
    }
  }
  if (!has_w || !has_h) throw SchemaViolation(has_w ? "/image_height" : "/image_width", "missing");
  if (clip.size.width <= 0 || clip.size.height <= 0) throw SchemaViolation("/image_width", "image size must be positive");
  return clip;
}

namespace {

template <typename F>
std::string clip_text(const ClipAnnotation& clip, F frame_text) {
  std::vector<std::string> frames;
  for (const auto& [idx, f] : clip.frames) frames.push_back(fmt::format("\"{}\": {}", idx, frame_text(f)));
  std::vector<std::pair<std::string, std::string>> fields{
      {"image_width", std::to_string(clip.size.width)},
      {"image_height", std::to_string(clip.size.height)},
      {"frames", block(frames, '{', '}', 2)},
  };
  append_extensions(fields, clip.extensions);
  return object_text(fields, 0) + "\n";
}

}  // namespace

std::string write_clip(const ClipAnnotation& clip) {
  return clip_text(clip, [](const FrameAnnotation& f) { return write_frame(f, 4); });
}

std::string write_pretrain_clip(const ClipAnnotation& clip, double legibilityThreshold) {
  ClipAnnotation bare = clip;
  bare.extensions = Json::object();
  return clip_text(bare, [&](const FrameAnnotation& f) {
    return write_pretrain_frame(to_pretrain_subset(f, legibilityThreshold), 4);
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

ClipAnnotation read_clip_file(const std::filesystem::path& path) {
  try {
    return parse_clip(read_text_file(path));
  } catch (const SchemaViolation& e) {
    throw SchemaViolation(e.path(), path.string() + ": " + e.what());
  }
}

// --------------------------------------------------------------- embeddings

namespace {

constexpr char kMagic[4] = {'G', 'S', 'R', 'E'};
constexpr std::uint32_t kSidecarVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  if constexpr (std::endian::native == std::endian::big)
    bits = (bits >> 24) | ((bits >> 8) & 0xff00u) | ((bits << 8) & 0xff0000u) | (bits << 24);
  char buf[4];
  std::memcpy(buf, &bits, 4);
  out.append(buf, 4);
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw Error("truncated embedding sidecar");
  std::uint32_t bits;
  std::memcpy(&bits, bytes.data() + pos, 4);
  pos += 4;
  if constexpr (std::endian::native == std::endian::big)
    bits = (bits >> 24) | ((bits >> 8) & 0xff00u) | ((bits << 8) & 0xff0000u) | (bits << 24);
  T v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

std::string encode_embeddings(const EmbeddingSidecar& s) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kSidecarVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.frames.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dims));
  for (const auto& frame : s.frames) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(frame.size()));
    for (const auto& e : frame) {
      if (e.size() != s.dims) throw Error("embedding dimension mismatch");
      for (int k = 0; k < s.dims; ++k) put<float>(out, e(k));
    }
  }
  return out;
}

EmbeddingSidecar decode_embeddings(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != std::string_view(kMagic, 4))
    throw Error("not an embedding sidecar");
  std::size_t pos = 4;
  if (take<std::uint32_t>(bytes, pos) != kSidecarVersion) throw Error("unsupported sidecar version");
  const auto frames = take<std::uint32_t>(bytes, pos);
  EmbeddingSidecar s;
  s.dims = static_cast<int>(take<std::uint32_t>(bytes, pos));
  s.frames.resize(frames);
  for (auto& frame : s.frames) {
    const auto n = take<std::uint32_t>(bytes, pos);
    if (static_cast<std::size_t>(n) * s.dims * 4 > bytes.size() - pos) throw Error("truncated embedding sidecar");
    frame.resize(n);
    for (auto& e : frame) {
      e.resize(s.dims);
      for (int k = 0; k < s.dims; ++k) e(k) = take<float>(bytes, pos);
    }
  }
  if (pos != bytes.size()) throw Error("trailing bytes in embedding sidecar");
  return s;
}

EmbeddingSidecar embeddings_from_json(std::string_view jsonText) {
  const Json j = parse_json(jsonText);
  if (!j.is_object() || !j.contains("dims") || !j.contains("frames"))
    throw SchemaViolation("", "expected {dims, frames}");
  EmbeddingSidecar s;
  s.dims = integer(j["dims"], "/dims");
  const Json& frames = j["frames"];
  if (!frames.is_object()) throw SchemaViolation("/frames", "expected an object keyed by frame index");
  std::map<int, std::vector<Eigen::VectorXf>> byIndex;
  for (const auto& [key, v] : frames.items()) {
    const std::string p = child("/frames", key);
    auto idx = parse_int_key(key);
    if (!idx) throw SchemaViolation(p, "frame index must be a non-negative integer");
    if (!v.is_array()) throw SchemaViolation(p, "expected an array of vectors");
    auto& out = byIndex[*idx];
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string pi = child(p, i);
      if (!v[i].is_array() || static_cast<int>(v[i].size()) != s.dims)
        throw SchemaViolation(pi, fmt::format("expected {} numbers", s.dims));
      Eigen::VectorXf e(s.dims);
      for (int k = 0; k < s.dims; ++k) e(k) = static_cast<float>(number(v[i][k], child(pi, k)));
      out.push_back(std::move(e));
    }
  }
  if (!byIndex.empty()) s.frames.resize(byIndex.rbegin()->first + 1);
  for (auto& [idx, v] : byIndex) s.frames[idx] = std::move(v);
  return s;
}

std::string embeddings_to_json(const EmbeddingSidecar& s) {
  std::vector<std::string> frames;
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    std::string row = fmt::format("\"{}\": [", f);
    for (std::size_t i = 0; i < s.frames[f].size(); ++i) {
      row += i ? ", [" : "[";
      for (int k = 0; k < s.dims; ++k) row += fmt::format("{}{}", k ? ", " : "", s.frames[f][i](k));
      row += "]";
    }
    frames.push_back(row + "]");
  }
  return object_text({{"dims", std::to_string(s.dims)}, {"frames", block(frames, '{', '}', 2)}}, 0) + "\n";
}

EmbeddingSidecar read_embeddings_file(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == std::string_view(kMagic, 4))
    return decode_embeddings(bytes);
  return embeddings_from_json(bytes);
}

void write_embeddings_file(const std::filesystem::path& path, const EmbeddingSidecar& s) {
  write_text_file(path, encode_embeddings(s));
}

std::vector<AthleteDetection> detections_from_frame(const FrameAnnotation& a,
                                                    const std::vector<Eigen::VectorXf>* embeddings) {
  const bool attach = embeddings && embeddings->size() == a.athletes.size();
  std::vector<AthleteDetection> out;
  for (std::size_t i = 0; i < a.athletes.size(); ++i) {
    const auto& r = a.athletes[i];
    AthleteDetection d;
    d.bbox = r.bbox;
    d.role = r.role_kind();
    d.jerseyNumber = r.jerseyNumber;
    d.legibilityScore = r.legibilityScore.value_or(1.0);
    d.confidence = r.confidence.value_or(1.0);
    if (attach) {
      Eigen::VectorXd e = (*embeddings)[i].cast<double>();
      const double n = e.norm();
      if (n > 0.0) d.embedding = e / n;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace gsr
