#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "gsr/athlete.hpp"
#include "gsr/camera.hpp"

namespace gsr {

using Json = nlohmann::json;

struct AthleteRecord {
  BBox bbox;
  std::optional<int> trackId;
  /// Serialized as a string, e.g. "10".
  std::optional<int> jerseyNumber;
  std::optional<double> legibilityScore;
  /// Raw role label; see role_kind().
  std::string role = "player";
  std::optional<Team> team;
  std::optional<double> confidence;
  /// Unrecognized fields, kept for round trips.
  Json extras = Json::object();

  Role role_kind() const { return parse_role(role); }
};

struct KeypointAnnotation {
  double x = 0.0;  // px
  double y = 0.0;  // px
  double p = 1.0;
};

struct FrameAnnotation {
  std::vector<AthleteRecord> athletes;
  std::map<int, KeypointAnnotation> keypoints;
  /// Element name -> points in normalized image coordinates.
  std::map<std::string, std::vector<Vec2>> lines;
  /// K/Rt; absent means both are omitted from the file.
  std::optional<CameraParams> camera;
  bool validCamParams = false;
  Json extensions = Json::object();
};

struct PretrainAthlete {
  BBox bbox;
  std::optional<int> trackId;
  std::optional<int> jerseyNumber;
  std::string role = "player";
};

struct PretrainFrameAnnotation {
  std::vector<PretrainAthlete> athletes;
  std::map<int, KeypointAnnotation> keypoints;
  std::map<std::string, std::vector<Vec2>> lines;
};

/// Fixed decimals used by the canonical writer.
namespace decimals {
inline constexpr int bbox = 2;
inline constexpr int keypoint = 3;
inline constexpr int confidence = 3;
inline constexpr int legibility = 2;
inline constexpr int line = 6;
inline constexpr int K = 4;
inline constexpr int Rt = 9;
}  // namespace decimals

FrameAnnotation parse_frame(std::string_view jsonText);
FrameAnnotation frame_from_json(const Json& j, const std::string& path = "");

/// Canonical serialization: fixed key order, fixed decimals, keypoint ids in
/// numeric order, extension keys sorted after the known ones.
std::string write_frame(const FrameAnnotation& a, int indent = 0);

PretrainFrameAnnotation to_pretrain_subset(const FrameAnnotation& a, double legibilityThreshold = 0.5);
std::string write_pretrain_frame(const PretrainFrameAnnotation& a, int indent = 0);

/// Values rounded exactly as the writer would print them.
FrameAnnotation canonicalize(const FrameAnnotation& a);

bool structurally_equal(const FrameAnnotation& a, const FrameAnnotation& b);
bool structurally_equal(const PretrainFrameAnnotation& a, const PretrainFrameAnnotation& b);

struct ValidationIssue {
  std::string path;
  std::string message;
};

/// Keypoints outside the image, line points outside [0, 1], malformed boxes.
std::vector<ValidationIssue> validate_frame(const FrameAnnotation& a, ImageSize size);

/// One file per clip, frames keyed by frame index.
struct ClipAnnotation {
  ImageSize size;
  std::map<int, FrameAnnotation> frames;
  Json extensions = Json::object();
};

ClipAnnotation parse_clip(std::string_view jsonText);
std::string write_clip(const ClipAnnotation& clip);
std::string write_pretrain_clip(const ClipAnnotation& clip, double legibilityThreshold = 0.5);

ClipAnnotation read_clip_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Appearance embeddings of one sequence, grouped per frame in detection
/// order.
struct EmbeddingSidecar {
  int dims = 0;
  std::vector<std::vector<Eigen::VectorXf>> frames;
};

/// Little-endian: "GSRE", u32 version, u32 frame count, u32 dims, then per
/// frame a u32 detection count followed by that many float32 vectors.
std::string encode_embeddings(const EmbeddingSidecar& s);
EmbeddingSidecar decode_embeddings(std::string_view bytes);
/// {"dims": d, "frames": {"0": [[...], ...], ...}}
EmbeddingSidecar embeddings_from_json(std::string_view jsonText);
std::string embeddings_to_json(const EmbeddingSidecar& s);

/// Binary or JSON, detected from the leading bytes.
EmbeddingSidecar read_embeddings_file(const std::filesystem::path& path);
void write_embeddings_file(const std::filesystem::path& path, const EmbeddingSidecar& s);

/// Detection view of a frame's athlete records. Embeddings are attached when
/// `embeddings` is given and matches the record count.
std::vector<AthleteDetection> detections_from_frame(const FrameAnnotation& a,
                                                    const std::vector<Eigen::VectorXf>* embeddings = nullptr);

}  // namespace gsr
