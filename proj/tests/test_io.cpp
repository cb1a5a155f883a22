#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <random>

#include "gsr/errors.hpp"
#include "gsr/io.hpp"
#include "gsr/synth.hpp"
#include "fixtures.hpp"

using namespace gsr;
using gsr::testing::kSample;
using gsr::testing::random_frame;

TEST_CASE("appendix sample") {
  const auto a = parse_frame(kSample);
  REQUIRE(a.athletes.size() == 1);
  const auto& r = a.athletes[0];
  CHECK(r.bbox == BBox{1116.5, 679.5, 50.8, 98.2});
  CHECK(r.trackId == 4);
  CHECK(r.jerseyNumber == 10);
  CHECK(r.legibilityScore == 0.67);
  CHECK(r.role == "player");
  CHECK(r.role_kind() == Role::player);
  CHECK(r.team == Team::right);
  CHECK_FALSE(r.confidence.has_value());
  REQUIRE(a.keypoints.count(2));
  CHECK(a.keypoints.at(2).x == 984.0);
  CHECK(a.keypoints.at(2).y == 348.0);
  CHECK(a.keypoints.at(2).p == 0.8);
  CHECK(a.lines.at("Middle line").size() == 3);
  CHECK(a.lines.at("Circle central")[0] == Vec2(0.513, 0.426));
  CHECK_FALSE(a.camera.has_value());

  const std::string text = write_frame(a);
  const auto back = parse_frame(text);
  CHECK(structurally_equal(back, a));
  CHECK(write_frame(back) == text);
  const auto j = Json::parse(text);
  CHECK(j["athletes"][0]["jersey_number"] == "10");
  CHECK_FALSE(j.contains("K"));
  CHECK_FALSE(j.contains("Rt"));
  CHECK(j["valid_cam_params"] == false);
}

TEST_CASE("empty collections") {
  const auto a = parse_frame(R"({"athletes": [], "keypoints": {}, "lines": {}})");
  CHECK(a.athletes.empty());
  CHECK(a.keypoints.empty());
  CHECK(a.lines.empty());
  CHECK_FALSE(a.validCamParams);
  const auto b = parse_frame(R"({"athletes": [], "keypoints": [], "lines": []})");
  CHECK(structurally_equal(a, b));
  CHECK(structurally_equal(parse_frame(write_frame(a)), a));
}

TEST_CASE("camera fields") {
  FrameAnnotation a;
  Rng rng(2);
  a.camera = sample_main_camera(rng);
  a.validCamParams = true;
  const auto j = Json::parse(write_frame(a));
  REQUIRE(j.contains("K"));
  REQUIRE(j.contains("Rt"));
  CHECK(j["K"].size() == 3);
  CHECK(j["Rt"][0].size() == 4);
  const auto back = parse_frame(write_frame(a));
  CHECK(std::abs(back.camera->fx - a.camera->fx) <= 5e-5);
  CHECK((back.camera->R - a.camera->R).cwiseAbs().maxCoeff() <= 5e-10);
  CHECK(back.validCamParams);
  CHECK_THROWS_AS(parse_frame(R"({"K": [[1,0,0],[0,1,0],[0,0,1]]})"), SchemaViolation);
}

TEST_CASE("randomized round trips") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 10000; ++k) {
    const auto a = random_frame(rng);
    const std::string text = write_frame(a, k % 3);
    const auto back = parse_frame(text);
    REQUIRE(structurally_equal(back, canonicalize(a)));
    REQUIRE(write_frame(back, k % 3) == text);
  }
}

TEST_CASE("pretraining subset") {
  const auto a = parse_frame(kSample);
  const auto p = to_pretrain_subset(a);
  const auto j = Json::parse(write_pretrain_frame(p));
  std::set<std::string> keys;
  for (const auto& [k, v] : j["athletes"][0].items()) keys.insert(k);
  CHECK(keys == std::set<std::string>{"bbox_ltwh", "track_id", "jersey_number", "role"});
  std::set<std::string> top;
  for (const auto& [k, v] : j.items()) top.insert(k);
  CHECK(top == std::set<std::string>{"athletes", "keypoints", "lines"});
  CHECK(j["athletes"][0]["jersey_number"] == "10");

  auto low = a;
  low.athletes[0].legibilityScore = 0.3;
  CHECK_FALSE(to_pretrain_subset(low).athletes[0].jerseyNumber.has_value());
  low.athletes[0].legibilityScore = 0.5;
  CHECK(to_pretrain_subset(low).athletes[0].jerseyNumber == 10);

  std::mt19937_64 rng(9);
  for (int k = 0; k < 500; ++k) {
    const auto f = random_frame(rng);
    const auto once = to_pretrain_subset(f);
    const auto twice = to_pretrain_subset(parse_frame(write_pretrain_frame(once)));
    CHECK(write_pretrain_frame(twice) == write_pretrain_frame(once));
  }
}

TEST_CASE("schema violations carry a path") {
  auto path_of = [](const char* text) -> std::string {
    try {
      parse_frame(text);
    } catch (const SchemaViolation& e) {
      return e.path();
    }
    return "none";
  };
  CHECK(path_of(R"({"athletes": [{"bbox_ltwh": [1, 2, 3], "role": "player"}]})") == "/athletes/0/bbox_ltwh");
  CHECK(path_of(R"({"athletes": [{"bbox_ltwh": [1, 2, 3, "x"], "role": "player"}]})") ==
        "/athletes/0/bbox_ltwh/3");
  CHECK(path_of(R"({"athletes": [{"bbox_ltwh": [1, 2, 3, 4]}]})") == "/athletes/0/role");
  CHECK(path_of(R"({"keypoints": {"a": {"x": 1, "y": 2}}})") == "/keypoints/a");
  CHECK(path_of(R"({"keypoints": {"3": {"x": "1", "y": 2}}})") == "/keypoints/3/x");
  CHECK(path_of(R"({"lines": {"Middle line": [{"x": 0.1}]}})") == "/lines/Middle line/0");
  CHECK(path_of(R"({"valid_cam_params": 1})") == "/valid_cam_params");
  CHECK(path_of(R"({"athletes": [{"bbox_ltwh": [1, 2, 3, 4], "role": "player", "team": "north"}]})") ==
        "/athletes/0/team");
  CHECK(path_of("[1, 2]") == "");
  CHECK(path_of("{not json") == "");
  CHECK(path_of(R"({"athletes": [{"bbox_ltwh": [1, 2, 3, 4], "role": "player", "jersey_number": "null"}]})") ==
        "none");
}

TEST_CASE("coordinate convention validator") {
  auto a = parse_frame(kSample);
  CHECK(validate_frame(a, ImageSize{}).empty());
  a.keypoints[5] = {0.4, 0.5, 1.0};
  CHECK(validate_frame(a, ImageSize{}).empty());
  a.keypoints[6] = {2000, 10, 1.0};
  a.lines["Middle line"].emplace_back(513.0, 426.0);
  const auto issues = validate_frame(a, ImageSize{});
  REQUIRE(issues.size() == 2);
  CHECK(issues[0].path == "/keypoints/6");
  CHECK(issues[1].path == "/lines/Middle line/3");
}

TEST_CASE("unknown fields survive") {
  const char* text = R"({"athletes": [{"bbox_ltwh": [1, 2, 3, 4], "role": "coach", "zz": [1, 2], "aa": {"k": null}}],
                         "keypoints": {}, "lines": {}, "weather": "rain", "camera_id": 3})";
  const auto a = parse_frame(text);
  CHECK(a.athletes[0].role == "coach");
  CHECK(a.athletes[0].role_kind() == Role::unknown);
  CHECK(a.athletes[0].extras["zz"] == Json::array({1, 2}));
  CHECK(a.extensions["weather"] == "rain");
  const auto back = parse_frame(write_frame(a));
  CHECK(structurally_equal(back, a));
  CHECK(Json::parse(write_frame(a))["camera_id"] == 3);
}

TEST_CASE("embedding sidecar") {
  EmbeddingSidecar s;
  s.dims = 5;
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n;
  for (int f = 0; f < 4; ++f) {
    s.frames.emplace_back();
    for (int i = 0; i < f; ++i) {
      Eigen::VectorXf e(5);
      for (int k = 0; k < 5; ++k) e(k) = n(rng);
      s.frames.back().push_back(e);
    }
  }
  const std::string bytes = encode_embeddings(s);
  CHECK(bytes.size() == 16 + 4 * 4 + (0 + 1 + 2 + 3) * 5 * 4);
  CHECK(bytes.substr(0, 4) == "GSRE");
  const auto back = decode_embeddings(bytes);
  REQUIRE(back.frames.size() == 4);
  for (int f = 0; f < 4; ++f)
    for (int i = 0; i < f; ++i) CHECK(back.frames[f][i] == s.frames[f][i]);
  CHECK_THROWS(decode_embeddings(bytes.substr(0, bytes.size() - 1)));
  CHECK_THROWS(decode_embeddings(bytes + "x"));

  const auto js = embeddings_from_json(embeddings_to_json(s));
  REQUIRE(js.frames.size() == 4);
  for (int f = 0; f < 4; ++f)
    for (int i = 0; i < f; ++i) CHECK(js.frames[f][i] == s.frames[f][i]);

  const auto dir = std::filesystem::temp_directory_path() / "gsr_io_test";
  write_embeddings_file(dir / "c.emb", s);
  write_text_file(dir / "c.emb.json", embeddings_to_json(s));
  CHECK(read_embeddings_file(dir / "c.emb").frames.size() == 4);
  CHECK(read_embeddings_file(dir / "c.emb.json").frames[3].size() == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("clip files") {
  ClipAnnotation clip;
  clip.size = {1280, 720};
  clip.frames[0] = parse_frame(kSample);
  clip.frames[12] = FrameAnnotation{};
  clip.extensions["fps"] = 25;
  const std::string text = write_clip(clip);
  const auto back = parse_clip(text);
  CHECK(back.size.width == 1280);
  CHECK(back.frames.size() == 2);
  CHECK(back.frames.count(12));
  CHECK(write_clip(back) == text);
  CHECK(text.back() == '\n');
  const auto pre = Json::parse(write_pretrain_clip(clip));
  CHECK_FALSE(pre.contains("fps"));
  CHECK_FALSE(pre["frames"]["0"].contains("valid_cam_params"));
  CHECK_THROWS_AS(parse_clip(R"({"image_width": 10, "frames": {}})"), SchemaViolation);
  try {
    parse_clip(R"({"image_width": 10, "image_height": 10, "frames": {"0": {"athletes": [{}]}}})");
    FAIL("expected a schema violation");
  } catch (const SchemaViolation& e) {
    CHECK(e.path() == "/frames/0/athletes/0/bbox_ltwh");
  }
}

TEST_CASE("detections view") {
  auto a = parse_frame(kSample);
  a.athletes.push_back(a.athletes[0]);
  a.athletes[1].legibilityScore.reset();
  a.athletes[1].role = "referee";
  std::vector<Eigen::VectorXf> emb{Eigen::VectorXf::Constant(4, 2.0f), Eigen::VectorXf::Zero(4)};
  const auto d = detections_from_frame(a, &emb);
  REQUIRE(d.size() == 2);
  CHECK(d[0].legibilityScore == 0.67);
  CHECK(d[1].legibilityScore == 1.0);
  CHECK(d[1].role == Role::referee);
  CHECK(std::abs(d[0].embedding->norm() - 1) < 1e-12);
  CHECK_FALSE(d[1].embedding.has_value());
  CHECK_FALSE(detections_from_frame(a)[0].embedding.has_value());
}
