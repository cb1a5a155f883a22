#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gsr/errors.hpp"
#include "gsr/io.hpp"
#include "gsr/synth.hpp"

using namespace gsr;

TEST_CASE("sampled cameras") {
  const PitchModel pitch = build_pitch();
  const ImageSize size{};
  Rng rng(17);
  for (int k = 0; k < 500; ++k) {
    const CameraParams cam = sample_main_camera(rng);
    CHECK(is_valid(cam));
    const Vec3 c = cam.center();
    CHECK(c.x() >= -10);
    CHECK(c.x() <= 10);
    CHECK(c.y() >= -90);
    CHECK(c.y() <= -40);
    CHECK(c.z() >= 8);
    CHECK(c.z() <= 30);
    const double hfov = 2 * std::atan(size.width / 2.0 / cam.fx) * 180 / std::numbers::pi;
    CHECK(hfov >= 15 - 1e-9);
    CHECK(hfov <= 60 + 1e-9);
    int seen = 0;
    for (const auto& kp : pitch.keypoints()) {
      const Vec3 q = cam.R * kp.position + cam.t;
      if (q.z() <= 0) continue;
      const double u = cam.fx * q.x() / q.z() + cam.cx, v = cam.fy * q.y() / q.z() + cam.cy;
      seen += u >= 0 && u < size.width && v >= 0 && v < size.height;
    }
    CHECK(seen >= 6);
  }
}

TEST_CASE("camera sampling is deterministic") {
  Rng a(99), b(99);
  for (int k = 0; k < 20; ++k) {
    const auto ca = sample_main_camera(a), cb = sample_main_camera(b);
    CHECK(ca.fx == cb.fx);
    CHECK(ca.R == cb.R);
    CHECK(ca.t == cb.t);
  }
}

TEST_CASE("simulated match") {
  Rng rng(5);
  SimulationConfig cfg;
  cfg.nFrames = 250;
  cfg.nReferees = 3;
  const auto scene = simulate_match(rng, cfg);
  REQUIRE(scene.frames() == 250);
  REQUIRE(scene.identities.size() == 25);
  const double xb = cfg.dims.length / 2 + cfg.margin, yb = cfg.dims.width / 2 + cfg.margin;
  double worst_step = 0;
  for (int f = 0; f < scene.frames(); ++f) {
    const Vec3 c = scene.cameraTrajectory[f].center();
    CHECK(c.z() >= 4);
    CHECK(c.z() <= 40);
    CHECK(is_valid(scene.cameraTrajectory[f]));
    for (std::size_t i = 0; i < scene.identities.size(); ++i) {
      const auto& p = scene.positions[f][i];
      CHECK(std::abs(p.x) <= xb);
      CHECK(std::abs(p.y) <= yb);
      if (f > 0) {
        const auto& q = scene.positions[f - 1][i];
        worst_step = std::max(worst_step, std::hypot(p.x - q.x, p.y - q.y));
      }
    }
    if (f > 0) {
      // Bounded angular velocity of the optical axis.
      const Vec3 a = scene.cameraTrajectory[f].R.row(2), b = scene.cameraTrajectory[f - 1].R.row(2);
      const double ang = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
      CHECK(ang <= cfg.maxAngularRate * cfg.dt * 1.5 + 1e-12);
    }
  }
  CHECK(worst_step <= cfg.vmax * cfg.dt + 1e-12);
  CHECK(worst_step > 0);

  double max_cos = -1;
  for (std::size_t i = 0; i < scene.identities.size(); ++i) {
    CHECK(std::abs(scene.identities[i].centroid.norm() - 1) < 1e-12);
    for (std::size_t j = 0; j < i; ++j)
      max_cos = std::max(max_cos, scene.identities[i].centroid.dot(scene.identities[j].centroid));
  }
  CHECK(max_cos < 0.3);

  // Fixed roles and distinct jerseys per squad.
  std::map<Team, std::set<int>> jerseys;
  int keepers = 0, refs = 0;
  for (const auto& id : scene.identities) {
    keepers += id.role == Role::goalkeeper;
    refs += id.role == Role::referee;
    if (id.team) CHECK(jerseys[*id.team].insert(*id.jersey).second);
    else CHECK_FALSE(id.jersey.has_value());
  }
  CHECK(keepers == 2);
  CHECK(refs == 3);
}

TEST_CASE("single frame and bad configs") {
  Rng rng(1);
  SimulationConfig cfg;
  cfg.nFrames = 1;
  const auto scene = simulate_match(rng, cfg);
  CHECK(scene.frames() == 1);
  CHECK(scene.positions.size() == 1);
  const auto obs = render_observations(scene, {}, rng);
  CHECK(obs.size() == 1);
  cfg.nFrames = 0;
  CHECK_THROWS_AS(simulate_match(rng, cfg), Error);
  NoiseModel bad;
  bad.detectionDropout = 1.5;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = {};
  bad.keypointSigma = -1;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("zero noise observations equal the ground truth") {
  Rng rng(8);
  SimulationConfig cfg;
  cfg.nFrames = 5;
  const auto scene = simulate_match(rng, cfg);
  for (const auto& o : render_observations(scene, {}, rng)) {
    REQUIRE(o.keypoints.size() == o.groundTruth.keypoints.size());
    for (const auto& k : o.keypoints) {
      CHECK(k.x == o.groundTruth.keypoints.at(k.id).x);
      CHECK(k.y == o.groundTruth.keypoints.at(k.id).y);
    }
    for (const auto& l : o.lines) CHECK(l.points == o.groundTruth.lines.at(l.name));
    REQUIRE(o.detections.size() == o.groundTruth.athletes.size());
    for (std::size_t i = 0; i < o.detections.size(); ++i) {
      const auto& gt = o.groundTruth.athletes[i];
      CHECK(o.detections[i].bbox == gt.bbox);
      CHECK(o.detections[i].jerseyNumber == gt.jerseyNumber);
      CHECK(scene.identities[o.detectionIdentity[i]].trackId == *gt.trackId);
      CHECK(*o.detections[i].embedding == scene.identities[o.detectionIdentity[i]].centroid);
    }
    CHECK(o.groundTruth.validCamParams);
  }
}

TEST_CASE("keypoint noise statistics") {
  Rng rng(12);
  SimulationConfig cfg;
  cfg.nFrames = 1;
  cfg.moveCamera = false;
  const double sigma = 2.0;
  NoiseModel noise;
  noise.keypointSigma = sigma;
  RenderConfig rc;
  rc.renderLines = false;
  double abs_sum = 0, radial_sum = 0;
  int n = 0;
  while (n < 10000) {
    const auto scene = simulate_match(rng, cfg);
    const auto o = render_observations(scene, noise, rng, rc).front();
    for (const auto& k : o.keypoints) {
      const auto& g = o.groundTruth.keypoints.at(k.id);
      abs_sum += std::abs(k.x - g.x) + std::abs(k.y - g.y);
      radial_sum += std::hypot(k.x - g.x, k.y - g.y);
      ++n;
    }
  }
  // Per axis E|e| = sigma sqrt(2/pi); the 2D distance has mean sigma sqrt(pi/2).
  const double per_axis = abs_sum / (2 * n);
  const double radial = radial_sum / n;
  CHECK(std::abs(per_axis / (sigma * std::sqrt(2 / std::numbers::pi)) - 1) < 0.1);
  CHECK(std::abs(radial / (sigma * std::sqrt(std::numbers::pi / 2)) - 1) < 0.1);
}

TEST_CASE("full dropout removes every detection") {
  Rng rng(3);
  SimulationConfig cfg;
  cfg.nFrames = 20;
  const auto scene = simulate_match(rng, cfg);
  NoiseModel noise;
  noise.detectionDropout = 1.0;
  for (const auto& o : render_observations(scene, noise, rng)) {
    CHECK(o.detections.empty());
    CHECK_FALSE(o.groundTruth.athletes.empty());
  }
}

TEST_CASE("false positives are marked") {
  Rng rng(4);
  SimulationConfig cfg;
  cfg.nFrames = 50;
  const auto scene = simulate_match(rng, cfg);
  NoiseModel noise;
  noise.falsePositiveRate = 2.0;
  int fps = 0;
  for (const auto& o : render_observations(scene, noise, rng)) {
    CHECK(o.detections.size() == o.detectionIdentity.size());
    for (int id : o.detectionIdentity) fps += id < 0;
  }
  CHECK(fps > 50);
  CHECK(fps < 150);
}

TEST_CASE("box synthesis matches the body model") {
  const CameraParams cam = make_camera(Vec3(0, -60, 20), 0, -0.3, 0, 1500, ImageSize{});
  const PitchPosition p{10, -5};
  const auto box = athlete_box(cam, p);
  REQUIRE(box);
  const Vec3 foot = cam.R * Vec3(10, -5, 0) + cam.t;
  CHECK(box->center_x() == doctest::Approx(cam.fx * foot.x() / foot.z() + cam.cx));
  CHECK(box->bottom() == doctest::Approx(cam.fy * foot.y() / foot.z() + cam.cy));
  CHECK(box->width == doctest::Approx(0.4 * box->height));
  const auto back = athlete_pitch_position(cam, *box);
  REQUIRE(back);
  CHECK(std::abs(back->x - 10) < 1e-6);
  CHECK(std::abs(back->y + 5) < 1e-6);
}

TEST_CASE("serialized output is deterministic and round trips") {
  auto render = [](std::uint64_t seed) {
    Rng rng(seed);
    SimulationConfig cfg;
    cfg.nFrames = 4;
    const auto scene = simulate_match(rng, cfg);
    NoiseModel noise;
    noise.keypointSigma = 1;
    noise.falsePositiveRate = 1;
    ClipAnnotation gt, obs;
    const auto frames = render_observations(scene, noise, rng);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      gt.frames[static_cast<int>(f)] = frames[f].groundTruth;
      obs.frames[static_cast<int>(f)] = observation_annotation(frames[f], scene.size);
    }
    return std::pair{write_clip(gt), write_clip(obs)};
  };
  const auto a = render(42), b = render(42);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first != render(43).first);
  const auto parsed = parse_clip(a.first);
  CHECK(write_clip(parsed) == a.first);
  for (const auto& [f, fr] : parsed.frames) {
    CHECK(fr.validCamParams);
    CHECK(fr.camera.has_value());
    CHECK(validate_frame(fr, parsed.size).empty());
  }
}
