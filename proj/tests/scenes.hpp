#pragma once

#include <numbers>

#include "gsr/synth.hpp"

namespace gsr::testing {

// Wide static view with every athlete inside the frame.
inline CameraParams wide_camera() {
  const Vec3 c(0, -70, 25);
  const Vec3 d = Vec3(0, 0, 0) - c;
  const double hfov = 55.0 * std::numbers::pi / 180.0;
  return make_camera(c, std::atan2(d.x(), d.y()), std::atan2(d.z(), std::hypot(d.x(), d.y())), 0.0,
                     960.0 / std::tan(hfov / 2), ImageSize{});
}

struct TrackingScene {
  SyntheticScene scene;
  std::vector<FrameObservation> frames;

  std::vector<std::vector<AthleteDetection>> detections() const {
    std::vector<std::vector<AthleteDetection>> out;
    for (const auto& f : frames) out.push_back(f.detections);
    return out;
  }
};

inline TrackingScene tracking_scene(std::uint64_t seed, int nFrames, double dropout, int players = 22) {
  Rng rng(seed);
  SimulationConfig cfg;
  cfg.nPlayers = players;
  cfg.nFrames = nFrames;
  cfg.camera = wide_camera();
  cfg.moveCamera = false;
  cfg.region = PitchRegion{-28, 28, -18, 18};
  TrackingScene t;
  t.scene = simulate_match(rng, cfg);
  NoiseModel noise;
  noise.embeddingNoiseSigma = 0.03;
  noise.bboxJitter = 0.5;
  noise.detectionDropout = dropout;
  RenderConfig rc;
  rc.renderLines = false;
  t.frames = render_observations(t.scene, noise, rng, rc);
  return t;
}

}  // namespace gsr::testing
