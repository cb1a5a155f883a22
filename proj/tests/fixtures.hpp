#pragma once

// Shared annotation fixtures.

#include <random>

#include "gsr/io.hpp"
#include "gsr/synth.hpp"

namespace gsr::testing {


inline const char* kSample = R"({
  "athletes": [
    {"bbox_ltwh": [1116.5, 679.5, 50.8, 98.2], "track_id": 4, "jersey_number": "10",
     "legibility_score": 0.67, "role": "player", "team": "right"}
  ],
  "keypoints": {
    "2": {"x": 984.0, "y": 348.0, "p": 0.800},
    "32": {"x": 984.0, "y": 460.0, "p": 0.846}
  },
  "lines": {
    "Circle central": [{"x": 0.513, "y": 0.426}, {"x": 0.388, "y": 0.441}, {"x": 0.329, "y": 0.470}],
    "Middle line": [{"x": 0.513, "y": 0.322}, {"x": 0.513, "y": 0.426}, {"x": 0.515, "y": 0.485}]
  },
  "valid_cam_params": false
})";

inline FrameAnnotation random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> small(0, 6);
  auto maybe = [&] { return u(rng) < 0.7; };
  FrameAnnotation a;
  const int n = small(rng);
  for (int i = 0; i < n; ++i) {
    AthleteRecord r;
    r.bbox = {u(rng) * 1900 - 10, u(rng) * 1080, 1 + u(rng) * 80, 1 + u(rng) * 200};
    if (maybe()) r.trackId = static_cast<int>(u(rng) * 1000);
    if (maybe()) r.jerseyNumber = static_cast<int>(u(rng) * 100);
    if (maybe()) r.legibilityScore = u(rng);
    const char* roles[] = {"player", "goalkeeper", "referee", "other", "ball boy"};
    r.role = roles[small(rng) % 5];
    if (maybe()) r.team = u(rng) < 0.5 ? Team::left : Team::right;
    if (u(rng) < 0.3) r.confidence = u(rng);
    if (u(rng) < 0.2) r.extras["occluded"] = u(rng) < 0.5;
    if (u(rng) < 0.1) r.extras["note"] = "x/y";
    a.athletes.push_back(r);
  }
  for (int k = 0, m = small(rng) * 3; k < m; ++k)
    a.keypoints[static_cast<int>(u(rng) * 60)] = {u(rng) * 1920, u(rng) * 1080, u(rng)};
  const char* names[] = {"Middle line", "Circle central", "Side line top", "Big rect. left main"};
  for (const char* name : names) {
    if (!maybe()) continue;
    auto& pts = a.lines[name];
    for (int k = 0, m = small(rng) + 1; k < m; ++k) pts.emplace_back(u(rng), u(rng));
  }
  if (maybe()) {
    Rng crng(rng());
    a.camera = sample_main_camera(crng);
    a.validCamParams = u(rng) < 0.8;
  }
  if (u(rng) < 0.2) a.extensions["frame_time"] = u(rng) * 30;
  if (u(rng) < 0.1) a.extensions["source"] = Json{{"clip", "a"}, {"n", 3}};
  return a;
}

}  // namespace gsr::testing
