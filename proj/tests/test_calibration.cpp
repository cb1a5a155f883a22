#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gsr/calibration.hpp"
#include "gsr/errors.hpp"
#include "gsr/projection.hpp"
#include "gsr/synth.hpp"

using namespace gsr;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

struct Obs {
  std::vector<KeypointObservation> kps;
  std::vector<LineObservation> lines;
};

Obs observe(const CameraParams& cam, const PitchModel& pitch, ImageSize size, double spacing = 1.0) {
  Obs o;
  const auto proj = project_pitch(cam, pitch, size, spacing);
  for (const auto& [id, p] : proj.keypoints) o.kps.push_back({id, p.x(), p.y(), 1.0});
  for (const auto& [name, pts] : proj.lines) o.lines.push_back({name, pts});
  return o;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Mat3 small_rotation(const Vec3& w) { return Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix(); }

// Camera with at least `n` ground keypoints in frame.
CameraParams camera_with_keypoints(Rng& rng, const PitchModel& pitch, int n) {
  return sample_main_camera(rng, ImageSize{}, pitch, n);
}

}  // namespace

TEST_CASE("refinement at the optimum stays there") {
  const PitchModel pitch = build_pitch();
  Rng rng(1);
  const CameraParams cam = camera_with_keypoints(rng, pitch, 8);
  Obs o = observe(cam, pitch, ImageSize{});
  // Arcs are matched against a sampled polyline; the chord error keeps the
  // residual slightly above zero.
  const auto with_arcs = refine_pnl(cam, o.kps, o.lines, pitch, ImageSize{});
  CHECK(with_arcs.rmsReprojError < 1e-2);
  CHECK(with_arcs.valid);
  std::erase_if(o.lines, [&](const LineObservation& l) { return pitch.find_element(l.name)->is_arc(); });
  const auto res = refine_pnl(cam, o.kps, o.lines, pitch, ImageSize{});
  CHECK(res.rmsReprojError < 1e-6);
  CHECK(res.valid);
  CHECK((res.params.center() - cam.center()).norm() < 1e-6);
}

TEST_CASE("refinement recovers a perturbed camera") {
  const PitchModel pitch = build_pitch();
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    const Obs o = observe(truth, pitch, ImageSize{});
    CameraParams init = truth;
    init.fx = init.fy = truth.fx * 1.05;
    init.R = small_rotation(Vec3(1, -1, 0.5).normalized() * 2 * deg) * truth.R;
    init.t = -init.R * truth.center();
    const auto res = refine_pnl(init, o.kps, o.lines, pitch, ImageSize{});
    CHECK(rel(res.params.fx, truth.fx) < 1e-4);
    CHECK(rotation_distance(res.params.R, truth.R) < 1e-4);
    CHECK((res.params.center() - truth.center()).norm() / truth.center().norm() < 1e-4);
    // Cost never increases across accepted steps.
    for (std::size_t i = 1; i < res.costHistory.size(); ++i) CHECK(res.costHistory[i] <= res.costHistory[i - 1]);
    CHECK(res.rmsReprojError <= res.initialRmsReprojError);
  }
}

TEST_CASE("refinement never hurts on noisy observations") {
  const PitchModel pitch = build_pitch();
  Rng rng(3);
  std::normal_distribution<double> n(0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    Obs o = observe(truth, pitch, ImageSize{});
    for (auto& k : o.kps) {
      k.x += n(rng);
      k.y += n(rng);
    }
    CameraParams init = truth;
    init.fx = init.fy = truth.fx * 0.97;
    const auto res = refine_pnl(init, o.kps, o.lines, pitch, ImageSize{});
    CHECK(res.rmsReprojError <= res.initialRmsReprojError);
  }
}

TEST_CASE("calibrate_frame examples") {
  const PitchModel pitch = build_pitch();
  Rng rng(4);
  SUBCASE("eight noiseless keypoints") {
    for (int trial = 0; trial < 10; ++trial) {
      const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
      Obs o = observe(truth, pitch, ImageSize{});
      const auto res = calibrate_frame(o.kps, {}, pitch, ImageSize{});
      REQUIRE(res.has_value());
      CHECK(res->valid);
      CHECK(rel(res->params.fx, truth.fx) < 1e-4);
      CHECK(rotation_distance(res->params.R, truth.R) < 1e-4);
      CHECK((res->params.t - truth.t).norm() / truth.t.norm() < 1e-4);
    }
  }
  SUBCASE("two keypoints") {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    Obs o = observe(truth, pitch, ImageSize{});
    o.kps.resize(2);
    CHECK_FALSE(calibrate_frame(o.kps, {}, pitch, ImageSize{}).has_value());
  }
  SUBCASE("zero confidences") {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    Obs o = observe(truth, pitch, ImageSize{});
    for (auto& k : o.kps) k.p = 0.0;
    CHECK_FALSE(calibrate_frame(o.kps, {}, pitch, ImageSize{}).has_value());
  }
  SUBCASE("empty input") { CHECK_FALSE(calibrate_frame({}, {}, pitch, ImageSize{}).has_value()); }
}

TEST_CASE("lines complete an under-determined keypoint set") {
  const PitchModel pitch = build_pitch();
  Rng rng(5);
  int calibrated = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    Obs o = observe(truth, pitch, ImageSize{}, 0.5);
    o.kps.resize(3);
    CHECK_FALSE(calibrate_frame(o.kps, {}, pitch, ImageSize{}).has_value());
    auto res = calibrate_frame(o.kps, o.lines, pitch, ImageSize{});
    if (res && rel(res->params.fx, truth.fx) < 1e-4) ++calibrated;
  }
  CHECK(calibrated >= 8);
}

TEST_CASE("residual map matches direct reprojection") {
  const PitchModel pitch = build_pitch();
  Rng rng(6);
  std::normal_distribution<double> n(0, 1.5);
  const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
  Obs o = observe(truth, pitch, ImageSize{});
  for (auto& k : o.kps) {
    k.x += n(rng);
    k.y += n(rng);
  }
  const auto res = calibrate_frame(o.kps, o.lines, pitch, ImageSize{});
  REQUIRE(res.has_value());
  const auto direct = reprojection_residuals(res->params, o.kps, o.lines, pitch, ImageSize{});
  for (const auto& k : o.kps) {
    const auto p = project_point(res->params, pitch.find_keypoint(k.id)->position);
    REQUIRE(p.has_value());
    CHECK(std::abs(direct.keypoints.at(k.id) - (*p - Vec2(k.x, k.y)).norm()) < 1e-9);
    CHECK(std::abs(res->perElementResiduals.keypoints.at(k.id) - direct.keypoints.at(k.id)) < 1e-9);
  }
  for (const auto& [name, v] : direct.lines) CHECK(std::abs(res->perElementResiduals.lines.at(name) - v) < 1e-9);
}

TEST_CASE("scale covariance") {
  const PitchModel pitch = build_pitch();
  Rng rng(8);
  std::normal_distribution<double> n(0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const CameraParams truth = camera_with_keypoints(rng, pitch, 8);
    Obs o = observe(truth, pitch, ImageSize{});
    for (auto& k : o.kps) {
      k.x += n(rng);
      k.y += n(rng);
    }
    Obs big = o;
    for (auto& k : big.kps) {
      k.x *= 2;
      k.y *= 2;
    }
    const auto a = calibrate_frame(o.kps, o.lines, pitch, ImageSize{1920, 1080});
    const auto b = calibrate_frame(big.kps, big.lines, pitch, ImageSize{3840, 2160});
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(rel(b->params.fx, 2 * a->params.fx) < 1e-6);
    CHECK(b->params.cx == 2 * a->params.cx);
    CHECK(b->params.cy == 2 * a->params.cy);
    CHECK(rotation_distance(a->params.R, b->params.R) < 1e-6);
    CHECK((a->params.center() - b->params.center()).norm() / a->params.center().norm() < 1e-6);
  }
}

TEST_CASE("validity gate") {
  const ValidityConfig v;
  const ImageSize size{1920, 1080};
  CameraParams cam = make_camera(Vec3(0, -60, 15), 0, -0.3, 0, 2000, size);
  CHECK(passes_validity(cam, 9.9, size, v));
  CHECK_FALSE(passes_validity(cam, 10.1, size, v));  // 5 px at 960 scales to 10 px at 1920
  CHECK_FALSE(passes_validity(make_camera(Vec3(0, -60, 15), 0, -0.3, 0, 300, size), 1, size, v));
  CHECK_FALSE(passes_validity(make_camera(Vec3(0, -60, 15), 0, -0.3, 0, 20000, size), 1, size, v));
  CHECK_FALSE(passes_validity(make_camera(Vec3(0, -60, 1), 0, -0.3, 0, 2000, size), 1, size, v));
  CHECK_FALSE(passes_validity(make_camera(Vec3(0, -60, 100), 0, -0.3, 0, 2000, size), 1, size, v));
  CHECK_FALSE(passes_validity(cam, std::nan(""), size, v));
}
