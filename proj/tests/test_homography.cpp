#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gsr/errors.hpp"
#include "gsr/homography.hpp"
#include "gsr/synth.hpp"

using namespace gsr;

namespace {

Vec2 apply(const Mat3& H, const Vec2& x) {
  const Vec3 h = H * x.homogeneous();
  return h.hnormalized();
}

// Scale and sign of b matched to a before comparing.
double relative_difference(const Mat3& a, const Mat3& b) {
  const double s = (a.cwiseProduct(b)).sum() / b.squaredNorm();
  return (a - s * b).norm() / a.norm();
}

constexpr double deg = std::numbers::pi / 180.0;

}  // namespace

TEST_CASE("identity correspondences give the identity") {
  std::vector<PointCorrespondence> pairs{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}, {{1, 1}, {1, 1}}};
  const Mat3 H = estimate_homography_dlt(pairs);
  const Mat3 I = H / H(2, 2);
  CHECK((I - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(H.norm() - 1.0) < 1e-12);
}

TEST_CASE("noiseless recovery of a random homography") {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Mat3 Ht;
    Ht << 900 + 100 * u(rng), 50 * u(rng), 960 + 50 * u(rng), 30 * u(rng), 400 + 50 * u(rng),
        540 + 50 * u(rng), 1e-3 * u(rng), 5e-3 + 1e-3 * u(rng), 1.0;
    std::vector<PointCorrespondence> pairs;
    for (int i = 0; i < 12; ++i) {
      const Vec2 w(50 * u(rng), 30 * u(rng));
      pairs.push_back({w, apply(Ht, w)});
    }
    const Mat3 H = estimate_homography_dlt(pairs);
    CHECK(relative_difference(Ht, H) < 1e-8);
    for (const auto& p : pairs) CHECK((H * p.world.homogeneous()).z() > 0);
  }
}

TEST_CASE("noisy pairs: mean symmetric transfer error within 2 sigma") {
  const double sigma = 1.0;
  Mat3 Ht;
  Ht << 1.2, 0.1, 30, -0.05, 0.9, 40, 1e-4, 2e-4, 1;
  double total = 0;
  int count = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0, 500);
    std::normal_distribution<double> n(0, sigma);
    std::vector<PointCorrespondence> pairs;
    for (int i = 0; i < 10; ++i) {
      const Vec2 w(u(rng), u(rng));
      pairs.push_back({w, apply(Ht, w) + Vec2(n(rng), n(rng))});
    }
    const Mat3 H = estimate_homography_dlt(pairs);
    const Mat3 Hi = H.inverse();
    for (const auto& p : pairs) {
      total += 0.5 * ((apply(H, p.world) - p.image).norm() + (apply(Hi, p.image) - p.world).norm());
      ++count;
    }
  }
  CHECK(total / count <= 2 * sigma);
}

TEST_CASE("degenerate inputs") {
  std::vector<PointCorrespondence> three{{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  CHECK_THROWS_AS(estimate_homography_dlt(three), DegenerateConfiguration);
  std::vector<PointCorrespondence> collinear;
  for (int i = 0; i < 6; ++i) collinear.push_back({{double(i), 2.0 * i}, {3.0 * i, 1.0 + i}});
  CHECK_THROWS_AS(estimate_homography_dlt(collinear), DegenerateConfiguration);
}

TEST_CASE("decompose the reference view") {
  const ImageSize size{1920, 1080};
  const CameraParams cam = make_camera(Vec3(0, -60, 15), 0.0, -40 * deg, 0.0, 1000.0, size);
  const Mat3 H = compose_homography(cam);
  const CameraParams out = decompose_homography(H, size.width, size.height);
  CHECK(std::abs(out.fx - 1000.0) / 1000.0 < 1e-6);
  CHECK(out.fx == out.fy);
  CHECK(rotation_distance(out.R, cam.R) < 1e-8);
  CHECK((out.t - cam.t).norm() < 1e-6);
  CHECK(relative_difference(H, compose_homography(out)) < 1e-9);
}

TEST_CASE("fronto-parallel homography is flagged") {
  CameraParams cam;
  cam.fx = cam.fy = 1000;
  cam.cx = 960;
  cam.cy = 540;
  cam.R = Mat3::Identity();
  cam.t = Vec3(0, 0, 10);
  CHECK_THROWS_AS(decompose_homography(compose_homography(cam), 1920, 1080), NoValidFocal);
  // Looking straight down from above.
  const CameraParams down = make_camera(Vec3(1, 2, 30), 0.3, -90 * deg, 0.0, 1200.0, ImageSize{});
  CHECK_THROWS_AS(decompose_homography(compose_homography(down), 1920, 1080), NoValidFocal);
}

TEST_CASE("decompose after compose is the identity on synthetic cameras") {
  Rng rng(11);
  const PitchModel pitch = build_pitch();
  double worst = 0;
  for (int i = 0; i < 300; ++i) {
    const CameraParams cam = sample_main_camera(rng, ImageSize{}, pitch);
    Mat3 H = compose_homography(cam);
    H *= std::uniform_real_distribution<double>(-3, 3)(rng);  // arbitrary scale and sign
    const CameraParams out = decompose_homography(H, 1920, 1080);
    worst = std::max({worst, std::abs(out.fx - cam.fx) / cam.fx, rotation_distance(out.R, cam.R),
                      (out.t - cam.t).norm() / cam.t.norm()});
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("pose for a known focal") {
  const CameraParams cam = make_camera(Vec3(5, -55, 18), 0.2, -0.35, 0.01, 2500.0, ImageSize{});
  const CameraParams out = pose_from_homography(-3.0 * compose_homography(cam), 2500.0, 1920, 1080);
  CHECK(rotation_distance(out.R, cam.R) < 1e-9);
  CHECK((out.center() - cam.center()).norm() < 1e-7);
}
