#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include <cmath>
#include <numbers>
#include <set>

#include "gsr/projection.hpp"
#include "gsr/synth.hpp"

using namespace gsr;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

// Plain pinhole written out independently of the library.
std::optional<Vec2> pinhole(const CameraParams& c, const Vec3& X) {
  const Vec3 x = c.R * X + c.t;
  if (x.z() <= 0) return std::nullopt;
  return Vec2(c.fx * x.x() / x.z() + c.skew * x.y() / x.z() + c.cx, c.fy * x.y() / x.z() + c.cy);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

CameraParams left_half_camera() {
  // High behind the near touchline, looking at the left half.
  return make_camera(Vec3(-26, -75, 30), 0.0, -0.33, 0.0, 1000, ImageSize{});
}

}  // namespace

TEST_CASE("pinhole examples") {
  CameraParams c;
  c.fx = c.fy = 1000;
  c.t = Vec3(0, 0, 10);
  auto p = project_point(c, Vec3(0, 0, 0));
  REQUIRE(p);
  CHECK(*p == Vec2(0, 0));
  p = project_point(c, Vec3(1, 0, 0));
  REQUIRE(p);
  CHECK(*p == Vec2(100, 0));
  CHECK_FALSE(project_point(c, Vec3(0, 0, -11)).has_value());
  CHECK_FALSE(project_point(c, Vec3(0, 0, -10)).has_value());
}

TEST_CASE("keypoints of a left-half view match the pinhole oracle") {
  const PitchModel pitch = build_pitch();
  const ImageSize size{};
  const CameraParams cam = left_half_camera();
  const auto proj = project_pitch(cam, pitch, size);
  std::set<int> expected;
  for (const auto& kp : keypoint_catalogue(pitch)) {
    auto p = pinhole(cam, kp.position);
    if (p && p->x() >= 0 && p->x() < size.width && p->y() >= 0 && p->y() < size.height) expected.insert(kp.id);
  }
  std::set<int> got;
  for (const auto& [id, p] : proj.keypoints) {
    got.insert(id);
    CHECK((p - *pinhole(cam, pitch.find_keypoint(id)->position)).norm() < 1e-9);
  }
  CHECK(got == expected);
  CHECK(expected.size() >= 15);
  // The left goal and penalty area are in view.
  CHECK(proj.lines.count("Big rect. left main"));
  CHECK(proj.lines.count("Side line left"));
}

TEST_CASE("looking at the sky sees nothing") {
  const CameraParams sky = make_camera(Vec3(0, -60, 15), 0.0, 30 * deg, 0.0, 1500, ImageSize{});
  const auto proj = project_pitch(sky, build_pitch(), ImageSize{});
  CHECK(proj.keypoints.empty());
  CHECK(proj.lines.empty());
}

TEST_CASE("projected line points lie on their elements and inside the frame") {
  const PitchModel pitch = build_pitch();
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageSize size{};
    const CameraParams cam = trial == 0 ? left_half_camera() : sample_main_camera(rng, size, pitch);
    const auto proj = project_pitch(cam, pitch, size);
    for (const auto& [id, p] : proj.keypoints) CHECK(in_frame(p, size));
    for (const auto& [name, pts] : proj.lines) {
      const PitchElement* e = pitch.find_element(name);
      REQUIRE(e);
      const auto dense = sample_element(*e, 0.01);
      for (const auto& q : pts) {
        CHECK(q.x() >= 0.0);
        CHECK(q.x() <= 1.0);
        CHECK(q.y() >= 0.0);
        CHECK(q.y() <= 1.0);
        const Vec2 px(q.x() * size.width, q.y() * size.height);
        double d;
        if (auto s = std::get_if<Segment3>(&e->geometry); s && !e->on_ground()) {
          d = segment_distance(px, *pinhole(cam, s->a), *pinhole(cam, s->b));
        } else if (s) {
          // Ground segment may reach behind the camera; compare on the ground.
          auto g = image_to_pitch(cam, px);
          REQUIRE(g);
          const Vec3 ground(g->x, g->y, 0.0);
          const Vec3 ab = s->b - s->a;
          const double u = std::clamp((ground - s->a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
          d = (*pinhole(cam, s->a + u * ab) - px).norm();
        } else {
          // Ground arc: back-project, take the nearest point on the circle,
          // project again.
          const Arc3& a = std::get<Arc3>(e->geometry);
          auto g = image_to_pitch(cam, px);
          REQUIRE(g);
          const Vec3 ground(g->x, g->y, 0.0);
          const Vec3 on = a.center + a.radius * (ground - a.center).normalized();
          d = (*pinhole(cam, on) - px).norm();
        }
        CHECK_MESSAGE(d < 1e-6, name);
      }
    }
  }
}

TEST_CASE("clipped polylines end on the frame border") {
  const PitchModel pitch = build_pitch();
  const ImageSize size{};
  const CameraParams cam = left_half_camera();
  const auto pieces = project_element(cam, *pitch.find_element("Side line bottom"), size, 0.25);
  REQUIRE_FALSE(pieces.empty());
  const Vec2 end = pieces.front().back();
  const bool on_border = std::abs(end.x()) < 1e-9 || std::abs(end.x() - size.width) < 1e-9 ||
                         std::abs(end.y()) < 1e-9 || std::abs(end.y() - size.height) < 1e-9;
  CHECK(on_border);
}

TEST_CASE("image_to_pitch round trips") {
  const CameraParams cam = make_camera(Vec3(3, -58, 17), 0.1, -0.3, 0.01, 1800, ImageSize{});
  for (double x : {-40.0, -5.0, 0.0, 12.5, 33.0})
    for (double y : {-30.0, 0.0, 20.0}) {
      auto p = project_point(cam, Vec3(x, y, 0));
      REQUIRE(p);
      auto g = image_to_pitch(cam, *p);
      REQUIRE(g);
      CHECK(std::abs(g->x - x) < 1e-8);
      CHECK(std::abs(g->y - y) < 1e-8);
    }

  // Horizon: the image of a direction parallel to the ground.
  const Vec3 dir = cam.R * Vec3(0, 1, 0);
  const Vec2 horizon(cam.fx * dir.x() / dir.z() + cam.cx, cam.fy * dir.y() / dir.z() + cam.cy);
  CHECK_FALSE(image_to_pitch(cam, horizon).has_value());
  // Above the horizon the ray meets the ground behind the camera.
  CHECK_FALSE(image_to_pitch(cam, horizon - Vec2(0, 50)).has_value());
}

TEST_CASE("round trip under random synthetic cameras") {
  const PitchModel pitch = build_pitch();
  Rng rng(5);
  std::uniform_real_distribution<double> ux(-52.5, 52.5), uy(-34, 34);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const CameraParams cam = sample_main_camera(rng, ImageSize{}, pitch);
    const Vec3 X(ux(rng), uy(rng), 0);
    auto p = project_point(cam, X);
    if (!p) continue;
    auto g = image_to_pitch(cam, *p);
    REQUIRE(g);
    worst = std::max(worst, std::hypot(g->x - X.x(), g->y - X.y()));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("athlete pitch position") {
  const CameraParams cam = make_camera(Vec3(0, -60, 15), 0.05, -0.25, 0, 2000, ImageSize{});
  const Vec2 foot = *project_point(cam, Vec3(10, -5, 0));
  const BBox box{foot.x() - 15, foot.y() - 80, 30, 80};
  auto g = athlete_pitch_position(cam, box);
  REQUIRE(g);
  CHECK(std::abs(g->x - 10) < 1e-6);
  CHECK(std::abs(g->y + 5) < 1e-6);

  BBox sky = box;
  sky.top = -5000;
  CHECK_FALSE(athlete_pitch_position(cam, sky).has_value());

  BBox shifted = box;
  shifted.left += 37.5;
  auto s = athlete_pitch_position(cam, shifted);
  auto direct = image_to_pitch(cam, Vec2(shifted.left + shifted.width / 2, shifted.top + shifted.height));
  REQUIRE(s);
  REQUIRE(direct);
  CHECK(s->x == direct->x);
  CHECK(s->y == direct->y);
}

TEST_CASE("projection is covariant with image scaling") {
  const PitchModel pitch = build_pitch();
  const CameraParams cam = left_half_camera();
  CameraParams big = cam;
  big.fx *= 2;
  big.fy *= 2;
  big.cx *= 2;
  big.cy *= 2;
  const auto a = project_pitch(cam, pitch, ImageSize{1920, 1080});
  const auto b = project_pitch(big, pitch, ImageSize{3840, 2160});
  REQUIRE(a.keypoints.size() == b.keypoints.size());
  for (const auto& [id, p] : a.keypoints) CHECK(b.keypoints.at(id) == 2.0 * p);
  REQUIRE(a.lines.size() == b.lines.size());
  for (const auto& [name, pts] : a.lines) {
    const auto& q = b.lines.at(name);
    REQUIRE(q.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((q[i] - pts[i]).norm() < 1e-9);
  }
}
