#include "gsr/pitch.hpp"

#include <cmath>
#include <numbers>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const char* what) {
  if (!cond) throw InvalidDimensions(what);
}

}  // namespace

void validate(const PitchDimensions& d) {
  require(d.length > 0 && d.width > 0 && d.centerCircleRadius > 0 && d.penaltyAreaDepth > 0 &&
              d.penaltyAreaWidth > 0 && d.goalAreaDepth > 0 && d.goalAreaWidth > 0 &&
              d.penaltyMarkDistance > 0 && d.goalWidth > 0 && d.goalHeight > 0,
          "all pitch dimensions must be strictly positive");
  require(d.penaltyAreaWidth < d.width, "penaltyAreaWidth must be smaller than width");
  require(d.goalAreaDepth < d.penaltyAreaDepth,
          "goalAreaDepth must be smaller than penaltyAreaDepth");
  require(d.goalAreaWidth < d.penaltyAreaWidth,
          "goalAreaWidth must be smaller than penaltyAreaWidth");
  require(d.goalWidth < d.goalAreaWidth, "goalWidth must be smaller than goalAreaWidth");
  require(d.penaltyMarkDistance < d.penaltyAreaDepth,
          "penalty mark must lie inside the penalty area");
  // The penalty arc has to leave the penalty area and stay clear of the
  // other markings, otherwise the marking topology (and the keypoint
  // catalogue) changes.
  require(d.centerCircleRadius > d.penaltyAreaDepth - d.penaltyMarkDistance,
          "penalty arc does not reach outside the penalty area");
  require(d.centerCircleRadius < d.penaltyAreaWidth / 2,
          "penalty arc would cross the penalty area side lines");
  require(d.centerCircleRadius < d.width / 2, "center circle exceeds the touchlines");
  require(d.centerCircleRadius < d.length / 2 - d.penaltyAreaDepth,
          "center circle reaches the penalty areas");
  require(d.penaltyMarkDistance + d.centerCircleRadius < d.length / 2,
          "penalty arc reaches the halfway line");
}

bool Arc3::full_circle() const { return endAngle - startAngle >= kTwoPi - 1e-12; }

Vec3 PitchElement::point_at(double s) const {
  if (const auto* seg = std::get_if<Segment3>(&geometry)) return seg->a + s * (seg->b - seg->a);
  const auto& arc = std::get<Arc3>(geometry);
  const double a = arc.startAngle + s * (arc.endAngle - arc.startAngle);
  return arc.center + arc.radius * Vec3(std::cos(a), std::sin(a), 0.0);
}

double PitchElement::length() const {
  if (const auto* seg = std::get_if<Segment3>(&geometry)) return (seg->b - seg->a).norm();
  const auto& arc = std::get<Arc3>(geometry);
  return arc.radius * (arc.endAngle - arc.startAngle);
}

bool PitchElement::on_ground() const {
  if (const auto* seg = std::get_if<Segment3>(&geometry)) return seg->a.z() == 0.0 && seg->b.z() == 0.0;
  return std::get<Arc3>(geometry).center.z() == 0.0;
}

PitchModel::PitchModel(PitchDimensions dims, std::vector<PitchElement> elements,
                       std::vector<PitchMark> marks, std::vector<PitchKeypoint> keypoints)
    : dims_(dims),
      elements_(std::move(elements)),
      marks_(std::move(marks)),
      keypoints_(std::move(keypoints)) {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (!element_index_.emplace(elements_[i].name, i).second)
      throw InvalidDimensions("duplicate pitch element name: " + elements_[i].name);
  }
  for (std::size_t i = 0; i < keypoints_.size(); ++i) {
    if (!keypoint_index_.emplace(keypoints_[i].id, i).second)
      throw InvalidDimensions("duplicate keypoint id");
  }
}

const PitchElement* PitchModel::find_element(std::string_view name) const {
  auto it = element_index_.find(name);
  return it == element_index_.end() ? nullptr : &elements_[it->second];
}

const PitchKeypoint* PitchModel::find_keypoint(int id) const {
  auto it = keypoint_index_.find(id);
  return it == keypoint_index_.end() ? nullptr : &keypoints_[it->second];
}

PitchModel build_pitch(const PitchDimensions& d) {
  validate(d);
  const double hl = d.length / 2;
  const double hw = d.width / 2;
  const double pa_x = hl - d.penaltyAreaDepth;
  const double pa_y = d.penaltyAreaWidth / 2;
  const double ga_x = hl - d.goalAreaDepth;
  const double ga_y = d.goalAreaWidth / 2;
  const double pm_x = hl - d.penaltyMarkDistance;
  const double gy = d.goalWidth / 2;
  const double gh = d.goalHeight;
  // Half-angle of the part of the penalty arc outside the penalty area.
  const double arc_half = std::acos((d.penaltyAreaDepth - d.penaltyMarkDistance) / d.centerCircleRadius);
  const double r = d.centerCircleRadius;

  auto seg = [](std::string name, Vec3 a, Vec3 b) {
    return PitchElement{std::move(name), Segment3{a, b}};
  };
  auto g = [](double x, double y) { return Vec3(x, y, 0.0); };

  std::vector<PitchElement> e;
  // Names follow the SoccerNet line vocabulary. "top" is the far side
  // (y > 0); goal posts are named as seen from the pitch center facing the
  // goal.
  e.push_back(seg("Side line top", g(-hl, hw), g(hl, hw)));
  e.push_back(seg("Side line bottom", g(-hl, -hw), g(hl, -hw)));
  e.push_back(seg("Side line left", g(-hl, -hw), g(-hl, hw)));
  e.push_back(seg("Side line right", g(hl, -hw), g(hl, hw)));
  e.push_back(seg("Middle line", g(0, -hw), g(0, hw)));
  e.push_back({"Circle central", Arc3{g(0, 0), r, 0.0, kTwoPi}});
  for (int side : {-1, 1}) {
    const std::string s = side < 0 ? "left" : "right";
    const double gl = side * hl;
    e.push_back(seg("Big rect. " + s + " top", g(gl, pa_y), g(side * pa_x, pa_y)));
    e.push_back(seg("Big rect. " + s + " main", g(side * pa_x, -pa_y), g(side * pa_x, pa_y)));
    e.push_back(seg("Big rect. " + s + " bottom", g(gl, -pa_y), g(side * pa_x, -pa_y)));
    e.push_back(seg("Small rect. " + s + " top", g(gl, ga_y), g(side * ga_x, ga_y)));
    e.push_back(seg("Small rect. " + s + " main", g(side * ga_x, -ga_y), g(side * ga_x, ga_y)));
    e.push_back(seg("Small rect. " + s + " bottom", g(gl, -ga_y), g(side * ga_x, -ga_y)));
    const double base = side < 0 ? 0.0 : std::numbers::pi;
    e.push_back({"Circle " + s, Arc3{g(side * pm_x, 0), r, base - arc_half, base + arc_half}});
    // Facing the left goal from the center, the left hand points to -y.
    const double left_post_y = side < 0 ? -gy : gy;
    e.push_back(seg("Goal " + s + " post left", Vec3(gl, left_post_y, 0), Vec3(gl, left_post_y, gh)));
    e.push_back(seg("Goal " + s + " post right", Vec3(gl, -left_post_y, 0), Vec3(gl, -left_post_y, gh)));
    e.push_back(seg("Goal " + s + " crossbar", Vec3(gl, -gy, gh), Vec3(gl, gy, gh)));
  }

  std::vector<PitchMark> marks{{"Center spot", g(0, 0)},
                               {"Penalty mark left", g(-pm_x, 0)},
                               {"Penalty mark right", g(pm_x, 0)}};

  const double arc_y = r * std::sin(arc_half);
  std::vector<std::pair<std::string, Vec3>> kp{
      {"Corner top left", g(-hl, hw)},
      {"Big rect. left top / side line left", g(-hl, pa_y)},
      {"Small rect. left top / side line left", g(-hl, ga_y)},
      {"Goal left post right base", g(-hl, gy)},
      {"Goal left post left base", g(-hl, -gy)},
      {"Small rect. left bottom / side line left", g(-hl, -ga_y)},
      {"Big rect. left bottom / side line left", g(-hl, -pa_y)},
      {"Corner bottom left", g(-hl, -hw)},
      {"Small rect. left top / main", g(-ga_x, ga_y)},
      {"Small rect. left bottom / main", g(-ga_x, -ga_y)},
      {"Penalty mark left", g(-pm_x, 0)},
      {"Big rect. left top / main", g(-pa_x, pa_y)},
      {"Circle left / big rect. left main, top", g(-pa_x, arc_y)},
      {"Circle left / big rect. left main, bottom", g(-pa_x, -arc_y)},
      {"Big rect. left bottom / main", g(-pa_x, -pa_y)},
      {"Middle line / side line top", g(0, hw)},
      {"Middle line / circle central, top", g(0, r)},
      {"Center spot", g(0, 0)},
      {"Middle line / circle central, bottom", g(0, -r)},
      {"Middle line / side line bottom", g(0, -hw)},
      {"Big rect. right top / main", g(pa_x, pa_y)},
      {"Circle right / big rect. right main, top", g(pa_x, arc_y)},
      {"Circle right / big rect. right main, bottom", g(pa_x, -arc_y)},
      {"Big rect. right bottom / main", g(pa_x, -pa_y)},
      {"Penalty mark right", g(pm_x, 0)},
      {"Small rect. right top / main", g(ga_x, ga_y)},
      {"Small rect. right bottom / main", g(ga_x, -ga_y)},
      {"Corner top right", g(hl, hw)},
      {"Big rect. right top / side line right", g(hl, pa_y)},
      {"Small rect. right top / side line right", g(hl, ga_y)},
      {"Goal right post left base", g(hl, gy)},
      {"Goal right post right base", g(hl, -gy)},
      {"Small rect. right bottom / side line right", g(hl, -ga_y)},
      {"Big rect. right bottom / side line right", g(hl, -pa_y)},
      {"Corner bottom right", g(hl, -hw)},
      {"Goal left crossbar / post right", Vec3(-hl, gy, gh)},
      {"Goal left crossbar / post left", Vec3(-hl, -gy, gh)},
      {"Goal right crossbar / post left", Vec3(hl, gy, gh)},
      {"Goal right crossbar / post right", Vec3(hl, -gy, gh)},
  };
  std::vector<PitchKeypoint> keypoints;
  keypoints.reserve(kp.size());
  for (std::size_t i = 0; i < kp.size(); ++i)
    keypoints.push_back({static_cast<int>(i) + 1, kp[i].first, kp[i].second});

  return PitchModel(d, std::move(e), std::move(marks), std::move(keypoints));
}

const std::vector<PitchKeypoint>& keypoint_catalogue(const PitchModel& model) {
  return model.keypoints();
}

std::vector<Vec3> sample_element(const PitchElement& elem, double spacing) {
  if (!(spacing > 0.0)) throw Error("sample_element: spacing must be positive");
  const double len = elem.length();
  // Guard against 8.0000000001 style round-up when spacing divides the length.
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(len / spacing - 1e-9)));
  const bool closed = elem.is_arc() && std::get<Arc3>(elem.geometry).full_circle();
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  const long count = closed ? n : n + 1;
  for (long i = 0; i < count; ++i) {
    if (!closed && i == n) {
      pts.push_back(elem.point_at(1.0));
    } else {
      pts.push_back(elem.point_at(static_cast<double>(i) / static_cast<double>(n)));
    }
  }
  if (const auto* seg = std::get_if<Segment3>(&elem.geometry)) {
    pts.front() = seg->a;
    pts.back() = seg->b;
  }
  return pts;
}

}  // namespace gsr
