#include "gsr/projection.hpp"

#include <cmath>

namespace gsr {

std::optional<Vec2> project_point(const CameraParams& cam, const Vec3& X) {
  const Vec3 xc = cam.R * X + cam.t;
  if (!(xc.z() > 0.0)) return std::nullopt;
  const Vec3 u = cam.K() * xc;
  return Vec2(u.x() / u.z(), u.y() / u.z());
}

bool in_frame(const Vec2& p, ImageSize size) {
  return p.x() >= 0.0 && p.x() < size.width && p.y() >= 0.0 && p.y() < size.height;
}

namespace {

bool in_closed_frame(const Vec2& p, ImageSize size) {
  return p.x() >= 0.0 && p.x() <= size.width && p.y() >= 0.0 && p.y() <= size.height;
}

struct Sample {
  double s;
  std::optional<Vec2> px;
  bool inside;
};

Sample evaluate(const CameraParams& cam, const PitchElement& elem, ImageSize size, double s) {
  auto px = project_point(cam, elem.point_at(s));
  const bool inside = px && in_closed_frame(*px, size);
  return {s, px, inside};
}

// Snap a point that sits within rounding distance of the frame onto the
// nearest border line.
Vec2 snap_to_border(Vec2 p, ImageSize size) {
  const double w = size.width;
  const double h = size.height;
  const double d[4] = {std::abs(p.x()), std::abs(w - p.x()), std::abs(p.y()), std::abs(h - p.y())};
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (d[i] < d[best]) best = i;
  switch (best) {
    case 0: p.x() = 0.0; break;
    case 1: p.x() = w; break;
    case 2: p.y() = 0.0; break;
    default: p.y() = h; break;
  }
  return p;
}

// Bisects the curve parameter between an inside and an outside sample.
Vec2 boundary_crossing(const CameraParams& cam, const PitchElement& elem, ImageSize size,
                       Sample in, Sample out) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (in.s + out.s);
    if (mid == in.s || mid == out.s) break;
    Sample m = evaluate(cam, elem, size, mid);
    if (m.inside) {
      in = m;
    } else {
      out = m;
    }
  }
  return snap_to_border(*in.px, size);
}

}  // namespace

std::vector<std::vector<Vec2>> project_element(const CameraParams& cam, const PitchElement& elem,
                                               ImageSize size, double spacing) {
  const auto n = std::max<long>(
      1, static_cast<long>(std::ceil(elem.length() / spacing - 1e-9)));
  const bool closed = elem.is_arc() && std::get<Arc3>(elem.geometry).full_circle();

  std::vector<std::vector<Vec2>> pieces;
  std::vector<Vec2> current;
  Sample prev = evaluate(cam, elem, size, 0.0);
  if (prev.inside) current.push_back(*prev.px);
  for (long i = 1; i <= n; ++i) {
    Sample cur = evaluate(cam, elem, size, static_cast<double>(i) / static_cast<double>(n));
    if (prev.inside && cur.inside) {
      current.push_back(*cur.px);
    } else if (prev.inside && !cur.inside) {
      current.push_back(boundary_crossing(cam, elem, size, prev, cur));
      pieces.push_back(std::move(current));
      current.clear();
    } else if (!prev.inside && cur.inside) {
      current.push_back(boundary_crossing(cam, elem, size, cur, prev));
      current.push_back(*cur.px);
    }
    prev = cur;
  }
  if (!current.empty()) pieces.push_back(std::move(current));

  if (closed && pieces.size() >= 2 && evaluate(cam, elem, size, 0.0).inside) {
    // The last piece runs into s = 1, which is the same point as s = 0.
    auto& last = pieces.back();
    last.pop_back();
    last.insert(last.end(), pieces.front().begin(), pieces.front().end());
    pieces.front() = std::move(last);
    pieces.pop_back();
  } else if (closed && pieces.size() == 1 && pieces.front().size() == static_cast<std::size_t>(n) + 1) {
    pieces.front().pop_back();
  }
  // A single boundary-touching point carries no line information.
  std::erase_if(pieces, [](const auto& p) { return p.size() < 2; });
  return pieces;
}

ProjectedAnnotations project_pitch(const CameraParams& cam, const PitchModel& pitch,
                                   ImageSize size, double spacing) {
  ProjectedAnnotations out;
  for (const auto& kp : pitch.keypoints()) {
    auto px = project_point(cam, kp.position);
    if (px && in_frame(*px, size)) out.keypoints.emplace(kp.id, *px);
  }
  for (const auto& elem : pitch.elements()) {
    auto pieces = project_element(cam, elem, size, spacing);
    if (pieces.empty()) continue;
    std::vector<Vec2> pts;
    for (const auto& piece : pieces)
      for (const auto& p : piece) pts.emplace_back(p.x() / size.width, p.y() / size.height);
    out.lines.emplace(elem.name, std::move(pts));
  }
  return out;
}

std::optional<PitchPosition> image_to_pitch(const CameraParams& cam, const Vec2& p) {
  const Vec3 ray = cam.R.transpose() * cam.K().inverse() * Vec3(p.x(), p.y(), 1.0);
  const Vec3 c = cam.center();
  if (std::abs(ray.z()) <= 1e-12 * ray.norm()) return std::nullopt;
  const double lambda = -c.z() / ray.z();
  if (!(lambda > 0.0)) return std::nullopt;
  const Vec3 g = c + lambda * ray;
  return PitchPosition{g.x(), g.y()};
}

std::optional<PitchPosition> athlete_pitch_position(const CameraParams& cam, const BBox& box) {
  return image_to_pitch(cam, Vec2(box.left + box.width / 2, box.top + box.height));
}

}  // namespace gsr
