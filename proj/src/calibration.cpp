#include "gsr/calibration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gsr/errors.hpp"
#include "gsr/projection.hpp"

namespace gsr {

namespace {

// Residual assigned to observations that cannot be projected (behind the
// camera). Large enough that LM never accepts such a state.
constexpr double kUnprojectable = 1e6;

struct PointTerm {
  int id;
  Vec3 world;
  Vec2 observed;
};

struct LineTerm {
  const PitchElement* element;
  std::vector<Vec2> observed;  // pixels
  std::vector<Vec3> samples;   // world polyline vertices
};

struct Problem {
  std::vector<PointTerm> points;
  std::vector<LineTerm> lines;
  Eigen::Index size = 0;
  std::size_t observations = 0;
};

Problem build_problem(std::span<const KeypointObservation> kps,
                      std::span<const LineObservation> lines, const PitchModel& pitch,
                      ImageSize size, double spacing) {
  Problem pb;
  for (const auto& kp : kps) {
    const auto* ref = pitch.find_keypoint(kp.id);
    if (!ref) continue;
    pb.points.push_back({kp.id, ref->position, Vec2(kp.x, kp.y)});
  }
  for (const auto& line : lines) {
    const auto* elem = pitch.find_element(line.name);
    if (!elem || line.points.empty()) continue;
    LineTerm term{elem, {}, {}};
    for (const auto& p : line.points)
      term.observed.emplace_back(p.x() * size.width, p.y() * size.height);
    term.samples = sample_element(*elem, spacing);
    if (std::get_if<Arc3>(&elem->geometry) && std::get<Arc3>(elem->geometry).full_circle())
      term.samples.push_back(term.samples.front());
    pb.lines.push_back(std::move(term));
  }
  pb.size = 2 * static_cast<Eigen::Index>(pb.points.size());
  pb.observations = pb.points.size();
  for (const auto& l : pb.lines) {
    pb.size += static_cast<Eigen::Index>(l.observed.size());
    pb.observations += l.observed.size();
  }
  return pb;
}

// Projects the world polyline of a line term. A straight element projects to
// a straight segment, so its two endpoints describe the sampled polyline
// exactly whenever both lie in front of the camera.
std::vector<std::vector<Vec2>> project_polyline(const CameraParams& cam, const Mat3& K,
                                                const LineTerm& term) {
  std::vector<std::vector<Vec2>> pieces;
  auto proj = [&](const Vec3& X) -> std::optional<Vec2> {
    const Vec3 u = K * (cam.R * X + cam.t);
    if (!(u.z() > 1e-9)) return std::nullopt;
    return Vec2(u.x() / u.z(), u.y() / u.z());
  };
  if (const auto* seg = std::get_if<Segment3>(&term.element->geometry)) {
    auto a = proj(seg->a);
    auto b = proj(seg->b);
    if (a && b) {
      pieces.push_back({*a, *b});
      return pieces;
    }
  }
  std::vector<Vec2> cur;
  for (const auto& X : term.samples) {
    if (auto p = proj(X)) {
      cur.push_back(*p);
    } else if (!cur.empty()) {
      pieces.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) pieces.push_back(std::move(cur));
  return pieces;
}

// Distance from p to the nearest polyline segment, signed by the side of
// that segment so residuals stay differentiable through zero.
double signed_polyline_distance(const Vec2& p, const std::vector<std::vector<Vec2>>& pieces) {
  double best = std::numeric_limits<double>::infinity();
  double best_signed = kUnprojectable;
  for (const auto& piece : pieces) {
    if (piece.size() == 1) {
      const double d = (p - piece[0]).norm();
      if (d < best) best = d, best_signed = d;
      continue;
    }
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      const Vec2 a = piece[i];
      const Vec2 ab = piece[i + 1] - a;
      const double len2 = ab.squaredNorm();
      double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
      s = std::clamp(s, 0.0, 1.0);
      const Vec2 diff = p - (a + s * ab);
      const double d = diff.norm();
      if (d < best) {
        best = d;
        const double cross = ab.x() * (p.y() - a.y()) - ab.y() * (p.x() - a.x());
        best_signed = cross < 0.0 ? -d : d;
      }
    }
  }
  return best_signed;
}

void evaluate(const CameraParams& cam, const Problem& pb, Eigen::VectorXd& r) {
  r.resize(pb.size);
  const Mat3 K = cam.K();
  Eigen::Index k = 0;
  for (const auto& pt : pb.points) {
    const Vec3 u = K * (cam.R * pt.world + cam.t);
    if (u.z() > 1e-9) {
      r(k) = u.x() / u.z() - pt.observed.x();
      r(k + 1) = u.y() / u.z() - pt.observed.y();
    } else {
      r(k) = r(k + 1) = kUnprojectable;
    }
    k += 2;
  }
  for (const auto& line : pb.lines) {
    const auto pieces = project_polyline(cam, K, line);
    for (const auto& obs : line.observed)
      r(k++) = pieces.empty() ? kUnprojectable : signed_polyline_distance(obs, pieces);
  }
}

double rms_of(const Eigen::VectorXd& r, std::size_t observations) {
  if (observations == 0) return 0.0;
  return std::sqrt(r.squaredNorm() / static_cast<double>(observations));
}

ElementResiduals collect_residuals(const Problem& pb, const Eigen::VectorXd& r) {
  ElementResiduals out;
  Eigen::Index k = 0;
  for (const auto& pt : pb.points) {
    const double d = std::hypot(r(k), r(k + 1));
    auto [it, fresh] = out.keypoints.emplace(pt.id, d);
    if (!fresh) it->second = std::max(it->second, d);
    k += 2;
  }
  for (const auto& line : pb.lines) {
    double worst = 0.0;
    for (std::size_t i = 0; i < line.observed.size(); ++i) worst = std::max(worst, std::abs(r(k++)));
    auto [it, fresh] = out.lines.emplace(line.element->name, worst);
    if (!fresh) it->second = std::max(it->second, worst);
  }
  return out;
}

CameraParams perturbed(const CameraParams& cam, const Eigen::Matrix<double, 7, 1>& delta) {
  CameraParams c = cam;
  c.fx = c.fy = cam.fx + delta(0);
  const Vec3 w = delta.segment<3>(1);
  const double angle = w.norm();
  if (angle > 0.0) c.R = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix() * cam.R;
  c.t = cam.t + delta.segment<3>(4);
  return c;
}

Eigen::MatrixXd numeric_jacobian(const CameraParams& cam, const Problem& pb) {
  Eigen::MatrixXd J(pb.size, 7);
  const double steps[7] = {1e-6 * cam.fx, 1e-6, 1e-6, 1e-6,
                           1e-6 * std::max(1.0, cam.t.norm()), 1e-6 * std::max(1.0, cam.t.norm()),
                           1e-6 * std::max(1.0, cam.t.norm())};
  Eigen::VectorXd rp, rm;
  for (int j = 0; j < 7; ++j) {
    Eigen::Matrix<double, 7, 1> d = Eigen::Matrix<double, 7, 1>::Zero();
    d(j) = steps[j];
    evaluate(perturbed(cam, d), pb, rp);
    d(j) = -steps[j];
    evaluate(perturbed(cam, d), pb, rm);
    J.col(j) = (rp - rm) / (2.0 * steps[j]);
  }
  return J;
}

struct LineFit {
  Vec2 normal;
  double offset;  // normal . p = offset
};

std::optional<LineFit> fit_image_line(const std::vector<Vec2>& pts) {
  if (pts.size() < 2) return std::nullopt;
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  if (!(es.eigenvalues()(1) > 1.0)) return std::nullopt;  // spread below a pixel
  const Vec2 n = es.eigenvectors().col(0);
  return LineFit{n, n.dot(mean)};
}

// Image/world intersections of pairs of observed straight ground lines.
std::vector<PointCorrespondence> line_intersections(std::span<const LineObservation> lines,
                                                    const PitchModel& pitch, ImageSize size) {
  struct Straight {
    Vec2 a, b;
    LineFit fit;
  };
  std::vector<Straight> straight;
  for (const auto& line : lines) {
    const auto* elem = pitch.find_element(line.name);
    if (!elem || !elem->on_ground()) continue;
    const auto* seg = std::get_if<Segment3>(&elem->geometry);
    if (!seg) continue;
    std::vector<Vec2> px;
    for (const auto& p : line.points) px.emplace_back(p.x() * size.width, p.y() * size.height);
    if (auto fit = fit_image_line(px)) straight.push_back({seg->a.head<2>(), seg->b.head<2>(), *fit});
  }
  const double hl = pitch.dims().length / 2 + 10.0;
  const double hw = pitch.dims().width / 2 + 10.0;
  std::vector<PointCorrespondence> out;
  for (std::size_t i = 0; i < straight.size(); ++i) {
    for (std::size_t j = i + 1; j < straight.size(); ++j) {
      const auto& l1 = straight[i];
      const auto& l2 = straight[j];
      const Vec2 d1 = l1.b - l1.a;
      const Vec2 d2 = l2.b - l2.a;
      const double det = d1.x() * d2.y() - d1.y() * d2.x();
      if (std::abs(det) < 1e-9 * d1.norm() * d2.norm()) continue;
      const Vec2 diff = l2.a - l1.a;
      const double s = (diff.x() * d2.y() - diff.y() * d2.x()) / det;
      const Vec2 world = l1.a + s * d1;
      if (std::abs(world.x()) > hl || std::abs(world.y()) > hw) continue;

      Eigen::Matrix2d A;
      A << l1.fit.normal.transpose(), l2.fit.normal.transpose();
      if (std::abs(A.determinant()) < 1e-3) continue;  // nearly parallel in the image
      const Vec2 image = A.inverse() * Vec2(l1.fit.offset, l2.fit.offset);
      if (std::abs(image.x() - size.width / 2.0) > 1.5 * size.width ||
          std::abs(image.y() - size.height / 2.0) > 1.5 * size.height)
        continue;
      out.push_back({world, image});
    }
  }
  return out;
}

}  // namespace

ElementResiduals reprojection_residuals(const CameraParams& cam,
                                        std::span<const KeypointObservation> kps,
                                        std::span<const LineObservation> lines,
                                        const PitchModel& pitch, ImageSize size,
                                        double lineSpacing) {
  const Problem pb = build_problem(kps, lines, pitch, size, lineSpacing);
  Eigen::VectorXd r;
  evaluate(cam, pb, r);
  return collect_residuals(pb, r);
}

bool passes_validity(const CameraParams& cam, double rms, ImageSize size,
                     const ValidityConfig& cfg) {
  if (!is_valid(cam, 1e-6)) return false;
  if (!(rms <= cfg.maxRms * size.width / cfg.referenceWidth)) return false;
  const double ratio = cam.fx / size.width;
  if (ratio < cfg.minFocalRatio || ratio > cfg.maxFocalRatio) return false;
  const double h = cam.center().z();
  return h >= cfg.minHeight && h <= cfg.maxHeight;
}

CalibrationResult refine_pnl(const CameraParams& init, std::span<const KeypointObservation> kps,
                             std::span<const LineObservation> lines, const PitchModel& pitch,
                             ImageSize size, const CalibrationConfig& cfg) {
  const RefineConfig& rc = cfg.refine;
  const Problem pb = build_problem(kps, lines, pitch, size, rc.lineSpacing);

  CameraParams cam = init;
  cam.fy = cam.fx;
  cam.cx = size.width / 2.0;
  cam.cy = size.height / 2.0;
  cam.skew = 0.0;

  CalibrationResult res;
  Eigen::VectorXd r;
  evaluate(cam, pb, r);
  double cost = r.squaredNorm();
  res.initialRmsReprojError = rms_of(r, pb.observations);
  res.costHistory.push_back(cost);

  // A zero-residual problem is already solved; nothing left to decrease.
  const double floor = 1e-24 * std::max<double>(1.0, static_cast<double>(pb.size));
  double lambda = rc.initialDamping;
  bool converged = cost <= floor || pb.size == 0;
  int iter = 0;
  while (!converged && iter < rc.maxIters) {
    ++iter;
    const Eigen::MatrixXd J = numeric_jacobian(cam, pb);
    const Eigen::Matrix<double, 7, 7> A = J.transpose() * J;
    const Eigen::Matrix<double, 7, 1> g = J.transpose() * r;
    Eigen::Matrix<double, 7, 1> diag = A.diagonal();
    const double dmax = diag.maxCoeff();
    for (int i = 0; i < 7; ++i) diag(i) = std::max(diag(i), 1e-12 * dmax);

    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, 7, 7> Ad = A;
      Ad.diagonal() += lambda * diag;
      const Eigen::Matrix<double, 7, 1> delta = Ad.ldlt().solve(-g);
      const CameraParams trial = perturbed(cam, delta);
      Eigen::VectorXd rt;
      evaluate(trial, pb, rt);
      const double trial_cost = rt.squaredNorm();
      if (delta.allFinite() && trial.fx > 0.0 && trial_cost < cost) {
        const double rel = (cost - trial_cost) / cost;
        cam = trial;
        r = std::move(rt);
        cost = trial_cost;
        res.costHistory.push_back(cost);
        lambda = std::max(lambda / rc.dampingFactor, 1e-12);
        accepted = true;
        if (rel < rc.relativeTolerance || cost <= floor) converged = true;
      } else {
        lambda *= rc.dampingFactor;
        if (lambda > 1e16) {
          // No descent direction left at machine precision: stationary point.
          converged = true;
          break;
        }
      }
    }
  }

  res.params = cam;
  res.params.R = nearest_rotation(cam.R);
  evaluate(res.params, pb, r);
  res.rmsReprojError = rms_of(r, pb.observations);
  res.perElementResiduals = collect_residuals(pb, r);
  res.iterations = iter;
  res.converged = converged;
  res.valid = passes_validity(res.params, res.rmsReprojError, size, cfg.validity);
  return res;
}

std::optional<CalibrationResult> calibrate_frame(std::span<const KeypointObservation> kps,
                                                 std::span<const LineObservation> lines,
                                                 const PitchModel& pitch, ImageSize size,
                                                 const CalibrationConfig& cfg) {
  std::vector<KeypointObservation> kept;
  for (const auto& kp : kps) {
    if (kp.p >= cfg.minConfidence && pitch.find_keypoint(kp.id)) kept.push_back(kp);
  }
  std::vector<LineObservation> kept_lines;
  for (const auto& l : lines) {
    if (pitch.find_element(l.name) && !l.points.empty()) kept_lines.push_back(l);
  }

  std::vector<PointCorrespondence> pairs;
  for (const auto& kp : kept) {
    const Vec3& X = pitch.find_keypoint(kp.id)->position;
    if (X.z() == 0.0) pairs.push_back({X.head<2>(), Vec2(kp.x, kp.y)});
  }
  if (static_cast<int>(pairs.size()) < cfg.minKeypointsBeforeLines) {
    for (const auto& c : line_intersections(kept_lines, pitch, size)) {
      const bool dup = std::any_of(pairs.begin(), pairs.end(), [&](const PointCorrespondence& p) {
        return (p.world - c.world).norm() < 1e-6;
      });
      if (!dup) pairs.push_back(c);
    }
  }
  if (pairs.size() < 4) return std::nullopt;

  CameraParams init;
  try {
    const Mat3 H = estimate_homography_dlt(pairs);
    try {
      init = decompose_homography(H, size.width, size.height);
    } catch (const NoValidFocal&) {
      // Focal not observable from H alone: scan plausible focals and keep the
      // pose that best explains the observations.
      const Problem pb = build_problem(kept, kept_lines, pitch, size, cfg.refine.lineSpacing);
      double best = std::numeric_limits<double>::infinity();
      bool found = false;
      Eigen::VectorXd r;
      for (int i = 0; i <= 40; ++i) {
        const double f = size.width * cfg.validity.minFocalRatio *
                         std::pow(cfg.validity.maxFocalRatio / cfg.validity.minFocalRatio, i / 40.0);
        try {
          CameraParams cand = pose_from_homography(H, f, size.width, size.height);
          evaluate(cand, pb, r);
          if (r.squaredNorm() < best) best = r.squaredNorm(), init = cand, found = true;
        } catch (const Error&) {
        }
      }
      if (!found) return std::nullopt;
    }
  } catch (const Error&) {
    return std::nullopt;
  }

  CalibrationResult res = refine_pnl(init, kept, kept_lines, pitch, size, cfg);
  if (!res.valid) return std::nullopt;
  return res;
}

}  // namespace gsr
