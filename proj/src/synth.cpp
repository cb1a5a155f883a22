#include "gsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gsr/errors.hpp"

namespace gsr {

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double gauss(Rng& rng, double sigma) {
  return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
}

Eigen::VectorXd random_unit(Rng& rng, int dims) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(dims);
  for (int k = 0; k < dims; ++k) v(k) = n(rng);
  return v.normalized();
}

// Enough spread that the points pin down a homography: the second principal
// extent must not vanish.
bool well_spread(const std::vector<Vec2>& pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  return std::sqrt(std::max(0.0, es.eigenvalues()(0))) > 2.0;
}

}  // namespace

void validate(const NoiseModel& n) {
  if (n.keypointSigma < 0 || n.embeddingNoiseSigma < 0 || n.bboxJitter < 0 || n.falsePositiveRate < 0)
    throw Error("noise sigmas and rates must be non-negative");
  if (!(n.detectionDropout >= 0.0 && n.detectionDropout <= 1.0))
    throw Error("dropout must lie in [0, 1]");
}

CameraParams sample_main_camera(Rng& rng, ImageSize size, const PitchModel& pitch, int minKeypoints) {
  const auto& dims = pitch.dims();
  for (;;) {
    const Vec3 C(uniform(rng, -10, 10), uniform(rng, -90, -40), uniform(rng, 8, 30));
    const Vec3 target(uniform(rng, -0.45, 0.45) * dims.length, uniform(rng, -0.3, 0.3) * dims.width, 0.0);
    const double hfov = uniform(rng, 15.0, 60.0) * std::numbers::pi / 180.0;
    const double focal = size.width / 2.0 / std::tan(hfov / 2.0);
    const Vec3 d = target - C;
    const double pan = std::atan2(d.x(), d.y());
    const double tilt = std::atan2(d.z(), std::hypot(d.x(), d.y()));
    const double roll = uniform(rng, -1.0, 1.0) * std::numbers::pi / 180.0;
    CameraParams cam = make_camera(C, pan, tilt, roll, focal, size);

    std::vector<Vec2> seen;
    for (const auto& kp : keypoint_catalogue(pitch)) {
      if (kp.position.z() != 0.0) continue;
      auto p = project_point(cam, kp.position);
      if (p && in_frame(*p, size)) seen.push_back(kp.position.head<2>());
    }
    if (static_cast<int>(seen.size()) >= minKeypoints && well_spread(seen)) return cam;
  }
}

SyntheticScene simulate_match(Rng& rng, const SimulationConfig& cfg) {
  if (cfg.nFrames < 1) throw Error("nFrames must be at least 1");
  if (cfg.nPlayers < 0 || cfg.nReferees < 0) throw Error("athlete counts must be non-negative");
  validate(cfg.dims);
  const PitchModel pitch = build_pitch(cfg.dims);

  SyntheticScene scene;
  scene.size = cfg.size;
  scene.dt = cfg.dt;
  scene.dims = cfg.dims;

  // Identities: two squads, goalkeeper first, then referees.
  const int per_team[2] = {(cfg.nPlayers + 1) / 2, cfg.nPlayers / 2};
  int next_id = 1;
  for (int t = 0; t < 2; ++t) {
    std::vector<int> numbers;
    for (int k = 2; k <= 99; ++k) numbers.push_back(k);
    std::shuffle(numbers.begin(), numbers.end(), rng);
    for (int i = 0; i < per_team[t]; ++i) {
      SyntheticIdentity id;
      id.trackId = next_id++;
      id.role = i == 0 ? Role::goalkeeper : Role::player;
      id.team = t == 0 ? Team::left : Team::right;
      id.jersey = i == 0 ? 1 : numbers[i - 1];
      scene.identities.push_back(id);
    }
  }
  for (int i = 0; i < cfg.nReferees; ++i) {
    SyntheticIdentity id;
    id.trackId = next_id++;
    id.role = Role::referee;
    scene.identities.push_back(id);
  }
  for (std::size_t i = 0; i < scene.identities.size(); ++i) {
    Eigen::VectorXd c;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100000) throw Error("cannot separate embedding centroids; raise the dimension");
      c = random_unit(rng, cfg.embeddingDims);
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = c.dot(scene.identities[j].centroid) < cfg.maxCentroidCosine;
      if (ok) break;
    }
    scene.identities[i].centroid = c;
  }

  // Motion bounds.
  PitchRegion b{-cfg.dims.length / 2 - cfg.margin, cfg.dims.length / 2 + cfg.margin,
                -cfg.dims.width / 2 - cfg.margin, cfg.dims.width / 2 + cfg.margin};
  if (cfg.region) {
    b = {std::max(b.xmin, cfg.region->xmin), std::min(b.xmax, cfg.region->xmax),
         std::max(b.ymin, cfg.region->ymin), std::min(b.ymax, cfg.region->ymax)};
    if (!(b.xmin < b.xmax && b.ymin < b.ymax)) throw Error("athlete region is empty");
  }
  const double xmid = (b.xmin + b.xmax) / 2;
  const double span = b.xmax - b.xmin;

  const std::size_t n = scene.identities.size();
  std::vector<PitchPosition> pos(n);
  std::vector<Vec2> vel(n, Vec2::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = scene.identities[i];
    double lo = b.xmin, hi = b.xmax;
    if (id.team == Team::left) hi = xmid;
    if (id.team == Team::right) lo = xmid;
    if (id.role == Role::goalkeeper) {
      if (id.team == Team::left) hi = b.xmin + 0.15 * span;
      else lo = b.xmax - 0.15 * span;
    }
    pos[i] = {uniform(rng, lo, hi), uniform(rng, b.ymin, b.ymax)};
  }

  CameraParams base = cfg.camera ? *cfg.camera : sample_main_camera(rng, cfg.size, pitch);
  // Recover the base orientation for the motion model.
  const Vec3 axis = base.R.row(2).transpose();
  const double pan0 = std::atan2(axis.x(), axis.y());
  const double tilt0 = std::asin(std::clamp(axis.z(), -1.0, 1.0));
  const Mat3 R0 = rotation_from_pan_tilt_roll(pan0, tilt0, 0.0);
  const Mat3 roll_part = base.R * R0.transpose();
  const Vec3 center = base.center();

  auto wave = [&](double maxRate, double cap) {
    const double w = uniform(rng, 0.1, 0.4);
    const double amp = std::min(cap, maxRate / w * uniform(rng, 0.3, 1.0));
    return std::array<double, 3>{amp, w, uniform(rng, 0.0, 2 * std::numbers::pi)};
  };
  const auto pan_w = wave(cfg.maxAngularRate, 0.3);
  const auto tilt_w = wave(cfg.maxAngularRate * 0.2, 0.05);
  const auto zoom_w = wave(cfg.maxZoomRate, 0.2);

  for (int f = 0; f < cfg.nFrames; ++f) {
    if (f > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        Vec2& v = vel[i];
        for (int k = 0; k < 2; ++k) v(k) += -cfg.ouTheta * v(k) * cfg.dt + gauss(rng, cfg.ouSigma * std::sqrt(cfg.dt));
        if (v.norm() > cfg.vmax) v *= cfg.vmax / v.norm();
        double x = pos[i].x + v.x() * cfg.dt;
        double y = pos[i].y + v.y() * cfg.dt;
        if (x < b.xmin) { x = 2 * b.xmin - x; v.x() = -v.x(); }
        if (x > b.xmax) { x = 2 * b.xmax - x; v.x() = -v.x(); }
        if (y < b.ymin) { y = 2 * b.ymin - y; v.y() = -v.y(); }
        if (y > b.ymax) { y = 2 * b.ymax - y; v.y() = -v.y(); }
        pos[i] = {std::clamp(x, b.xmin, b.xmax), std::clamp(y, b.ymin, b.ymax)};
      }
    }
    scene.positions.push_back(pos);

    if (!cfg.moveCamera || f == 0) {
      scene.cameraTrajectory.push_back(base);
      continue;
    }
    const double t = f * cfg.dt;
    auto offset = [&](const std::array<double, 3>& w) {
      return w[0] * (std::sin(w[1] * t + w[2]) - std::sin(w[2]));
    };
    CameraParams cam = base;
    cam.R = roll_part * rotation_from_pan_tilt_roll(pan0 + offset(pan_w), tilt0 + offset(tilt_w), 0.0);
    cam.t = -cam.R * center;
    cam.fx = cam.fy = base.fx * std::exp(offset(zoom_w));
    scene.cameraTrajectory.push_back(cam);
  }
  return scene;
}

std::optional<BBox> athlete_box(const CameraParams& cam, const PitchPosition& pos) {
  auto foot = project_point(cam, Vec3(pos.x, pos.y, 0.0));
  auto head = project_point(cam, Vec3(pos.x, pos.y, kBodyHeight));
  if (!foot || !head) return std::nullopt;
  const double h = (*foot - *head).norm();
  const double w = 0.4 * h;
  return BBox{foot->x() - w / 2, foot->y() - h, w, h};
}

std::vector<FrameObservation> render_observations(const SyntheticScene& scene, const NoiseModel& noise,
                                                  Rng& rng, const RenderConfig& cfg) {
  validate(noise);
  const PitchModel pitch = build_pitch(scene.dims);
  const ImageSize size = scene.size;
  std::vector<FrameObservation> out;
  out.reserve(scene.cameraTrajectory.size());

  for (int f = 0; f < scene.frames(); ++f) {
    const CameraParams& cam = scene.cameraTrajectory[f];
    FrameObservation obs;
    FrameAnnotation& gt = obs.groundTruth;
    gt.camera = cam;
    gt.validCamParams = true;

    ProjectedAnnotations proj;
    if (cfg.renderLines) {
      proj = project_pitch(cam, pitch, size, cfg.lineSpacing);
    } else {
      for (const auto& kp : keypoint_catalogue(pitch))
        if (auto p = project_point(cam, kp.position); p && in_frame(*p, size)) proj.keypoints[kp.id] = *p;
    }
    for (const auto& [id, p] : proj.keypoints) {
      gt.keypoints[id] = {p.x(), p.y(), 1.0};
      const Vec2 q(p.x() + gauss(rng, noise.keypointSigma), p.y() + gauss(rng, noise.keypointSigma));
      if (in_frame(q, size)) obs.keypoints.push_back({id, q.x(), q.y(), 1.0});
    }
    gt.lines = proj.lines;
    for (const auto& [name, pts] : proj.lines) {
      LineObservation line{name, {}};
      for (const auto& p : pts) {
        const double x = p.x() + gauss(rng, noise.keypointSigma) / size.width;
        const double y = p.y() + gauss(rng, noise.keypointSigma) / size.height;
        line.points.emplace_back(std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0));
      }
      obs.lines.push_back(std::move(line));
    }

    for (std::size_t i = 0; i < scene.identities.size(); ++i) {
      const auto& id = scene.identities[i];
      const PitchPosition& p = scene.positions[f][i];
      auto box = athlete_box(cam, p);
      if (!box) continue;
      const Vec2 foot(box->center_x(), box->bottom());
      if (!in_frame(foot, size)) continue;

      AthleteRecord rec;
      rec.bbox = *box;
      rec.trackId = id.trackId;
      rec.jerseyNumber = id.jersey;
      rec.legibilityScore = 1.0;
      rec.role = std::string(to_string(id.role));
      rec.team = id.team;
      gt.athletes.push_back(rec);

      if (noise.detectionDropout > 0.0 && uniform(rng, 0.0, 1.0) < noise.detectionDropout) continue;
      AthleteDetection d;
      d.bbox = *box;
      if (noise.bboxJitter > 0.0) {
        d.bbox.left += gauss(rng, noise.bboxJitter);
        d.bbox.top += gauss(rng, noise.bboxJitter);
        d.bbox.width = std::max(1.0, d.bbox.width + gauss(rng, noise.bboxJitter));
        d.bbox.height = std::max(1.0, d.bbox.height + gauss(rng, noise.bboxJitter));
      }
      d.role = id.role;
      d.jerseyNumber = id.jersey;
      d.legibilityScore = 1.0;
      Eigen::VectorXd e = id.centroid;
      if (noise.embeddingNoiseSigma > 0.0) {
        for (Eigen::Index k = 0; k < e.size(); ++k) e(k) += gauss(rng, noise.embeddingNoiseSigma);
        e.normalize();
      }
      d.embedding = e;
      obs.detections.push_back(std::move(d));
      obs.detectionIdentity.push_back(static_cast<int>(i));
    }

    if (noise.falsePositiveRate > 0.0) {
      const int count = std::poisson_distribution<int>(noise.falsePositiveRate)(rng);
      const int dims = scene.identities.empty() ? 128 : static_cast<int>(scene.identities[0].centroid.size());
      for (int k = 0; k < count; ++k) {
        AthleteDetection d;
        const double h = uniform(rng, 30.0, 120.0);
        const double w = 0.4 * h;
        d.bbox = {uniform(rng, 0.0, size.width - w), uniform(rng, 0.0, size.height - h), w, h};
        d.role = Role::player;
        d.legibilityScore = 0.0;
        d.confidence = uniform(rng, 0.3, 1.0);
        d.embedding = random_unit(rng, dims);
        obs.detections.push_back(std::move(d));
        obs.detectionIdentity.push_back(-1);
      }
    }
    out.push_back(std::move(obs));
  }
  return out;
}

FrameAnnotation observation_annotation(const FrameObservation& obs, ImageSize size) {
  FrameAnnotation a;
  for (const auto& d : obs.detections) {
    AthleteRecord r;
    r.bbox = d.bbox;
    r.jerseyNumber = d.jerseyNumber;
    r.legibilityScore = d.legibilityScore;
    r.role = std::string(to_string(d.role));
    r.confidence = d.confidence;
    a.athletes.push_back(r);
  }
  for (const auto& k : obs.keypoints) a.keypoints[k.id] = {k.x, k.y, k.p};
  (void)size;
  for (const auto& l : obs.lines) a.lines[l.name] = l.points;
  return a;
}

}  // namespace gsr
