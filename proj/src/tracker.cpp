#include "gsr/tracker.hpp"

#include <algorithm>
#include <limits>

#include "gsr/assignment.hpp"
#include "gsr/errors.hpp"

namespace gsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool live_for_appearance(const Track& t) {
  return (t.state == TrackState::confirmed || t.state == TrackState::lost) &&
         t.appearance.size() > 0;
}

}  // namespace

void validate(const TrackerConfig& cfg) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(cfg.lambdaAppearance) || !unit(cfg.iouGate) || !unit(cfg.emaAlpha))
    throw Error("tracker weights must lie in [0, 1]");
  if (!(cfg.gatingMahalanobis > 0.0) || !(cfg.maxCosineDistance >= 0.0))
    throw Error("tracker gates must be positive");
  if (cfg.maxAge < 1 || cfg.nInit < 1) throw Error("maxAge and nInit must be positive");
}

BBox kalman_predict(Track& track, const BoxKalmanFilter& kf) {
  kf.predict(track.motion);
  return BoxKalmanFilter::to_bbox(track.motion.mean);
}

AssociationResult associate(std::span<const Track> tracks,
                            std::span<const AthleteDetection> detections,
                            const TrackerConfig& cfg, const BoxKalmanFilter& kf) {
  AssociationResult out;
  std::vector<char> track_done(tracks.size(), 0);
  std::vector<char> det_done(detections.size(), 0);

  // Stage 1: appearance + motion.
  std::vector<int> t1, d1;
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (live_for_appearance(tracks[i])) t1.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < detections.size(); ++j)
    if (detections[j].embedding) d1.push_back(static_cast<int>(j));
  if (!t1.empty() && !d1.empty()) {
    Eigen::MatrixXd cost(t1.size(), d1.size());
    for (std::size_t a = 0; a < t1.size(); ++a) {
      const Track& tr = tracks[t1[a]];
      for (std::size_t b = 0; b < d1.size(); ++b) {
        const AthleteDetection& det = detections[d1[b]];
        const double cos_dist = 1.0 - tr.appearance.dot(*det.embedding);
        const double maha =
            kf.gating_distance(tr.motion, BoxKalmanFilter::to_measurement(det.bbox));
        if (maha > cfg.gatingMahalanobis || cos_dist > cfg.maxCosineDistance) {
          cost(a, b) = kInf;
        } else {
          cost(a, b) = cfg.lambdaAppearance * cos_dist +
                       (1.0 - cfg.lambdaAppearance) * (maha / cfg.gatingMahalanobis);
        }
      }
    }
    for (auto [a, b] : solve_assignment(cost).matches) {
      out.matches.emplace_back(t1[a], d1[b]);
      track_done[t1[a]] = 1;
      det_done[d1[b]] = 1;
    }
  }

  // Stage 2: IoU for tentative tracks, tracks that have no appearance yet,
  // and tracks that were still matched on the previous frame.
  std::vector<int> t2, d2;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (track_done[i] || tracks[i].state == TrackState::removed) continue;
    const Track& tr = tracks[i];
    if (tr.state == TrackState::tentative || tr.appearance.size() == 0 || tr.timeSinceUpdate <= 1)
      t2.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < detections.size(); ++j)
    if (!det_done[j]) d2.push_back(static_cast<int>(j));
  if (!t2.empty() && !d2.empty()) {
    Eigen::MatrixXd cost(t2.size(), d2.size());
    for (std::size_t a = 0; a < t2.size(); ++a) {
      const BBox pred = BoxKalmanFilter::to_bbox(tracks[t2[a]].motion.mean);
      for (std::size_t b = 0; b < d2.size(); ++b) {
        const double o = iou(pred, detections[d2[b]].bbox);
        cost(a, b) = o >= cfg.iouGate ? 1.0 - o : kInf;
      }
    }
    for (auto [a, b] : solve_assignment(cost).matches) {
      out.matches.emplace_back(t2[a], d2[b]);
      track_done[t2[a]] = 1;
      det_done[d2[b]] = 1;
    }
  }

  std::sort(out.matches.begin(), out.matches.end());
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (!track_done[i]) out.unmatchedTracks.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < detections.size(); ++j)
    if (!det_done[j]) out.unmatchedDetections.push_back(static_cast<int>(j));
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { validate(cfg_); }

std::vector<std::pair<int, int>> Tracker::step(std::span<const AthleteDetection> detections) {
  ++frame_;
  for (auto& tr : tracks_) {
    kalman_predict(tr, kf_);
    ++tr.timeSinceUpdate;
  }

  const AssociationResult assoc = associate(tracks_, detections, cfg_, kf_);
  std::vector<std::pair<int, int>> out;

  for (auto [ti, di] : assoc.matches) {
    Track& tr = tracks_[ti];
    const AthleteDetection& det = detections[di];
    kf_.update(tr.motion, BoxKalmanFilter::to_measurement(det.bbox));
    if (det.embedding) {
      if (tr.appearance.size() == 0) {
        tr.appearance = det.embedding->normalized();
      } else {
        tr.appearance = (cfg_.emaAlpha * tr.appearance + (1.0 - cfg_.emaAlpha) * *det.embedding)
                            .normalized();
      }
    }
    ++tr.hits;
    tr.timeSinceUpdate = 0;
    tr.history[frame_] = di;
    if (tr.state == TrackState::lost) tr.state = TrackState::confirmed;
    if (tr.state == TrackState::tentative && tr.hits >= cfg_.nInit) tr.state = TrackState::confirmed;
    out.emplace_back(di, tr.trackId);
  }

  for (int ti : assoc.unmatchedTracks) {
    Track& tr = tracks_[ti];
    if (tr.state == TrackState::tentative) {
      tr.state = TrackState::removed;
    } else if (tr.timeSinceUpdate > cfg_.maxAge) {
      tr.state = TrackState::removed;
    } else {
      tr.state = TrackState::lost;
    }
  }
  std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::removed; });

  for (int di : assoc.unmatchedDetections) {
    const AthleteDetection& det = detections[di];
    Track tr;
    tr.trackId = next_id_++;
    tr.state = cfg_.nInit <= 1 ? TrackState::confirmed : TrackState::tentative;
    tr.motion = kf_.initiate(BoxKalmanFilter::to_measurement(det.bbox));
    if (det.embedding) tr.appearance = det.embedding->normalized();
    tr.hits = 1;
    tr.history[frame_] = di;
    tracks_.push_back(std::move(tr));
    out.emplace_back(di, tracks_.back().trackId);
  }

  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Tracklet> run_sequence(const std::vector<std::vector<AthleteDetection>>& frames,
                                   const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  std::map<int, Tracklet> by_id;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (auto [di, id] : tracker.step(frames[f])) {
      Tracklet& tl = by_id[id];
      tl.trackId = id;
      tl.entries.push_back({static_cast<int>(f), di, frames[f][di]});
    }
  }
  std::vector<Tracklet> out;
  out.reserve(by_id.size());
  for (auto& [id, tl] : by_id) out.push_back(std::move(tl));
  return out;
}

}  // namespace gsr
