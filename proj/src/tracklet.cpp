#include "gsr/tracklet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

#include "gsr/errors.hpp"
#include "gsr/projection.hpp"

namespace gsr {

std::vector<AthleteDetection> filter_legibility(std::vector<AthleteDetection> dets,
                                                double threshold) {
  for (auto& d : dets)
    if (d.legibilityScore < threshold) d.jerseyNumber.reset();
  return dets;
}

namespace {

struct Tally {
  int count = 0;
  double confidence = 0.0;
};

// Highest count, then highest confidence, then smallest key.
template <typename Key>
std::optional<Key> winner(const std::map<Key, Tally>& tallies) {
  std::optional<Key> best;
  Tally bt;
  for (const auto& [key, t] : tallies) {
    if (!best || t.count > bt.count || (t.count == bt.count && t.confidence > bt.confidence)) {
      best = key;
      bt = t;
    }
  }
  return best;
}

}  // namespace

VotedAttributes vote_attributes(const Tracklet& tracklet) {
  if (tracklet.entries.empty()) throw Error("vote_attributes: empty tracklet");
  std::map<int, Tally> jerseys;
  std::map<Role, Tally> roles;
  for (const auto& e : tracklet.entries) {
    const auto& d = e.detection;
    if (d.jerseyNumber) {
      auto& t = jerseys[*d.jerseyNumber];
      ++t.count;
      t.confidence += d.confidence;
    }
    if (d.role != Role::unknown) {
      auto& t = roles[d.role];
      ++t.count;
      t.confidence += d.confidence;
    }
  }
  VotedAttributes out;
  out.jersey = winner(jerseys);
  out.role = winner(roles).value_or(Role::unknown);
  return out;
}

Eigen::VectorXd mean_embedding(const Tracklet& tracklet) {
  Eigen::VectorXd sum;
  for (const auto& e : tracklet.entries) {
    if (!e.detection.embedding) continue;
    if (sum.size() == 0) {
      sum = *e.detection.embedding;
    } else {
      sum += *e.detection.embedding;
    }
  }
  if (sum.size() == 0 || !(sum.norm() > 0.0)) return {};
  return sum.normalized();
}

void refresh_attributes(Tracklet& tracklet) {
  const auto v = vote_attributes(tracklet);
  tracklet.votedRole = v.role;
  tracklet.votedJersey = v.jersey;
  tracklet.meanEmbedding = mean_embedding(tracklet);
}

namespace {

double cosine(const Tracklet& a, const Tracklet& b) {
  if (a.meanEmbedding.size() == 0 || a.meanEmbedding.size() != b.meanEmbedding.size())
    return -std::numeric_limits<double>::infinity();
  return a.meanEmbedding.dot(b.meanEmbedding);
}

}  // namespace

bool mergeable(const Tracklet& a, const Tracklet& b, const MergeConfig& cfg) {
  if (a.entries.empty() || b.entries.empty()) return false;
  const Tracklet& early = a.first_frame() <= b.first_frame() ? a : b;
  const Tracklet& late = &early == &a ? b : a;
  if (early.last_frame() >= late.first_frame()) return false;
  if (late.first_frame() - early.last_frame() > cfg.maxGap) return false;
  if (cosine(a, b) < cfg.cosineMin) return false;
  if (cfg.requireJerseyConsistency && a.votedJersey && b.votedJersey &&
      *a.votedJersey != *b.votedJersey)
    return false;
  return true;
}

std::vector<Tracklet> merge_tracklets(std::vector<Tracklet> tracklets, const MergeConfig& cfg) {
  std::erase_if(tracklets, [](const Tracklet& t) { return t.entries.empty(); });
  for (auto& t : tracklets) refresh_attributes(t);
  std::sort(tracklets.begin(), tracklets.end(),
            [](const Tracklet& x, const Tracklet& y) { return x.trackId < y.trackId; });

  while (true) {
    // Most similar admissible pair; ties broken by index order.
    int bi = -1, bj = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
      for (std::size_t j = i + 1; j < tracklets.size(); ++j) {
        if (!mergeable(tracklets[i], tracklets[j], cfg)) continue;
        const double c = cosine(tracklets[i], tracklets[j]);
        if (c > best) {
          best = c;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi < 0) break;
    Tracklet& keep = tracklets[bi];
    Tracklet& gone = tracklets[bj];
    keep.entries.insert(keep.entries.end(), gone.entries.begin(), gone.entries.end());
    std::sort(keep.entries.begin(), keep.entries.end(),
              [](const TrackletEntry& x, const TrackletEntry& y) { return x.frame < y.frame; });
    keep.trackId = std::min(keep.trackId, gone.trackId);
    refresh_attributes(keep);
    tracklets.erase(tracklets.begin() + bj);
  }
  std::sort(tracklets.begin(), tracklets.end(),
            [](const Tracklet& x, const Tracklet& y) { return x.trackId < y.trackId; });
  return tracklets;
}

namespace {

struct KMeansResult {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansResult kmeans2(const std::vector<Eigen::VectorXd>& x, std::mt19937_64& rng, int max_iter) {
  const std::size_t n = x.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<Eigen::VectorXd> c(2);
  c[0] = x[pick(rng)];
  // k-means++: second center drawn proportionally to squared distance.
  std::vector<double> d2(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += d2[i] = (x[i] - c[0]).squaredNorm();
  if (total > 0.0) {
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t k = 0;
    for (; k + 1 < n; ++k) {
      r -= d2[k];
      if (r <= 0.0 && d2[k] > 0.0) break;
    }
    c[1] = x[k];
  } else {
    c[1] = x[pick(rng)];
  }

  KMeansResult res;
  res.labels.assign(n, 0);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = (x[i] - c[1]).squaredNorm() < (x[i] - c[0]).squaredNorm() ? 1 : 0;
      if (l != res.labels[i]) changed = true;
      res.labels[i] = l;
    }
    if (!changed) break;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(x[0].size());
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (res.labels[i] == k) sum += x[i], ++cnt;
      if (cnt > 0) c[k] = sum / cnt;
    }
  }
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) res.inertia += (x[i] - c[res.labels[i]]).squaredNorm();
  return res;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<Tracklet> assign_teams(std::vector<Tracklet> tracklets,
                                   const std::map<int, CameraParams>& calibrations,
                                   const TeamConfig& cfg) {
  for (auto& t : tracklets) {
    if (!t.entries.empty()) refresh_attributes(t);
    t.team.reset();
  }

  // Per-tracklet ground positions from every calibrated frame.
  std::vector<std::vector<PitchPosition>> positions(tracklets.size());
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    for (const auto& e : tracklets[i].entries) {
      auto cam = calibrations.find(e.frame);
      if (cam == calibrations.end()) continue;
      if (auto p = athlete_pitch_position(cam->second, e.detection.bbox)) positions[i].push_back(*p);
    }
  }

  std::vector<std::size_t> players;
  bool any_position = false;
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    if (tracklets[i].votedRole != Role::player) continue;
    players.push_back(i);
    any_position = any_position || !positions[i].empty();
  }
  if (players.size() < 2) throw InsufficientData("team assignment needs at least two players");
  if (!any_position) throw InsufficientData("no calibrated frame covers the player tracklets");

  auto mean_pos = [&](std::size_t i) -> std::optional<Vec2> {
    if (positions[i].empty()) return std::nullopt;
    Vec2 m = Vec2::Zero();
    for (const auto& p : positions[i]) m += Vec2(p.x, p.y);
    return m / static_cast<double>(positions[i].size());
  };

  // Standardize the mean positions across players.
  Vec2 mu = Vec2::Zero();
  int with_pos = 0;
  for (auto i : players)
    if (auto m = mean_pos(i)) mu += *m, ++with_pos;
  mu /= with_pos;
  Vec2 var = Vec2::Zero();
  for (auto i : players)
    if (auto m = mean_pos(i)) var += (*m - mu).cwiseProduct(*m - mu);
  Vec2 sd = (var / with_pos).cwiseSqrt();
  for (int k = 0; k < 2; ++k)
    if (!(sd(k) > 0.0)) sd(k) = 1.0;

  Eigen::Index dim = 0;
  for (auto i : players) dim = std::max(dim, tracklets[i].meanEmbedding.size());
  std::vector<Eigen::VectorXd> features;
  for (auto i : players) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dim + 2);
    if (tracklets[i].meanEmbedding.size() == dim) f.head(dim) = tracklets[i].meanEmbedding;
    if (auto m = mean_pos(i)) f.tail<2>() = cfg.positionWeight * (*m - mu).cwiseQuotient(sd);
    features.push_back(std::move(f));
  }

  std::mt19937_64 rng(cfg.seed);
  KMeansResult best;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    KMeansResult cand = kmeans2(features, rng, cfg.maxIterations);
    if (cand.inertia < best.inertia) best = std::move(cand);
  }

  double sum_x[2] = {0.0, 0.0};
  int cnt[2] = {0, 0};
  for (std::size_t k = 0; k < players.size(); ++k) {
    if (auto m = mean_pos(players[k])) {
      sum_x[best.labels[k]] += m->x();
      ++cnt[best.labels[k]];
    }
  }
  double cluster_x[2];
  for (int k = 0; k < 2; ++k) cluster_x[k] = cnt[k] ? sum_x[k] / cnt[k] : 0.0;
  // Naming depends only on where the clusters sit, not on k-means labels.
  const int left_label = cluster_x[0] <= cluster_x[1] ? 0 : 1;
  for (std::size_t k = 0; k < players.size(); ++k)
    tracklets[players[k]].team = best.labels[k] == left_label ? Team::left : Team::right;

  const double left_x = cluster_x[left_label];
  const double right_x = cluster_x[1 - left_label];
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    if (tracklets[i].votedRole != Role::goalkeeper || positions[i].empty()) continue;
    std::vector<double> xs;
    for (const auto& p : positions[i]) xs.push_back(p.x);
    const double gx = median(std::move(xs));
    const bool left_same = (left_x < 0) == (gx < 0);
    const bool right_same = (right_x < 0) == (gx < 0);
    if (left_same != right_same) {
      tracklets[i].team = left_same ? Team::left : Team::right;
    } else {
      tracklets[i].team = std::abs(gx - left_x) <= std::abs(gx - right_x) ? Team::left : Team::right;
    }
  }
  return tracklets;
}

}  // namespace gsr
