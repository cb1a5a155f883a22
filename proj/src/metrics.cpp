#include "gsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include "json.hpp"

#include "gsr/assignment.hpp"
#include "gsr/errors.hpp"
#include "gsr/projection.hpp"

namespace gsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& line) {
  if (line.size() == 1) return (p - line[0]).norm();
  double best = kInf;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 ab = line[i + 1] - line[i];
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - line[i]).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (line[i] + s * ab)).norm());
  }
  return best;
}

bool visible(const CameraParams& cam, const std::vector<Vec3>& samples, ImageSize size) {
  return std::any_of(samples.begin(), samples.end(), [&](const Vec3& X) {
    auto p = project_point(cam, X);
    return p && in_frame(*p, size);
  });
}

}  // namespace

JaccardCounts& JaccardCounts::operator+=(const JaccardCounts& o) {
  tp += o.tp;
  fn += o.fn;
  fp += o.fp;
  return *this;
}

double JaccardCounts::jaccard() const {
  const int denom = tp + fn + fp;
  return denom > 0 ? static_cast<double>(tp) / denom : 0.0;
}

JaccardCounts jaccard_calibration(const std::optional<CameraParams>& pred, const CameraParams& gt,
                                  const PitchModel& pitch, ImageSize size, double gamma,
                                  double spacing) {
  JaccardCounts out;
  for (const auto& elem : pitch.elements()) {
    const auto samples = sample_element(elem, spacing);
    std::vector<std::pair<Vec3, Vec2>> seen;
    for (const auto& X : samples) {
      auto p = project_point(gt, X);
      if (p && in_frame(*p, size)) seen.emplace_back(X, *p);
    }
    if (seen.empty()) {
      if (pred && visible(*pred, samples, size)) {
        ++out.fp;
        out.elements[elem.name] = {ElementStatus::falsePositive, kInf};
      }
      continue;
    }
    double worst = pred ? 0.0 : kInf;
    if (pred) {
      for (const auto& [X, p_gt] : seen) {
        auto p = project_point(*pred, X);
        worst = std::max(worst, p ? (*p - p_gt).norm() : kInf);
      }
    }
    const bool ok = worst < gamma;
    ok ? ++out.tp : ++out.fn;
    out.elements[elem.name] = {ok ? ElementStatus::truePositive : ElementStatus::falseNegative,
                               worst};
  }
  return out;
}

JaccardCounts jaccard_from_annotations(const std::optional<CameraParams>& pred,
                                       const std::map<std::string, std::vector<Vec2>>& gtLines,
                                       const PitchModel& pitch, ImageSize size, double gamma,
                                       double spacing) {
  JaccardCounts out;
  for (const auto& elem : pitch.elements()) {
    auto gt = gtLines.find(elem.name);
    const bool annotated = gt != gtLines.end() && !gt->second.empty();
    if (!annotated) {
      if (pred && visible(*pred, sample_element(elem, spacing), size)) {
        ++out.fp;
        out.elements[elem.name] = {ElementStatus::falsePositive, kInf};
      }
      continue;
    }
    double worst = kInf;
    if (pred) {
      // Unclipped projection so annotated points near the border still find
      // their curve.
      std::vector<std::vector<Vec2>> pieces(1);
      for (const auto& X : sample_element(elem, spacing)) {
        if (auto p = project_point(*pred, X)) {
          pieces.back().push_back(*p);
        } else if (!pieces.back().empty()) {
          pieces.emplace_back();
        }
      }
      worst = 0.0;
      for (const auto& q : gt->second) {
        double d = kInf;
        for (const auto& piece : pieces)
          if (!piece.empty()) d = std::min(d, point_polyline_distance(q, piece));
        worst = std::max(worst, d);
      }
    }
    const bool ok = worst < gamma;
    ok ? ++out.tp : ++out.fn;
    out.elements[elem.name] = {ok ? ElementStatus::truePositive : ElementStatus::falseNegative,
                               worst};
  }
  return out;
}

double completion_rate(std::span<const std::optional<CalibrationResult>> results) {
  if (results.empty()) throw EmptyDataset("completion rate of an empty dataset");
  const auto n = std::count_if(results.begin(), results.end(),
                               [](const auto& r) { return r.has_value() && r->valid; });
  return static_cast<double>(n) / static_cast<double>(results.size());
}

double completion_rate(std::span<const bool> produced) {
  if (produced.empty()) throw EmptyDataset("completion rate of an empty dataset");
  const auto n = std::count(produced.begin(), produced.end(), true);
  return static_cast<double>(n) / static_cast<double>(produced.size());
}

double final_score(double jac5, double cr) { return cr * jac5 * 100.0; }

CalibrationEvalReport make_calibration_report(std::map<double, double> jac, double cr, int frames) {
  CalibrationEvalReport r;
  r.jac = std::move(jac);
  r.cr = cr;
  r.frames = frames;
  auto j5 = r.jac.find(5.0);
  r.fs = j5 == r.jac.end() ? 0.0 : final_score(j5->second, cr);
  return r;
}

CalibrationEvalReport evaluate_calibration(std::span<const std::optional<CameraParams>> preds,
                                           std::span<const CameraParams> gts,
                                           const PitchModel& pitch, ImageSize size,
                                           std::span<const double> gammas, double spacing) {
  if (preds.size() != gts.size()) throw Error("prediction and ground-truth frame counts differ");
  if (preds.empty()) throw EmptyDataset("calibration evaluation of an empty dataset");
  std::map<double, double> jac;
  for (double g : gammas) {
    JaccardCounts total;
    for (std::size_t i = 0; i < preds.size(); ++i)
      total += jaccard_calibration(preds[i], gts[i], pitch, size, g, spacing);
    jac[g] = total.jaccard();
  }
  const auto n = std::count_if(preds.begin(), preds.end(), [](const auto& p) { return p.has_value(); });
  return make_calibration_report(std::move(jac), static_cast<double>(n) / preds.size(),
                                 static_cast<int>(preds.size()));
}

namespace {

std::string gamma_key(double g) {
  return g == std::floor(g) ? fmt::format("{}", static_cast<long>(g)) : fmt::format("{}", g);
}

}  // namespace

std::string to_json(const CalibrationEvalReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json jac = nlohmann::ordered_json::object();
  for (const auto& [g, v] : r.jac) jac[gamma_key(g)] = v * 100.0;
  j["jac"] = jac;
  j["cr"] = r.cr * 100.0;
  j["fs"] = r.fs;
  j["frames"] = r.frames;
  j["unit"] = "percent";
  return j.dump(2);
}

std::string to_table(const CalibrationEvalReport& r) {
  std::string head, row;
  for (const auto& [g, v] : r.jac) {
    head += fmt::format("{:>8}", "JaC_" + gamma_key(g));
    row += fmt::format("{:>8.1f}", v * 100.0);
  }
  head += fmt::format(" |{:>7} |{:>7}", "CR", "FS");
  row += fmt::format(" |{:>7.1f} |{:>7.1f}", r.cr * 100.0, r.fs);
  return head + "\n" + row + "\n";
}

// ------------------------------------------------------------------- tracking

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int i = 1; i <= 19; ++i) a.push_back(0.05 * i);
  return a;
}

namespace {

const FrameBoxes& frame_or_empty(const TrackingData& d, std::size_t t) {
  static const FrameBoxes empty;
  return t < d.size() ? d[t] : empty;
}

// Dense id indexing shared by the tracking metrics.
struct IdIndex {
  std::map<int, int> index;
  explicit IdIndex(const TrackingData& d) {
    std::set<int> ids;
    for (const auto& f : d) ids.insert(f.ids.begin(), f.ids.end());
    int k = 0;
    for (int id : ids) index[id] = k++;
  }
  int operator()(int id) const { return index.at(id); }
  int size() const { return static_cast<int>(index.size()); }
};

Eigen::MatrixXd iou_matrix(const FrameBoxes& g, const FrameBoxes& p) {
  Eigen::MatrixXd s(g.boxes.size(), p.boxes.size());
  for (std::size_t i = 0; i < g.boxes.size(); ++i)
    for (std::size_t j = 0; j < p.boxes.size(); ++j) s(i, j) = iou(g.boxes[i], p.boxes[j]);
  return s;
}

}  // namespace

HotaResult hota(const TrackingData& gt, const TrackingData& pred, std::span<const double> alphas_in) {
  std::vector<double> alphas(alphas_in.begin(), alphas_in.end());
  if (alphas.empty()) alphas = default_alpha_grid();
  const std::size_t frames = std::max(gt.size(), pred.size());
  const IdIndex gidx(gt), pidx(pred);
  const int G = gidx.size(), P = pidx.size();

  // Global alignment score between every gt and predicted identity, weighted
  // by per-frame similarity.
  Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(G, P);
  Eigen::VectorXd gcount = Eigen::VectorXd::Zero(G), pcount = Eigen::VectorXd::Zero(P);
  std::vector<Eigen::MatrixXd> sims(frames);
  int num_gt = 0, num_pred = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto& g = frame_or_empty(gt, t);
    const auto& p = frame_or_empty(pred, t);
    sims[t] = iou_matrix(g, p);
    const Eigen::MatrixXd& s = sims[t];
    const Eigen::VectorXd row = s.rowwise().sum();
    const Eigen::RowVectorXd col = s.colwise().sum();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.cols(); ++j) {
        const double denom = row(i) + col(j) - s(i, j);
        if (denom > std::numeric_limits<double>::epsilon())
          potential(gidx(g.ids[i]), pidx(p.ids[j])) += s(i, j) / denom;
      }
    }
    for (int id : g.ids) gcount(gidx(id)) += 1;
    for (int id : p.ids) pcount(pidx(id)) += 1;
    num_gt += static_cast<int>(g.ids.size());
    num_pred += static_cast<int>(p.ids.size());
  }
  Eigen::MatrixXd alignment = Eigen::MatrixXd::Zero(G, P);
  for (int a = 0; a < G; ++a)
    for (int b = 0; b < P; ++b) {
      const double denom = gcount(a) + pcount(b) - potential(a, b);
      if (denom > 0.0) alignment(a, b) = potential(a, b) / denom;
    }

  HotaResult res;
  res.alphas = alphas;
  for (double alpha : alphas) {
    Eigen::MatrixXd matches = Eigen::MatrixXd::Zero(G, P);
    int tp = 0;
    for (std::size_t t = 0; t < frames; ++t) {
      const auto& g = frame_or_empty(gt, t);
      const auto& p = frame_or_empty(pred, t);
      const Eigen::MatrixXd& s = sims[t];
      if (s.size() == 0) continue;
      Eigen::MatrixXd cost(s.rows(), s.cols());
      for (Eigen::Index i = 0; i < s.rows(); ++i)
        for (Eigen::Index j = 0; j < s.cols(); ++j)
          cost(i, j) = s(i, j) >= alpha - std::numeric_limits<double>::epsilon()
                           ? -alignment(gidx(g.ids[i]), pidx(p.ids[j])) * s(i, j)
                           : kInf;
      for (auto [i, j] : solve_assignment(cost).matches) {
        matches(gidx(g.ids[i]), pidx(p.ids[j])) += 1;
        ++tp;
      }
    }
    const int fn = num_gt - tp;
    const int fp = num_pred - tp;
    const double det_a = static_cast<double>(tp) / std::max(1, tp + fn + fp);
    double ass_sum = 0.0;
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < P; ++b) {
        const double m = matches(a, b);
        if (m > 0) ass_sum += m * (m / (gcount(a) + pcount(b) - m));
      }
    const double ass_a = ass_sum / std::max(1, tp);
    res.detAPerAlpha.push_back(det_a);
    res.assAPerAlpha.push_back(ass_a);
    res.hotaPerAlpha.push_back(std::sqrt(det_a * ass_a));
  }
  const double n = static_cast<double>(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    res.hota += res.hotaPerAlpha[k];
    res.detA += res.detAPerAlpha[k];
    res.assA += res.assAPerAlpha[k];
  }
  res.hota /= n;
  res.detA /= n;
  res.assA /= n;
  return res;
}

MotaResult mota(const TrackingData& gt, const TrackingData& pred, double thr) {
  MotaResult res;
  std::map<int, int> last_match;  // gt id -> pred id of its most recent match
  std::map<int, int> prev_frame;  // gt id -> pred id matched on the previous frame
  const std::size_t frames = std::max(gt.size(), pred.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const auto& g = frame_or_empty(gt, t);
    const auto& p = frame_or_empty(pred, t);
    const Eigen::MatrixXd s = iou_matrix(g, p);
    std::vector<int> g_match(g.ids.size(), -1);
    std::vector<char> p_used(p.ids.size(), 0);

    for (std::size_t i = 0; i < g.ids.size(); ++i) {
      auto it = prev_frame.find(g.ids[i]);
      if (it == prev_frame.end()) continue;
      for (std::size_t j = 0; j < p.ids.size(); ++j) {
        if (!p_used[j] && p.ids[j] == it->second && s(i, j) >= thr) {
          g_match[i] = static_cast<int>(j);
          p_used[j] = 1;
          break;
        }
      }
    }
    std::vector<int> gi, pj;
    for (std::size_t i = 0; i < g.ids.size(); ++i)
      if (g_match[i] < 0) gi.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < p.ids.size(); ++j)
      if (!p_used[j]) pj.push_back(static_cast<int>(j));
    if (!gi.empty() && !pj.empty()) {
      Eigen::MatrixXd cost(gi.size(), pj.size());
      for (std::size_t a = 0; a < gi.size(); ++a)
        for (std::size_t b = 0; b < pj.size(); ++b) {
          const double o = s(gi[a], pj[b]);
          cost(a, b) = o >= thr ? 1.0 - o : kInf;
        }
      for (auto [a, b] : solve_assignment(cost).matches) g_match[gi[a]] = pj[b];
    }

    prev_frame.clear();
    int matched = 0;
    for (std::size_t i = 0; i < g.ids.size(); ++i) {
      if (g_match[i] < 0) continue;
      ++matched;
      const int gid = g.ids[i];
      const int pid = p.ids[g_match[i]];
      auto it = last_match.find(gid);
      if (it != last_match.end() && it->second != pid) ++res.idsw;
      last_match[gid] = pid;
      prev_frame[gid] = pid;
    }
    res.tp += matched;
    res.fn += static_cast<int>(g.ids.size()) - matched;
    res.fp += static_cast<int>(p.ids.size()) - matched;
    res.numGt += static_cast<int>(g.ids.size());
  }
  res.mota = 1.0 - static_cast<double>(res.fn + res.fp + res.idsw) / std::max(1, res.numGt);
  return res;
}

Idf1Result idf1(const TrackingData& gt, const TrackingData& pred, double thr) {
  const IdIndex gidx(gt), pidx(pred);
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(gidx.size(), pidx.size());
  int num_gt = 0, num_pred = 0;
  const std::size_t frames = std::max(gt.size(), pred.size());
  for (std::size_t t = 0; t < frames; ++t) {
    const auto& g = frame_or_empty(gt, t);
    const auto& p = frame_or_empty(pred, t);
    for (std::size_t i = 0; i < g.ids.size(); ++i)
      for (std::size_t j = 0; j < p.ids.size(); ++j)
        if (iou(g.boxes[i], p.boxes[j]) >= thr) overlap(gidx(g.ids[i]), pidx(p.ids[j])) += 1;
    num_gt += static_cast<int>(g.ids.size());
    num_pred += static_cast<int>(p.ids.size());
  }
  Idf1Result res;
  for (auto [a, b] : solve_assignment(-overlap).matches) res.idtp += static_cast<int>(overlap(a, b));
  res.idfn = num_gt - res.idtp;
  res.idfp = num_pred - res.idtp;
  res.idf1 = 2.0 * res.idtp / std::max(1, 2 * res.idtp + res.idfp + res.idfn);
  return res;
}

TrackingEvalReport evaluate_tracking(const TrackingData& gt, const TrackingData& pred) {
  TrackingEvalReport r;
  const auto h = hota(gt, pred);
  r.hota = h.hota;
  r.detA = h.detA;
  r.assA = h.assA;
  const auto m = mota(gt, pred);
  r.mota = m.mota;
  r.idsw = m.idsw;
  r.idf1 = idf1(gt, pred).idf1;
  return r;
}

std::string to_json(const TrackingEvalReport& r) {
  nlohmann::ordered_json j;
  j["hota"] = r.hota * 100.0;
  j["deta"] = r.detA * 100.0;
  j["assa"] = r.assA * 100.0;
  j["mota"] = r.mota * 100.0;
  j["idf1"] = r.idf1 * 100.0;
  j["idsw"] = r.idsw;
  j["unit"] = "percent";
  return j.dump(2);
}

std::string to_table(const TrackingEvalReport& r) {
  return fmt::format("{:>7}{:>7}{:>7}{:>7}{:>7}{:>6}\n{:>7.1f}{:>7.1f}{:>7.1f}{:>7.1f}{:>7.1f}{:>6}\n",
                     "HOTA", "DetA", "AssA", "MOTA", "IDF1", "IDSW", r.hota * 100, r.detA * 100,
                     r.assA * 100, r.mota * 100, r.idf1 * 100, r.idsw);
}

}  // namespace gsr
