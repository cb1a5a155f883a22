#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsr/athlete.hpp"
#include "gsr/calibration.hpp"
#include "gsr/camera.hpp"
#include "gsr/pitch.hpp"

namespace gsr {

// ---------------------------------------------------------------- calibration

enum class ElementStatus { truePositive, falseNegative, falsePositive };

struct ElementScore {
  ElementStatus status = ElementStatus::falseNegative;
  /// Largest pixel distance between prediction and ground truth over the
  /// element's visible samples; infinity when the prediction is absent or
  /// cannot project a sample.
  double maxError = 0.0;
};

struct JaccardCounts {
  int tp = 0;
  int fn = 0;
  int fp = 0;
  std::map<std::string, ElementScore> elements;

  JaccardCounts& operator+=(const JaccardCounts& o);
  /// TP / (TP + FN + FP); 0 when nothing was visible or predicted.
  double jaccard() const;
};

/// Per-frame Jaccard counts against a ground-truth camera. An element seen by
/// the ground truth is a true positive iff every visible sample reprojects
/// within `gamma` pixels under the prediction; an element visible only under
/// the prediction is a false positive.
JaccardCounts jaccard_calibration(const std::optional<CameraParams>& pred, const CameraParams& gt,
                                  const PitchModel& pitch, ImageSize size, double gamma,
                                  double spacing = 0.25);

/// Same counts against annotated ground-truth polylines (pixels, keyed by
/// element name) instead of a ground-truth camera. Each annotated point must
/// lie within `gamma` of the predicted projection of its element.
JaccardCounts jaccard_from_annotations(const std::optional<CameraParams>& pred,
                                       const std::map<std::string, std::vector<Vec2>>& gtLines,
                                       const PitchModel& pitch, ImageSize size, double gamma,
                                       double spacing = 0.25);

/// Fraction of frames with produced camera parameters. Throws EmptyDataset.
double completion_rate(std::span<const std::optional<CalibrationResult>> results);
double completion_rate(std::span<const bool> produced);

/// Final score in percent from fractional JaC_5 and CR.
double final_score(double jac5, double cr);

struct CalibrationEvalReport {
  /// gamma (px) -> JaC as a fraction.
  std::map<double, double> jac;
  double cr = 0.0;
  /// cr * jac[5] * 100
  double fs = 0.0;
  int frames = 0;
};

CalibrationEvalReport evaluate_calibration(std::span<const std::optional<CameraParams>> preds,
                                           std::span<const CameraParams> gts,
                                           const PitchModel& pitch, ImageSize size,
                                           std::span<const double> gammas, double spacing = 0.25);

/// Report from already aggregated values (fractions).
CalibrationEvalReport make_calibration_report(std::map<double, double> jac, double cr, int frames);

std::string to_json(const CalibrationEvalReport& r);
std::string to_table(const CalibrationEvalReport& r);

// ------------------------------------------------------------------- tracking

/// Boxes of one frame with their identities.
struct FrameBoxes {
  std::vector<int> ids;
  std::vector<BBox> boxes;
};

/// Frame-indexed tracking data. Ground truth and prediction are compared
/// frame by frame; the shorter sequence is treated as empty past its end.
using TrackingData = std::vector<FrameBoxes>;

std::vector<double> default_alpha_grid();

struct HotaResult {
  double hota = 0.0;
  double detA = 0.0;
  double assA = 0.0;
  std::vector<double> alphas;
  std::vector<double> hotaPerAlpha;
  std::vector<double> detAPerAlpha;
  std::vector<double> assAPerAlpha;
};

/// HOTA averaged over the IoU thresholds in `alphas`. Per threshold and
/// frame, a bijective matching over pairs with IoU >= alpha first maximizes
/// the number of matches and then the summed global-alignment x IoU score.
HotaResult hota(const TrackingData& gt, const TrackingData& pred,
                std::span<const double> alphas = {});

struct MotaResult {
  double mota = 0.0;
  int tp = 0;
  int fn = 0;
  int fp = 0;
  int idsw = 0;
  int numGt = 0;
};

/// CLEAR MOTA. Correspondences from the previous frame are kept while their
/// IoU stays at or above the threshold; the rest are matched by Hungarian on
/// IoU.
MotaResult mota(const TrackingData& gt, const TrackingData& pred, double iouThreshold = 0.5);

struct Idf1Result {
  double idf1 = 0.0;
  int idtp = 0;
  int idfp = 0;
  int idfn = 0;
};

/// Identity F1 under the globally optimal one-to-one identity mapping.
Idf1Result idf1(const TrackingData& gt, const TrackingData& pred, double iouThreshold = 0.5);

struct TrackingEvalReport {
  double hota = 0.0;
  double detA = 0.0;
  double assA = 0.0;
  double mota = 0.0;
  double idf1 = 0.0;
  int idsw = 0;
};

TrackingEvalReport evaluate_tracking(const TrackingData& gt, const TrackingData& pred);

std::string to_json(const TrackingEvalReport& r);
std::string to_table(const TrackingEvalReport& r);

}  // namespace gsr
