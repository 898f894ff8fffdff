#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cosal/imagio.hpp"

namespace cosal {

inline constexpr double kBetaSquared = 0.3;

struct CurvePoint {
  int threshold = 0;  // 0..255, a pixel is positive when its quantized value >= threshold
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
};

struct Curves {
  std::vector<CurvePoint> points;  // 256 entries, ascending threshold
  double ap = 0.0;
  double auc = 0.0;
};

struct MetricReport {
  std::size_t images = 0;
  double ap = 0.0;
  double auc = 0.0;
  double fmeasure = 0.0;
  double fmeasureStd = 0.0;
  double adaptivePrecision = 0.0;
  double adaptiveRecall = 0.0;
  std::vector<CurvePoint> curve;
  std::optional<double> jaccard;
  std::optional<double> pixelPrecision;
};

/// round(255 * v) per pixel.
std::vector<int> quantize(const ScalarMap& map);

/// Per-image precision/recall/fpr at every threshold, macro-averaged across
/// images in index order. An image with no predicted positives contributes
/// precision 1 and recall 0. AP integrates the trapezoid over recall using the
/// thresholds where some image predicts a positive, held flat to recall 0;
/// AUC integrates over fpr between (0,0) and (1,1).
Curves prRoc(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth);

double fMeasureFromPR(double precision, double recall, double beta2 = kBetaSquared);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

/// Binarizes at mean + std of the map (capped at its maximum).
PrecisionRecall adaptivePrecisionRecall(const ScalarMap& prediction, const BinaryMask& gt);
double fMeasure(const ScalarMap& prediction, const BinaryMask& gt, double beta2 = kBetaSquared);

/// Precision and recall averaged over samples, then combined.
double datasetFMeasure(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth,
                       double beta2 = kBetaSquared);

/// Population standard deviation of the dataset F-measure over the 256 thresholds.
double fMeasureThresholdStd(const Curves& curves, double beta2 = kBetaSquared);

struct JaccardPrecision {
  double jaccard = 0.0;
  double precision = 0.0;
};
JaccardPrecision jaccardPrecision(const BinaryMask& mask, const BinaryMask& gt);

MetricReport evaluate(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth,
                      std::span<const BinaryMask> masks = {});

std::string reportJson(const MetricReport& report);
/// threshold,precision,recall,fpr per row.
std::string curveCsv(const std::vector<CurvePoint>& curve);

}  // namespace cosal
