#include "cosal/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "cosal/error.hpp"

namespace cosal {

namespace {

void checkAligned(const ScalarMap& p, const BinaryMask& g) {
  if (p.width != g.width || p.height != g.height)
    throw Error(ErrorKind::DimMismatch, "prediction and ground truth differ in size");
}

struct Counts {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts countAt(const ScalarMap& p, const BinaryMask& g, double threshold) {
  Counts c;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const bool pred = p.values[i] >= threshold;
    const bool pos = g.values[i] != 0;
    if (pred && pos) c.tp += 1;
    else if (pred) c.fp += 1;
    else if (pos) c.fn += 1;
    else c.tn += 1;
  }
  return c;
}

double precisionOf(const Counts& c) { return c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 1.0; }
double recallOf(const Counts& c) { return c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 1.0; }

double trapezoid(const std::vector<std::pair<double, double>>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  return area;
}

}  // namespace

std::vector<int> quantize(const ScalarMap& map) {
  std::vector<int> q(map.values.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = static_cast<int>(std::lround(255.0 * std::clamp(map.values[i], 0.0, 1.0)));
  return q;
}

Curves prRoc(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth) {
  if (predictions.size() != groundTruth.size())
    throw Error(ErrorKind::DimMismatch, "prediction and ground-truth counts differ");
  if (predictions.empty()) throw Error(ErrorKind::InvalidArg, "no samples to evaluate");

  std::array<double, 256> precision{}, recall{}, fpr{};
  std::array<bool, 256> measured{};
  std::size_t totalPositives = 0;
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    checkAligned(predictions[m], groundTruth[m]);
    const std::vector<int> q = quantize(predictions[m]);
    std::array<double, 257> posHist{}, negHist{};
    for (std::size_t i = 0; i < q.size(); ++i) (groundTruth[m].values[i] ? posHist : negHist)[q[i]] += 1.0;
    double positives = 0.0, negatives = 0.0;
    for (int v = 0; v < 256; ++v) {
      positives += posHist[v];
      negatives += negHist[v];
    }
    totalPositives += static_cast<std::size_t>(positives);
    // Suffix sums: predicted positives at threshold t are values >= t.
    double tp = 0.0, fp = 0.0;
    for (int t = 255; t >= 0; --t) {
      tp += posHist[t];
      fp += negHist[t];
      const bool any = tp + fp > 0.0;
      measured[t] = measured[t] || any;
      precision[t] += any ? tp / (tp + fp) : 1.0;
      recall[t] += positives > 0.0 ? tp / positives : 1.0;
      fpr[t] += negatives > 0.0 ? fp / negatives : 0.0;
    }
  }
  if (totalPositives == 0) throw Error(ErrorKind::EmptyGroundTruth, "ground truth has no positive pixel");

  const double inv = 1.0 / static_cast<double>(predictions.size());
  Curves c;
  c.points.resize(256);
  for (int t = 0; t < 256; ++t) c.points[t] = {t, precision[t] * inv, recall[t] * inv, fpr[t] * inv};

  std::vector<std::pair<double, double>> pr;
  for (int t = 255; t >= 0; --t)
    if (measured[t]) pr.emplace_back(c.points[t].recall, c.points[t].precision);
  std::stable_sort(pr.begin(), pr.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  pr.insert(pr.begin(), {0.0, pr.front().second});
  if (pr.back().first < 1.0) pr.emplace_back(1.0, pr.back().second);
  c.ap = std::clamp(trapezoid(pr), 0.0, 1.0);

  std::vector<std::pair<double, double>> roc = {{0.0, 0.0}};
  for (int t = 255; t >= 0; --t) roc.emplace_back(c.points[t].fpr, c.points[t].recall);
  roc.emplace_back(1.0, 1.0);
  std::stable_sort(roc.begin(), roc.end());
  c.auc = std::clamp(trapezoid(roc), 0.0, 1.0);
  return c;
}

double fMeasureFromPR(double precision, double recall, double beta2) {
  const double den = beta2 * precision + recall;
  return den > 0.0 ? (1.0 + beta2) * precision * recall / den : 0.0;
}

PrecisionRecall adaptivePrecisionRecall(const ScalarMap& prediction, const BinaryMask& gt) {
  checkAligned(prediction, gt);
  if (gt.count() == 0) throw Error(ErrorKind::EmptyGroundTruth, "ground truth has no positive pixel");
  const auto& v = prediction.values;
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double threshold = std::min(mean + std::sqrt(var / n), *std::max_element(v.begin(), v.end()));
  const Counts c = countAt(prediction, gt, threshold);
  return {precisionOf(c), recallOf(c), threshold};
}

double fMeasure(const ScalarMap& prediction, const BinaryMask& gt, double beta2) {
  const PrecisionRecall pr = adaptivePrecisionRecall(prediction, gt);
  return fMeasureFromPR(pr.precision, pr.recall, beta2);
}

double datasetFMeasure(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth,
                       double beta2) {
  if (predictions.size() != groundTruth.size() || predictions.empty())
    throw Error(ErrorKind::DimMismatch, "prediction and ground-truth counts differ");
  double p = 0.0, r = 0.0;
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    const PrecisionRecall pr = adaptivePrecisionRecall(predictions[m], groundTruth[m]);
    p += pr.precision;
    r += pr.recall;
  }
  const double inv = 1.0 / static_cast<double>(predictions.size());
  return fMeasureFromPR(p * inv, r * inv, beta2);
}

double fMeasureThresholdStd(const Curves& curves, double beta2) {
  if (curves.points.empty()) return 0.0;
  std::vector<double> f;
  for (const auto& pt : curves.points) f.push_back(fMeasureFromPR(pt.precision, pt.recall, beta2));
  double mean = 0.0;
  for (double x : f) mean += x;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double x : f) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(f.size()));
}

JaccardPrecision jaccardPrecision(const BinaryMask& mask, const BinaryMask& gt) {
  if (mask.width != gt.width || mask.height != gt.height)
    throw Error(ErrorKind::DimMismatch, "masks differ in size");
  double inter = 0.0, uni = 0.0, agree = 0.0;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    const bool a = mask.values[i] != 0, b = gt.values[i] != 0;
    inter += (a && b) ? 1.0 : 0.0;
    uni += (a || b) ? 1.0 : 0.0;
    agree += (a == b) ? 1.0 : 0.0;
  }
  JaccardPrecision jp;
  jp.jaccard = uni > 0.0 ? inter / uni : 1.0;
  jp.precision = mask.values.empty() ? 1.0 : agree / static_cast<double>(mask.values.size());
  return jp;
}

MetricReport evaluate(std::span<const ScalarMap> predictions, std::span<const BinaryMask> groundTruth,
                      std::span<const BinaryMask> masks) {
  MetricReport r;
  r.images = predictions.size();
  const Curves c = prRoc(predictions, groundTruth);
  r.ap = c.ap;
  r.auc = c.auc;
  r.curve = c.points;
  r.fmeasureStd = fMeasureThresholdStd(c);
  double p = 0.0, rec = 0.0;
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    const PrecisionRecall pr = adaptivePrecisionRecall(predictions[m], groundTruth[m]);
    p += pr.precision;
    rec += pr.recall;
  }
  r.adaptivePrecision = p / static_cast<double>(predictions.size());
  r.adaptiveRecall = rec / static_cast<double>(predictions.size());
  r.fmeasure = fMeasureFromPR(r.adaptivePrecision, r.adaptiveRecall);
  if (!masks.empty()) {
    if (masks.size() != groundTruth.size()) throw Error(ErrorKind::DimMismatch, "one mask per sample");
    double j = 0.0, pp = 0.0;
    for (std::size_t m = 0; m < masks.size(); ++m) {
      const JaccardPrecision jp = jaccardPrecision(masks[m], groundTruth[m]);
      j += jp.jaccard;
      pp += jp.precision;
    }
    r.jaccard = j / static_cast<double>(masks.size());
    r.pixelPrecision = pp / static_cast<double>(masks.size());
  }
  return r;
}

std::string reportJson(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["images"] = report.images;
  j["ap"] = report.ap;
  j["auc"] = report.auc;
  j["fmeasure"] = report.fmeasure;
  j["fmeasureStd"] = report.fmeasureStd;
  j["adaptivePrecision"] = report.adaptivePrecision;
  j["adaptiveRecall"] = report.adaptiveRecall;
  if (report.jaccard) j["jaccard"] = *report.jaccard;
  if (report.pixelPrecision) j["pixelPrecision"] = *report.pixelPrecision;
  return j.dump(2) + "\n";
}

std::string curveCsv(const std::vector<CurvePoint>& curve) {
  std::string out = "threshold,precision,recall,fpr\n";
  char line[128];
  for (const auto& p : curve) {
    std::snprintf(line, sizeof line, "%d,%.10f,%.10f,%.10f\n", p.threshold, p.precision, p.recall, p.fpr);
    out += line;
  }
  return out;
}

}  // namespace cosal
