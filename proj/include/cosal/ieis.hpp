#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cosal/features.hpp"
#include "cosal/graph.hpp"
#include "cosal/superpixel.hpp"

namespace cosal {

inline constexpr double kBatchNormEpsilon = 1e-5;

struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weight;  // outputs x inputs, row-major
  std::vector<double> bias;
};

struct BatchNormLayer {
  std::vector<double> scale;
  std::vector<double> shift;
  std::vector<double> runningMean;
  std::vector<double> runningVar;
};

// Affine -> batch-norm -> ReLU for every hidden layer, then an affine layer
// with two outputs fed to a softmax.
struct MlpModel {
  int inputDim = 0;
  std::vector<int> hidden;
  std::vector<DenseLayer> dense;    // hidden.size() + 1
  std::vector<BatchNormLayer> norm;  // hidden.size()

  static MlpModel create(int inputDim, std::vector<int> hidden, std::uint64_t seed);

  void validate() const;
  std::array<double, 2> logits(std::span<const double> x) const;
  /// Softmax probability of the co-salient class, using stored statistics.
  double score(std::span<const double> x) const;

  std::size_t trainableCount() const;
  /// Trainable parameters in fixed order: per hidden layer weight, bias,
  /// scale, shift; then final weight, bias.
  std::vector<double> trainable() const;
  void setTrainable(std::span<const double> values);
};

struct TrainSample {
  std::vector<double> x;
  int label = 0;          // 1 iff gtCosal >= 0.5
  double iris = 0.0;      // segment IrIS value
  double gtCosal = 0.0;   // averaged ground truth over the segment
};

struct LossWeights {
  double rho = 0.7;
  double gamma = 3.0;
};

/// Per-sample weight ((1-rho)[y=0] + rho[y=1]) * gamma^|iris - gtCosal|.
double sampleWeight(const TrainSample& s, const LossWeights& w);

double weightedLoss(std::span<const TrainSample> batch, std::span<const std::array<double, 2>> logits,
                    const LossWeights& w);

struct MlpGradient {
  std::vector<double> values;  // same order as MlpModel::trainable()
};

struct BatchResult {
  double loss = 0.0;
  MlpGradient gradient;
  std::vector<std::vector<double>> batchMean;
  std::vector<std::vector<double>> batchVar;
};

/// Training-mode forward/backward: batch-norm uses the batch's own statistics.
BatchResult lossAndGradient(const MlpModel& model, std::span<const TrainSample> batch,
                            const LossWeights& w);
double trainingLoss(const MlpModel& model, std::span<const TrainSample> batch, const LossWeights& w);

struct TrainConfig {
  LossWeights loss;
  double learningRate = 0.001;
  double momentum = 0.9;
  double weightDecay = 0.0005;
  int epochs = 100;
  int batchSize = 32;
  double normMomentum = 0.9;
  std::vector<int> hidden = {256, 64};
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> lossTrace;  // mean minibatch loss per epoch
};

TrainResult train(std::span<const TrainSample> samples, const TrainConfig& config);

double accuracy(const MlpModel& model, std::span<const TrainSample> samples);

SegmentField scoreSegments(const MlpModel& model, const std::vector<SegmentDescriptor>& descriptors);

/// Model-free fallback: cosine similarity of each segment's colour histogram
/// (and high-level part, when present) to the group foreground descriptor,
/// divided by the group maximum and passed through a logistic.
std::vector<SegmentField> heuristicScores(const std::vector<std::vector<SegmentDescriptor>>& group,
                                          const DescriptorLayout& layout);

/// Foreground seeds: raw > 0.5 and within the top ceil(0.1 n) (ties by index);
/// background seeds: boundary segments. Falls back to the raw field when no
/// foreground seed survives.
SegmentField refineIeis(const SegmentedImage& seg, const RankingSolver& intraSolver,
                        const SegmentField& raw, double eta);
SegmentField refineIeis(const SegmentedImage& seg, const SegmentField& raw, double alpha, double eta);

/// Indices of the top ceil(0.1 n) values, ties broken by ascending index.
std::vector<int> topTenPercent(std::span<const double> values);

void saveModel(const MlpModel& model, const std::filesystem::path& basePath);
MlpModel loadModel(const std::filesystem::path& basePath);

}  // namespace cosal
