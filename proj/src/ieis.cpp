#include "cosal/ieis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

#include "cosal/error.hpp"

namespace cosal {

namespace {

using Matrix = std::vector<double>;  // row-major batch x width

// log(softmax(z)[label]) computed stably.
double logSoftmax(const std::array<double, 2>& z, int label) {
  const double mx = std::max(z[0], z[1]);
  const double lse = mx + std::log(std::exp(z[0] - mx) + std::exp(z[1] - mx));
  return z[label] - lse;
}

double probabilityOfOne(const std::array<double, 2>& z) { return 1.0 / (1.0 + std::exp(z[0] - z[1])); }

void affine(const DenseLayer& l, const Matrix& in, std::size_t batch, Matrix& out) {
  out.assign(batch * l.outputs, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.data() + b * l.inputs;
    for (int o = 0; o < l.outputs; ++o) {
      const double* wrow = l.weight.data() + static_cast<std::size_t>(o) * l.inputs;
      double acc = l.bias[o];
      for (int i = 0; i < l.inputs; ++i) acc += wrow[i] * x[i];
      out[b * l.outputs + o] = acc;
    }
  }
}

struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each dense layer
  std::vector<Matrix> xhat;    // normalized pre-activations per hidden layer
  std::vector<Matrix> normOut; // batch-norm outputs (pre-ReLU)
  std::vector<std::vector<double>> invStd;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;
  Matrix logits;
};

ForwardCache forwardTrain(const MlpModel& model, std::span<const TrainSample> batch) {
  const std::size_t n = batch.size();
  ForwardCache c;
  Matrix h(n * model.inputDim);
  for (std::size_t b = 0; b < n; ++b) {
    if (static_cast<int>(batch[b].x.size()) != model.inputDim)
      throw Error(ErrorKind::DimMismatch, "sample dimension does not match the model");
    std::copy(batch[b].x.begin(), batch[b].x.end(), h.begin() + b * model.inputDim);
  }
  const std::size_t hiddenCount = model.hidden.size();
  for (std::size_t l = 0; l < hiddenCount; ++l) {
    c.inputs.push_back(h);
    Matrix a;
    affine(model.dense[l], h, n, a);
    const int width = model.dense[l].outputs;
    std::vector<double> mean(width, 0.0), var(width, 0.0), inv(width);
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) mean[j] += a[b * width + j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) {
        const double d = a[b * width + j] - mean[j];
        var[j] += d * d;
      }
    for (int j = 0; j < width; ++j) {
      var[j] /= static_cast<double>(n);
      inv[j] = 1.0 / std::sqrt(var[j] + kBatchNormEpsilon);
    }
    Matrix xhat(a.size()), y(a.size());
    const BatchNormLayer& bn = model.norm[l];
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) {
        const std::size_t k = b * width + j;
        xhat[k] = (a[k] - mean[j]) * inv[j];
        y[k] = bn.scale[j] * xhat[k] + bn.shift[j];
      }
    h.resize(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) h[k] = std::max(0.0, y[k]);
    c.xhat.push_back(std::move(xhat));
    c.normOut.push_back(std::move(y));
    c.invStd.push_back(std::move(inv));
    c.mean.push_back(std::move(mean));
    c.var.push_back(std::move(var));
  }
  c.inputs.push_back(h);
  affine(model.dense.back(), h, n, c.logits);
  return c;
}

std::vector<std::array<double, 2>> logitPairs(const Matrix& logits) {
  std::vector<std::array<double, 2>> out(logits.size() / 2);
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = {logits[2 * b], logits[2 * b + 1]};
  return out;
}

// Splits a permutation into minibatches, never leaving a batch of one.
std::vector<std::vector<std::size_t>> makeBatches(const std::vector<std::size_t>& order, int batchSize) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batchSize) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batchSize));
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  if (batches.size() > 1 && batches.back().size() < 2) {
    const auto tail = batches.back();
    batches.pop_back();
    batches.back().insert(batches.back().end(), tail.begin(), tail.end());
  }
  return batches;
}

}  // namespace

MlpModel MlpModel::create(int inputDim, std::vector<int> hidden, std::uint64_t seed) {
  if (inputDim <= 0) throw Error(ErrorKind::InvalidArg, "input dimension must be positive");
  MlpModel m;
  m.inputDim = inputDim;
  m.hidden = std::move(hidden);
  std::mt19937_64 rng(seed);
  int in = inputDim;
  auto makeDense = [&](int inputs, int outputs) {
    DenseLayer d;
    d.inputs = inputs;
    d.outputs = outputs;
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / inputs));
    d.weight.resize(static_cast<std::size_t>(inputs) * outputs);
    for (double& w : d.weight) w = init(rng);
    d.bias.assign(outputs, 0.0);
    return d;
  };
  for (int width : m.hidden) {
    if (width <= 0) throw Error(ErrorKind::InvalidArg, "hidden widths must be positive");
    m.dense.push_back(makeDense(in, width));
    m.norm.push_back({std::vector<double>(width, 1.0), std::vector<double>(width, 0.0),
                      std::vector<double>(width, 0.0), std::vector<double>(width, 1.0)});
    in = width;
  }
  m.dense.push_back(makeDense(in, 2));
  return m;
}

void MlpModel::validate() const {
  if (dense.size() != hidden.size() + 1 || norm.size() != hidden.size())
    throw Error(ErrorKind::InvalidData, "model layer count mismatch");
  int in = inputDim;
  for (std::size_t l = 0; l < dense.size(); ++l) {
    const int out = l < hidden.size() ? hidden[l] : 2;
    const DenseLayer& d = dense[l];
    if (d.inputs != in || d.outputs != out ||
        d.weight.size() != static_cast<std::size_t>(in) * out || d.bias.size() != static_cast<std::size_t>(out))
      throw Error(ErrorKind::InvalidData, "dense layer " + std::to_string(l) + " has inconsistent shape");
    if (l < hidden.size()) {
      const BatchNormLayer& b = norm[l];
      const auto w = static_cast<std::size_t>(out);
      if (b.scale.size() != w || b.shift.size() != w || b.runningMean.size() != w || b.runningVar.size() != w)
        throw Error(ErrorKind::InvalidData, "batch-norm layer has inconsistent shape");
      for (double v : b.runningVar)
        if (!(v > 0.0)) throw Error(ErrorKind::InvalidData, "batch-norm variance must be positive");
    }
    in = out;
  }
}

std::array<double, 2> MlpModel::logits(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != inputDim)
    throw Error(ErrorKind::DimMismatch, "descriptor dimension " + std::to_string(x.size()) +
                                            " does not match model input " + std::to_string(inputDim));
  std::vector<double> h(x.begin(), x.end()), a;
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    affine(dense[l], h, 1, a);
    const BatchNormLayer& bn = norm[l];
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double y = bn.scale[j] * (a[j] - bn.runningMean[j]) / std::sqrt(bn.runningVar[j] + kBatchNormEpsilon) +
                       bn.shift[j];
      a[j] = std::max(0.0, y);
    }
    h.swap(a);
  }
  affine(dense.back(), h, 1, a);
  return {a[0], a[1]};
}

double MlpModel::score(std::span<const double> x) const { return probabilityOfOne(logits(x)); }

std::size_t MlpModel::trainableCount() const {
  std::size_t n = 0;
  for (const auto& d : dense) n += d.weight.size() + d.bias.size();
  for (const auto& b : norm) n += b.scale.size() + b.shift.size();
  return n;
}

std::vector<double> MlpModel::trainable() const {
  std::vector<double> v;
  v.reserve(trainableCount());
  for (std::size_t l = 0; l < dense.size(); ++l) {
    v.insert(v.end(), dense[l].weight.begin(), dense[l].weight.end());
    v.insert(v.end(), dense[l].bias.begin(), dense[l].bias.end());
    if (l < norm.size()) {
      v.insert(v.end(), norm[l].scale.begin(), norm[l].scale.end());
      v.insert(v.end(), norm[l].shift.begin(), norm[l].shift.end());
    }
  }
  return v;
}

void MlpModel::setTrainable(std::span<const double> values) {
  if (values.size() != trainableCount()) throw Error(ErrorKind::DimMismatch, "parameter count mismatch");
  auto it = values.begin();
  auto fill = [&](std::vector<double>& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (std::size_t l = 0; l < dense.size(); ++l) {
    fill(dense[l].weight);
    fill(dense[l].bias);
    if (l < norm.size()) {
      fill(norm[l].scale);
      fill(norm[l].shift);
    }
  }
}

double sampleWeight(const TrainSample& s, const LossWeights& w) {
  const double classWeight = s.label == 1 ? w.rho : 1.0 - w.rho;
  return classWeight * std::pow(w.gamma, std::abs(s.iris - s.gtCosal));
}

double weightedLoss(std::span<const TrainSample> batch, std::span<const std::array<double, 2>> logits,
                    const LossWeights& w) {
  if (batch.size() != logits.size()) throw Error(ErrorKind::DimMismatch, "one logit pair per sample");
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    sum -= sampleWeight(batch[i], w) * logSoftmax(logits[i], batch[i].label);
  return sum / static_cast<double>(batch.size());
}

double trainingLoss(const MlpModel& model, std::span<const TrainSample> batch, const LossWeights& w) {
  const ForwardCache c = forwardTrain(model, batch);
  return weightedLoss(batch, logitPairs(c.logits), w);
}

BatchResult lossAndGradient(const MlpModel& model, std::span<const TrainSample> batch,
                            const LossWeights& w) {
  const std::size_t n = batch.size();
  if (n < 2) throw Error(ErrorKind::InvalidArg, "batch-norm training needs at least two samples");
  ForwardCache c = forwardTrain(model, batch);
  BatchResult r;
  r.loss = weightedLoss(batch, logitPairs(c.logits), w);

  // dL/dz = lambda_i / N * (softmax(z) - onehot(y))
  Matrix grad(n * 2);
  for (std::size_t b = 0; b < n; ++b) {
    const double p1 = probabilityOfOne({c.logits[2 * b], c.logits[2 * b + 1]});
    const double lam = sampleWeight(batch[b], w) / static_cast<double>(n);
    grad[2 * b] = lam * ((1.0 - p1) - (batch[b].label == 0 ? 1.0 : 0.0));
    grad[2 * b + 1] = lam * (p1 - (batch[b].label == 1 ? 1.0 : 0.0));
  }

  const std::size_t layers = model.dense.size();
  std::vector<std::vector<double>> dW(layers), dB(layers), dScale(model.norm.size()), dShift(model.norm.size());
  for (std::size_t li = layers; li-- > 0;) {
    const DenseLayer& d = model.dense[li];
    const Matrix& in = c.inputs[li];
    dW[li].assign(d.weight.size(), 0.0);
    dB[li].assign(d.outputs, 0.0);
    Matrix dIn(n * d.inputs, 0.0);
    for (std::size_t b = 0; b < n; ++b) {
      for (int o = 0; o < d.outputs; ++o) {
        const double g = grad[b * d.outputs + o];
        if (g == 0.0) continue;
        dB[li][o] += g;
        double* dw = dW[li].data() + static_cast<std::size_t>(o) * d.inputs;
        const double* wrow = d.weight.data() + static_cast<std::size_t>(o) * d.inputs;
        const double* x = in.data() + b * d.inputs;
        double* dx = dIn.data() + b * d.inputs;
        for (int i = 0; i < d.inputs; ++i) {
          dw[i] += g * x[i];
          dx[i] += g * wrow[i];
        }
      }
    }
    if (li == 0) break;
    // Back through ReLU and batch-norm of hidden layer li-1.
    const std::size_t l = li - 1;
    const int width = model.dense[l].outputs;
    const BatchNormLayer& bn = model.norm[l];
    dScale[l].assign(width, 0.0);
    dShift[l].assign(width, 0.0);
    Matrix dxhat(n * width);
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) {
        const std::size_t k = b * width + j;
        const double dy = c.normOut[l][k] > 0.0 ? dIn[k] : 0.0;
        dScale[l][j] += dy * c.xhat[l][k];
        dShift[l][j] += dy;
        dxhat[k] = dy * bn.scale[j];
      }
    std::vector<double> sumD(width, 0.0), sumDX(width, 0.0);
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) {
        const std::size_t k = b * width + j;
        sumD[j] += dxhat[k];
        sumDX[j] += dxhat[k] * c.xhat[l][k];
      }
    grad.assign(n * width, 0.0);
    const double nn = static_cast<double>(n);
    for (std::size_t b = 0; b < n; ++b)
      for (int j = 0; j < width; ++j) {
        const std::size_t k = b * width + j;
        grad[k] = c.invStd[l][j] / nn * (nn * dxhat[k] - sumD[j] - c.xhat[l][k] * sumDX[j]);
      }
  }

  r.gradient.values.reserve(model.trainableCount());
  for (std::size_t l = 0; l < layers; ++l) {
    auto& v = r.gradient.values;
    v.insert(v.end(), dW[l].begin(), dW[l].end());
    v.insert(v.end(), dB[l].begin(), dB[l].end());
    if (l < model.norm.size()) {
      v.insert(v.end(), dScale[l].begin(), dScale[l].end());
      v.insert(v.end(), dShift[l].begin(), dShift[l].end());
    }
  }
  r.batchMean = std::move(c.mean);
  r.batchVar = std::move(c.var);
  return r;
}

TrainResult train(std::span<const TrainSample> samples, const TrainConfig& config) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidData, "need at least two training samples");
  bool hasZero = false, hasOne = false;
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw Error(ErrorKind::InvalidData, "labels must be 0 or 1");
    (s.label == 1 ? hasOne : hasZero) = true;
    if (s.x.size() != samples.front().x.size())
      throw Error(ErrorKind::InvalidData, "training descriptors differ in length");
  }
  if (!hasZero || !hasOne) throw Error(ErrorKind::InvalidData, "training set contains a single class");
  if (config.batchSize < 2) throw Error(ErrorKind::InvalidArg, "batch size must be at least 2");

  TrainResult result;
  result.model = MlpModel::create(static_cast<int>(samples.front().x.size()), config.hidden, config.seed);
  MlpModel& model = result.model;
  std::vector<double> params = model.trainable();
  std::vector<double> velocity(params.size(), 0.0);

  // Mask of parameters that receive weight decay (dense weights only).
  std::vector<std::uint8_t> decays;
  decays.reserve(params.size());
  for (std::size_t l = 0; l < model.dense.size(); ++l) {
    decays.insert(decays.end(), model.dense[l].weight.size(), 1);
    decays.insert(decays.end(), model.dense[l].bias.size(), 0);
    if (l < model.norm.size())
      decays.insert(decays.end(), model.norm[l].scale.size() + model.norm[l].shift.size(), 0);
  }

  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainSample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epochLoss = 0.0;
    std::size_t seen = 0;
    for (const auto& idx : makeBatches(order, config.batchSize)) {
      batch.clear();
      for (std::size_t i : idx) batch.push_back(samples[i]);
      const BatchResult r = lossAndGradient(model, batch, config.loss);
      epochLoss += r.loss * static_cast<double>(batch.size());
      seen += batch.size();
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = r.gradient.values[p] + (decays[p] ? config.weightDecay * params[p] : 0.0);
        velocity[p] = config.momentum * velocity[p] - config.learningRate * g;
        params[p] += velocity[p];
      }
      model.setTrainable(params);
      const double mom = config.normMomentum;
      for (std::size_t l = 0; l < model.norm.size(); ++l) {
        auto& bn = model.norm[l];
        for (std::size_t j = 0; j < bn.runningMean.size(); ++j) {
          bn.runningMean[j] = mom * bn.runningMean[j] + (1.0 - mom) * r.batchMean[l][j];
          bn.runningVar[j] = mom * bn.runningVar[j] + (1.0 - mom) * r.batchVar[l][j];
        }
      }
    }
    result.lossTrace.push_back(epochLoss / static_cast<double>(seen));
  }
  return result;
}

double accuracy(const MlpModel& model, std::span<const TrainSample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) correct += ((model.score(s.x) >= 0.5 ? 1 : 0) == s.label) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

SegmentField scoreSegments(const MlpModel& model, const std::vector<SegmentDescriptor>& descriptors) {
  SegmentField f;
  f.scaleTag = static_cast<int>(descriptors.size());
  f.values.reserve(descriptors.size());
  for (const auto& d : descriptors) f.values.push_back(model.score(d.concatenated()));
  return f;
}

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return aa > 0.0 && bb > 0.0 ? ab / std::sqrt(aa * bb) : 0.0;
}

}  // namespace

std::vector<SegmentField> heuristicScores(const std::vector<std::vector<SegmentDescriptor>>& group,
                                          const DescriptorLayout& layout) {
  const std::size_t high = static_cast<std::size_t>(layout.highDim);
  const std::size_t segHist = high + 5;
  const std::size_t gfgHist = high + 7;
  std::vector<std::vector<double>> sims(group.size());
  double maxSim = 0.0;
  for (std::size_t m = 0; m < group.size(); ++m) {
    for (const auto& d : group[m]) {
      double s = cosine(std::span(d.seg).subspan(segHist, kHistBins),
                        std::span(d.gfg).subspan(gfgHist, kHistBins));
      if (high > 0)
        s = 0.5 * s + 0.5 * std::max(0.0, cosine(std::span(d.seg).subspan(0, high),
                                                 std::span(d.gfg).subspan(0, high)));
      sims[m].push_back(s);
      maxSim = std::max(maxSim, s);
    }
  }
  constexpr double slope = 10.0;
  std::vector<SegmentField> out(group.size());
  for (std::size_t m = 0; m < group.size(); ++m) {
    out[m].scaleTag = static_cast<int>(sims[m].size());
    for (double s : sims[m]) {
      const double rel = maxSim > 0.0 ? s / maxSim : 0.0;
      out[m].values.push_back(1.0 / (1.0 + std::exp(-slope * (rel - 0.5))));
    }
  }
  return out;
}

std::vector<int> topTenPercent(std::span<const double> values) {
  const std::size_t n = values.size();
  const auto take = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n) - 1e-12));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] > values[b]; });
  idx.resize(std::min(take, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SegmentField refineIeis(const SegmentedImage& seg, const RankingSolver& intraSolver,
                        const SegmentField& raw, double eta) {
  const std::size_t n = static_cast<std::size_t>(seg.segmentCount);
  if (raw.size() != n || static_cast<std::size_t>(intraSolver.size()) != n)
    throw Error(ErrorKind::DimMismatch, "raw IeIS field does not match the segmentation");
  SeedVector fg(n, SeedRole::Foreground), bg(n, SeedRole::Background);
  for (int i : topTenPercent(raw.values))
    if (raw.values[i] > 0.5) fg.values[i] = 1;
  for (std::size_t i = 0; i < n; ++i) bg.values[i] = seg.boundaryFlags[i];
  if (!fg.any()) return raw;

  SegmentField es;
  es.scaleTag = raw.scaleTag;
  es.values = propagate(intraSolver, fg, bg, eta);
  return es;
}

SegmentField refineIeis(const SegmentedImage& seg, const SegmentField& raw, double alpha, double eta) {
  const RankingSolver solver(intraGraph(seg), alpha);
  return refineIeis(seg, solver, raw, eta);
}

void saveModel(const MlpModel& model, const std::filesystem::path& basePath) {
  model.validate();
  nlohmann::json header;
  header["format"] = "cosal-mlp";
  header["version"] = 1;
  header["inputDim"] = model.inputDim;
  header["hidden"] = model.hidden;
  header["batchNormEpsilon"] = kBatchNormEpsilon;
  FeatureTensor t;
  nlohmann::json tensors = nlohmann::json::array();
  auto add = [&](const std::string& name, const std::vector<double>& v, std::vector<int> shape) {
    tensors.push_back({{"name", name}, {"shape", shape}, {"offset", t.data.size()}});
    for (double x : v) t.data.push_back(static_cast<float>(x));
  };
  for (std::size_t l = 0; l < model.dense.size(); ++l) {
    const auto& d = model.dense[l];
    const std::string p = "dense" + std::to_string(l);
    add(p + ".weight", d.weight, {d.outputs, d.inputs});
    add(p + ".bias", d.bias, {d.outputs});
    if (l < model.norm.size()) {
      const auto& b = model.norm[l];
      const std::string q = "norm" + std::to_string(l);
      const int w = static_cast<int>(b.scale.size());
      add(q + ".scale", b.scale, {w});
      add(q + ".shift", b.shift, {w});
      add(q + ".runningMean", b.runningMean, {w});
      add(q + ".runningVar", b.runningVar, {w});
    }
  }
  header["tensors"] = tensors;
  t.gridHeight = 1;
  t.gridWidth = static_cast<int>(t.data.size());
  t.channels = 1;
  std::filesystem::path weights = basePath, sidecar = basePath;
  weights.replace_extension(".csgt");
  sidecar.replace_extension(".json");
  saveTensor(t, weights);
  const std::string text = header.dump(2) + "\n";
  writeFileBytes(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

MlpModel loadModel(const std::filesystem::path& basePath) {
  std::filesystem::path weights = basePath, sidecar = basePath;
  weights.replace_extension(".csgt");
  sidecar.replace_extension(".json");
  const auto bytes = readFileBytes(sidecar);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, sidecar.string() + ": " + e.what());
  }
  if (!header.contains("version") || header.value("format", "") != "cosal-mlp")
    throw Error(ErrorKind::Format, sidecar.string() + ": not a model header");
  if (header["version"].get<int>() != 1)
    throw Error(ErrorKind::Format, sidecar.string() + ": unsupported model version");

  const FeatureTensor t = loadTensor(weights);
  MlpModel m = MlpModel::create(header.at("inputDim").get<int>(), header.at("hidden").get<std::vector<int>>(), 0);
  std::size_t cursor = 0;
  auto take = [&](std::vector<double>& dst) {
    if (cursor + dst.size() > t.data.size()) throw Error(ErrorKind::Format, "model weights truncated");
    for (double& v : dst) v = t.data[cursor++];
  };
  for (std::size_t l = 0; l < m.dense.size(); ++l) {
    take(m.dense[l].weight);
    take(m.dense[l].bias);
    if (l < m.norm.size()) {
      take(m.norm[l].scale);
      take(m.norm[l].shift);
      take(m.norm[l].runningMean);
      take(m.norm[l].runningVar);
    }
  }
  if (cursor != t.data.size()) throw Error(ErrorKind::Format, "model weights have trailing values");
  m.validate();
  return m;
}

}  // namespace cosal
