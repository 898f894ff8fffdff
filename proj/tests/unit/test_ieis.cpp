#include <cmath>
#include <random>

#include "doctest.h"

#include "cosal/error.hpp"
#include "cosal/ieis.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cosal;

namespace {

ErrorKind kindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::vector<TrainSample> randomBatch(int size, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainSample> batch(size);
  for (auto& s : batch) {
    for (int d = 0; d < dim; ++d) s.x.push_back(g(rng));
    s.gtCosal = u(rng);
    s.label = s.gtCosal >= 0.5 ? 1 : 0;
    s.iris = u(rng);
  }
  return batch;
}

}  // namespace

TEST_CASE("score is the softmax of the two logits") {
  MlpModel m = MlpModel::create(3, {4}, 1);
  auto& last = m.dense.back();
  std::fill(last.weight.begin(), last.weight.end(), 0.0);
  last.bias = {0.3, 0.3};
  CHECK(m.score(std::vector<double>{1, 2, 3}) == 0.5);
  last.bias = {0.0, 50.0};
  CHECK(1.0 - m.score(std::vector<double>{1, 2, 3}) < 1e-20);
  CHECK(kindOf([&] { m.score(std::vector<double>{1, 2}); }) == ErrorKind::DimMismatch);
}

TEST_CASE("tiny model forward pass") {
  MlpModel m = MlpModel::create(1, {2}, 0);
  m.dense[0].weight = {1.0, -2.0};
  m.dense[0].bias = {0.5, 0.5};
  m.norm[0].runningMean = {0.5, 0.0};
  m.norm[0].runningVar = {1.0, 4.0};
  m.norm[0].scale = {2.0, 1.0};
  m.norm[0].shift = {0.0, 0.25};
  m.dense[1].weight = {1.0, 0.0, 0.5, 1.0};
  m.dense[1].bias = {0.0, 0.1};

  const double a0 = 1.5, a1 = -1.5;
  const double h0 = std::max(0.0, 2.0 * (a0 - 0.5) / std::sqrt(1.0 + 1e-5));
  const double h1 = std::max(0.0, (a1 - 0.0) / std::sqrt(4.0 + 1e-5) + 0.25);
  const double z0 = h0, z1 = 0.5 * h0 + h1 + 0.1;
  const auto z = m.logits(std::vector<double>{1.0});
  CHECK(z[0] == doctest::Approx(z0).epsilon(1e-14));
  CHECK(z[1] == doctest::Approx(z1).epsilon(1e-14));
  CHECK(m.score(std::vector<double>{1.0}) == doctest::Approx(1.0 / (1.0 + std::exp(z0 - z1))).epsilon(1e-14));
}

TEST_CASE("weighted loss closed forms") {
  const LossWeights w{0.7, 3.0};
  TrainSample s;
  s.x = {0.0};
  s.label = 1;
  s.iris = 0.4;
  s.gtCosal = 0.4;
  CHECK(sampleWeight(s, w) == doctest::Approx(0.7));
  const std::vector<TrainSample> one = {s};
  const std::vector<std::array<double, 2>> even = {{{0.2, 0.2}}};
  CHECK(weightedLoss(one, even, w) == doctest::Approx(0.7 * std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(weightedLoss(one, even, w) - 0.4852) < 1e-4);

  s.iris = 0.0;
  s.gtCosal = 1.0;
  const std::vector<TrainSample> far = {s};
  CHECK(sampleWeight(s, w) == doctest::Approx(2.1));
  CHECK(std::abs(weightedLoss(far, even, w) - 1.4556) < 1e-4);

  s.label = 0;
  s.iris = s.gtCosal = 0.0;
  const std::vector<TrainSample> neg = {s};
  const std::vector<std::array<double, 2>> confident = {{{50.0, 0.0}}};
  CHECK(weightedLoss(neg, confident, w) < 1e-20);
  CHECK(weightedLoss(neg, confident, w) >= 0.0);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(17);
  const LossWeights w{0.7, 3.0};
  for (int trial = 0; trial < 5; ++trial) {
    const MlpModel m = MlpModel::create(5, {6, 4}, rng());
    const auto batch = randomBatch(7, 5, rng);
    const BatchResult r = lossAndGradient(m, batch, w);
    CHECK(r.loss == doctest::Approx(trainingLoss(m, batch, w)).epsilon(1e-12));
    const auto numeric = testing::finiteDifferenceGradient(m, batch, w, 1e-5);
    const double resolution = testing::finiteDifferenceResolution(r.loss, 1e-5);
    // Below this magnitude a 1e-4 relative check cannot be resolved.
    const auto cmp = testing::compareGradients(r.gradient.values, numeric, 1e4 * resolution);
    CHECK(cmp.maxRelative < 1e-4);
    CHECK(cmp.maxTinyAbsolute < 4 * resolution);
  }
}

TEST_CASE("train separates a linear toy set") {
  const auto samples = testing::separableSamples(200, 3);
  REQUIRE(testing::linearlySeparable(samples));
  TrainConfig cfg;
  cfg.hidden = {16, 8};
  cfg.epochs = 200;
  cfg.learningRate = 0.01;
  const TrainResult r = train(samples, cfg);
  CHECK(r.lossTrace.size() == 200);
  CHECK(accuracy(r.model, samples) >= 0.99);
  CHECK(r.lossTrace.back() < r.lossTrace.front());

  std::vector<TrainSample> single = samples;
  for (auto& s : single) s.label = 1;
  CHECK(kindOf([&] { train(single, cfg); }) == ErrorKind::InvalidData);
}

TEST_CASE("topTenPercent rounds up and breaks ties by index") {
  CHECK(topTenPercent(std::vector<double>(10, 0.9)) == std::vector<int>{0});
  CHECK(topTenPercent(std::vector<double>(11, 0.9)) == std::vector<int>{0, 1});
  std::vector<double> v = {0.1, 0.8, 0.3, 0.8, 0.9, 0.2, 0.0, 0.5, 0.6, 0.7, 0.8, 0.1, 0.2, 0.3, 0.4};
  CHECK(topTenPercent(v) == std::vector<int>{1, 4});
  CHECK(topTenPercent(std::vector<double>{}).empty());
}

TEST_CASE("refineIeis on a ten-segment chain matches the dense solve") {
  const SegmentedImage seg = testing::chainSegmentation(10);
  REQUIRE(seg.segmentCount == 10);
  SegmentField raw{std::vector<double>(10, 0.1), 10};
  raw.values[4] = 0.9;
  const double alpha = 0.95, eta = 2.0;
  const SegmentField es = refineIeis(seg, raw, alpha, eta);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(10, 10);
  for (int i = 0; i + 1 < 10; ++i) w(i, i + 1) = w(i + 1, i) = 1.0;
  Eigen::VectorXd yf = Eigen::VectorXd::Zero(10), yb = Eigen::VectorXd::Zero(10);
  yf[4] = 1.0;
  yb[0] = yb[9] = 1.0;
  const Eigen::VectorXd f = testing::denseRank(w, alpha, yf);
  const Eigen::VectorXd b = testing::denseRank(w, alpha, yb);
  std::vector<double> ref(10);
  for (int i = 0; i < 10; ++i) {
    const double den = f[i] + eta * b[i];
    ref[i] = den > 0.0 ? (f[i] - eta * b[i]) / den : 0.0;
  }
  const double lo = *std::min_element(ref.begin(), ref.end()), hi = *std::max_element(ref.begin(), ref.end());
  for (double& x : ref) x = (x - lo) / (hi - lo);
  for (int i = 0; i < 10; ++i) CHECK(es.values[i] == doctest::Approx(ref[i]).epsilon(1e-9));

  // Seeds lose their own contribution, so the response peaks next to the
  // foreground seed and decays across the unseeded segments toward the ends.
  CHECK(es.values[4] == 0.0);
  for (int i = 3; i > 1; --i) CHECK(es.values[i] > es.values[i - 1]);
  for (int i = 5; i < 8; ++i) CHECK(es.values[i] > es.values[i + 1]);
  for (double x : es.values) CHECK((x >= 0.0 && x <= 1.0));
}

TEST_CASE("refineIeis seed rules and fallback") {
  const SegmentedImage seg = slic(rgbToLab(testing::texturedImage(48, 48, 30)), 40);
  const int n = seg.segmentCount;
  const SegmentField low{std::vector<double>(n, 0.4), n};
  CHECK(refineIeis(seg, low, 0.95, 2.0).values == low.values);

  const SegmentField flat{std::vector<double>(n, 0.9), n};
  const SegmentField es = refineIeis(seg, flat, 0.95, 2.0);
  CHECK(es.values.size() == static_cast<std::size_t>(n));
  for (double x : es.values) CHECK((x >= 0.0 && x <= 1.0));
  CHECK(refineIeis(seg, flat, 0.95, 2.0).values == es.values);

  const SegmentField wrong{std::vector<double>(n + 1, 0.9), n + 1};
  CHECK(kindOf([&] { refineIeis(seg, wrong, 0.95, 2.0); }) == ErrorKind::DimMismatch);
}

TEST_CASE("scoreSegments and the heuristic scorer stay in (0,1)") {
  const SegmentedImage seg = slic(rgbToLab(testing::texturedImage(40, 40, 31)), 25);
  std::vector<double> rs(seg.segmentCount, 0.0);
  rs[2] = rs[7] = 1.0;
  DescriptorLayout layout;
  ForegroundPool pool = buildForegroundPool({extractForegrounds(seg, SegmentField{rs, seg.segmentCount}, nullptr, 0)}, layout);
  const auto d = buildDescriptors(seg, nullptr, pool, 0);
  const MlpModel m = MlpModel::create(layout.totalDim(), {8, 4}, 5);
  for (double v : scoreSegments(m, d).values) CHECK((v > 0.0 && v < 1.0));
  const auto h = heuristicScores({d}, layout);
  REQUIRE(h.size() == 1);
  for (double v : h[0].values) CHECK((v > 0.0 && v < 1.0));
}

TEST_CASE("model files round trip at single precision") {
  const auto dir = testing::scratchDir("ieis_model");
  MlpModel m = MlpModel::create(6, {5, 3}, 9);
  m.norm[0].runningVar[1] = 2.5;
  saveModel(m, dir / "model");
  const MlpModel back = loadModel(dir / "model");
  CHECK(back.hidden == m.hidden);
  const auto a = m.trainable(), b = back.trainable();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == static_cast<double>(static_cast<float>(a[k])));
  CHECK(back.norm[0].runningVar[1] == 2.5);
  const std::vector<double> x = {0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
  CHECK(back.score(x) == doctest::Approx(m.score(x)).epsilon(1e-5));

  writeFileBytes(dir / "bad.json", std::vector<std::uint8_t>{'{', '}'});
  saveTensor(FeatureTensor{1, 1, 1, {0.0f}, 1, 1}, dir / "bad.csgt");
  CHECK(kindOf([&] { loadModel(dir / "bad"); }) == ErrorKind::Format);
}
