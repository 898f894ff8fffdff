#include <atomic>
#include <stdexcept>

#include "doctest.h"

#include "cosal/error.hpp"
#include "cosal/eval.hpp"
#include "cosal/parallel.hpp"
#include "cosal/pipeline.hpp"
#include "synthetic.hpp"

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

testing::SyntheticOptions small() {
  testing::SyntheticOptions o;
  o.width = 96;
  o.height = 96;
  o.imageCount = 4;
  return o;
}

PipelineConfig quickConfig() {
  PipelineConfig c;
  c.scales = {120, 60};
  c.params.clusters = 40;
  return c;
}

std::vector<ScalarMap> pixelMaps(const GroupContext& ctx) {
  std::vector<ScalarMap> out;
  for (std::size_t m = 0; m < ctx.imageCount(); ++m)
    out.push_back(segmentFieldToPixels(ctx.images[m], ctx.cosaliency[m]));
  return out;
}

}  // namespace

TEST_CASE("parallelFor visits every index and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(100);
  parallelFor(100, 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h.load() == 1);

  try {
    parallelFor(50, 4, [](std::size_t i) {
      if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
}

TEST_CASE("fallbackIris ranks the object above the border") {
  const testing::SyntheticGroup g = testing::makeGroup(3, small());
  const auto& img = g.images[0];
  const SegmentedImage seg = slic(rgbToLab(img.image), 120);
  const SegmentField rs = fallbackIris(seg);
  double inside = 0.0, border = 0.0;
  int nIn = 0, nBorder = 0;
  for (int i = 0; i < seg.segmentCount; ++i) {
    CHECK((rs.values[i] >= 0.0 && rs.values[i] <= 1.0));
    const auto& p = seg.meanPos[i];
    const bool onObject = img.common.contains(p[0] * (seg.width() - 1), p[1] * (seg.height() - 1));
    if (onObject) inside += rs.values[i], ++nIn;
    if (seg.boundaryFlags[i] && !onObject) border += rs.values[i], ++nBorder;
  }
  REQUIRE(nIn > 0);
  REQUIRE(nBorder > 0);
  CHECK(inside / nIn > border / nBorder);
}

TEST_CASE("runGroup on a synthetic group") {
  const testing::SyntheticGroup g = testing::makeGroup(5, small());
  const GroupContext ctx = runGroup(g.input(), quickConfig());
  REQUIRE(ctx.imageCount() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    const std::size_t n = static_cast<std::size_t>(ctx.images[m].segmentCount);
    CHECK(ctx.iris[m].size() == n);
    CHECK(ctx.ieis[m].size() == n);
    CHECK(ctx.initial[m].size() == n);
    CHECK(ctx.auxiliary[m].size() == n);
    CHECK(ctx.cosaliency[m].size() == n);
    for (double v : ctx.cosaliency[m].values) CHECK((v >= 0.0 && v <= 1.0));
  }
  const MetricReport r = evaluate(pixelMaps(ctx), g.groundTruth());
  CHECK(r.ap > 0.9);
  CHECK(r.fmeasure > 0.85);
}

TEST_CASE("runGroup is deterministic across worker counts") {
  const testing::SyntheticGroup g = testing::makeGroup(6, small());
  PipelineConfig one = quickConfig();
  PipelineConfig four = quickConfig();
  four.workers = 4;
  const GroupContext a = runGroup(g.input(), one);
  const GroupContext b = runGroup(g.input(), four);
  for (std::size_t m = 0; m < a.imageCount(); ++m) {
    CHECK(a.images[m].labels == b.images[m].labels);
    CHECK(a.cosaliency[m].values == b.cosaliency[m].values);
  }
}

TEST_CASE("runGroup without IrIS maps and with a model") {
  const testing::SyntheticGroup g = testing::makeGroup(7, small());
  GroupInput input = g.input();
  input.iris.clear();
  PipelineConfig cfg = quickConfig();
  const GroupContext ctx = runGroup(input, cfg);
  CHECK(ctx.cosaliency.size() == 4);

  cfg.model = MlpModel::create(layoutFor(g.input()).totalDim(), {8, 4}, 1);
  const GroupContext learned = runGroup(g.input(), cfg);
  for (const auto& f : learned.ieis)
    for (double v : f.values) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("input validation") {
  const testing::SyntheticGroup g = testing::makeGroup(8, small());
  PipelineConfig cfg = quickConfig();
  CHECK(kindOf([&] { runGroup(GroupInput{}, cfg); }) == ErrorKind::InvalidArg);

  GroupInput tooFewMaps = g.input();
  tooFewMaps.iris.pop_back();
  CHECK(kindOf([&] { runGroup(tooFewMaps, cfg); }) == ErrorKind::DimMismatch);

  GroupInput tiny = g.input();
  tiny.images[0].width = 4;
  tiny.images[0].height = 4;
  tiny.images[0].data.resize(48);
  CHECK(kindOf([&] { runGroup(tiny, cfg); }) == ErrorKind::InvalidArg);

  cfg.scales = {60, 120};
  CHECK(kindOf([&] { runGroup(g.input(), cfg); }) == ErrorKind::InvalidArg);
}
