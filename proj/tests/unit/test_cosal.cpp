#include <cmath>
#include <random>

#include "doctest.h"

#include "cosal/cosal.hpp"
#include "cosal/error.hpp"
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

SegmentedImage grid4() { return testing::blockSegmentation(testing::uniformLab(16, 16, {0.5, 0.5, 0.5}), 4, 4); }

struct ToyGroup {
  std::vector<SegmentedImage> images;
  std::vector<SegmentField> initial;
  ClusterLayer layer;
  AffinityGraph graph;
};

ToyGroup toyGroup(std::uint64_t seed, int k) {
  ToyGroup g;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<AffinityGraph> intra;
  std::vector<std::array<double, 3>> colors;
  for (int m = 0; m < 2; ++m) {
    g.images.push_back(slic(rgbToLab(testing::texturedImage(40, 40, seed * 7 + m)), 20));
    const auto& s = g.images.back();
    intra.push_back(intraGraph(s));
    colors.insert(colors.end(), s.meanLab.begin(), s.meanLab.end());
    SegmentField ic{{}, s.segmentCount};
    for (int i = 0; i < s.segmentCount; ++i) ic.values.push_back(u(rng));
    // Guarantee one interior co-saliency seed per image.
    for (int i = 0; i < s.segmentCount; ++i)
      if (!s.boundaryFlags[i]) {
        ic.values[i] = 1.0;
        break;
      }
    g.initial.push_back(ic);
  }
  g.layer = buildClusterLayer(colors, k, seed);
  g.graph = integratedGraph(intra, colors, g.layer, 0.25, 5);
  return g;
}

}  // namespace

TEST_CASE("initialCosal closed forms") {
  CHECK(initialCosal(0.9, 0.2, 0.5) == doctest::Approx(0.18).epsilon(1e-15));
  CHECK(initialCosal(0.5, 0.5, 0.5) == 0.5);
  CHECK(initialCosal(0.2, 0.6, 0.5) == doctest::Approx(0.36).epsilon(1e-15));
  // delta exactly at tau takes the residual branch.
  CHECK(initialCosal(0.75, 0.25, 0.5) == doctest::Approx(0.1875).epsilon(1e-15));

  const SegmentField rs{{0.9, 0.2}, 2}, es{{0.2, 0.6}, 2};
  const SegmentField ic = initialCosal(rs, es, 0.5);
  CHECK(ic.values[0] == doctest::Approx(0.18));
  CHECK(ic.values[1] == doctest::Approx(0.36));
  CHECK(kindOf([&] { initialCosal(rs, es, 1.0); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { initialCosal(rs, SegmentField{{0.1}, 1}, 0.5); }) == ErrorKind::DimMismatch);
}

TEST_CASE("initialCosal stays in [0,1]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = initialCosal(u(rng), u(rng), 0.01 + 0.98 * u(rng));
    CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("group seeds exclude boundary nodes from both sets") {
  const std::vector<SegmentedImage> images = {grid4()};
  SegmentField ic{std::vector<double>(16, 0.1), 16};
  ic.values[0] = 0.95;  // boundary and top
  ic.values[5] = 0.9;   // interior and top
  const GroupSeeds s = extractGroupSeeds(images, std::vector<SegmentField>{ic}, 3);
  REQUIRE(s.cosal.values.size() == 19);
  CHECK(s.cosal.count() == 1);
  CHECK(s.cosal.values[5] == 1);
  CHECK(s.cosal.values[0] == 0);
  CHECK(s.background.values[0] == 0);
  CHECK(s.background.values[1] == 1);
  CHECK(s.background.values[10] == 0);
  CHECK(s.background.count() == 11);
  for (int i = 16; i < 19; ++i) CHECK((s.cosal.values[i] == 0 && s.background.values[i] == 0));

  SegmentField edgeOnly{std::vector<double>(16, 0.1), 16};
  edgeOnly.values[0] = edgeOnly.values[1] = 1.0;
  CHECK(kindOf([&] { extractGroupSeeds(images, std::vector<SegmentField>{edgeOnly}, 3); }) ==
        ErrorKind::DegenerateSeeds);
}

TEST_CASE("auxiliaryCosal matches the dense reference") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ToyGroup g = toyGroup(seed, 3);
    for (const auto& s : g.images) REQUIRE(s.segmentCount <= 30);
    const RankingSolver solver(g.graph, 0.95);
    const GroupSeeds seeds = extractGroupSeeds(g.images, g.initial, 3);
    const auto ac = auxiliaryCosal(solver, *g.graph.partition, seeds, 2.0, AuxNormalization::MinMax);
    std::vector<std::vector<double>> initial;
    for (const auto& f : g.initial) initial.push_back(f.values);
    const auto ref = testing::denseAuxiliary(g.images, initial, g.layer.centroids, g.layer.assignment, 0.95, 2.0,
                                             0.25, 5);
    REQUIRE(ac.size() == ref.size());
    for (std::size_t m = 0; m < ac.size(); ++m)
      for (std::size_t i = 0; i < ref[m].size(); ++i) CHECK(std::abs(ac[m].values[i] - ref[m][i]) < 1e-8);

    const auto half = auxiliaryCosal(solver, *g.graph.partition, seeds, 2.0, AuxNormalization::HalfShift);
    for (const auto& f : half)
      for (double v : f.values) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("fuseMax and post-processing") {
  const SegmentField ic{{0.2, 0.9}, 2}, ac{{0.5, 0.1}, 2};
  CHECK(fuseMax(ic, ac).values == std::vector<double>{0.5, 0.9});

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SegmentedImage seg = slic(rgbToLab(testing::texturedImage(64, 48, 6)), 40);
  for (int trial = 0; trial < 50; ++trial) {
    SegmentField cs{{}, seg.segmentCount};
    for (int i = 0; i < seg.segmentCount; ++i) cs.values.push_back(u(rng));
    const SegmentField out = postprocess(seg, cs);
    for (int i = 0; i < seg.segmentCount; ++i) CHECK(out.values[i] <= cs.values[i]);
  }

  SegmentField zeros{std::vector<double>(seg.segmentCount, 0.0), seg.segmentCount};
  for (double v : postprocess(seg, zeros).values) CHECK(v == 0.0);
  CHECK(kindOf([&] { postprocess(seg, zeros, 0.0); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { postprocess(seg, SegmentField{{0.1}, 1}); }) == ErrorKind::DimMismatch);
}

TEST_CASE("post-processing favours segments near the weighted centre") {
  const SegmentedImage seg = grid4();
  SegmentField cs{std::vector<double>(16, 1.0), 16};
  const SegmentField out = postprocess(seg, cs);
  CHECK(out.values[5] > out.values[0]);
  CHECK(out.values[5] == doctest::Approx(out.values[10]));
  CHECK(out.values[0] == doctest::Approx(out.values[15]));
}

TEST_CASE("toCosegMask thresholds per segment") {
  const SegmentedImage seg = grid4();
  SegmentField cs{std::vector<double>(16, 0.2), 16};
  cs.values[5] = 0.5;
  const BinaryMask mask = toCosegMask(seg, cs);
  CHECK(mask.count() == 16);
  CHECK(mask.values[4 * 16 + 4] == 1);
  CHECK(toCosegMask(seg, cs, 0.6).count() == 0);
}

TEST_CASE("completeGroup fills every stage") {
  const ToyGroup g = toyGroup(9, 3);
  GroupContext ctx;
  ctx.params.clusters = 3;
  ctx.images = g.images;
  ctx.initial = g.initial;
  completeGroup(ctx);
  REQUIRE(ctx.auxiliary.size() == 2);
  REQUIRE(ctx.cosaliency.size() == 2);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < ctx.cosaliency[m].size(); ++i) {
      const double v = ctx.cosaliency[m].values[i];
      CHECK((v >= 0.0 && v <= 1.0));
      CHECK(v <= std::max(ctx.initial[m].values[i], ctx.auxiliary[m].values[i]));
    }

  GroupContext empty;
  empty.images = g.images;
  CHECK(kindOf([&] { completeGroup(empty); }) == ErrorKind::InvalidArg);
}
