#include <cmath>
#include <random>

#include "doctest.h"

#include "cosal/error.hpp"
#include "cosal/graph.hpp"
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

std::vector<std::array<double, 3>> colorsOf(std::span<const SegmentedImage> images) {
  std::vector<std::array<double, 3>> out;
  for (const auto& s : images) out.insert(out.end(), s.meanLab.begin(), s.meanLab.end());
  return out;
}

}  // namespace

TEST_CASE("fromEdges builds a symmetric matrix with degrees") {
  const std::vector<Edge> edges = {{0, 1, 0.5}, {2, 1, 0.25}};
  const AffinityGraph g = AffinityGraph::fromEdges(4, edges);
  CHECK(g.weight(0, 1) == 0.5);
  CHECK(g.weight(1, 0) == 0.5);
  CHECK(g.weight(1, 2) == 0.25);
  CHECK(g.weight(0, 0) == 0.0);
  CHECK(g.degrees[1] == 0.75);
  CHECK(g.degrees[3] == kIsolatedDegree);
  CHECK(g.toCoordinateList() == "0 1 0.5\n1 0 0.5\n1 2 0.25\n2 1 0.25\n");

  CHECK(kindOf([] { AffinityGraph::fromEdges(2, std::vector<Edge>{{1, 1, 0.5}}); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([] { AffinityGraph::fromEdges(2, std::vector<Edge>{{0, 1, 1.5}}); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([] { AffinityGraph::fromEdges(2, std::vector<Edge>{{0, 2, 0.5}}); }) == ErrorKind::InvalidArg);
}

TEST_CASE("edge covariance is the second moment plus a ridge") {
  const std::vector<std::array<double, 3>> diffs = {{1, 0, 0}, {-1, 0, 0}, {0, 2, 0}};
  const Eigen::Matrix3d s = regularizedEdgeCovariance(diffs);
  const double ridge = 1e-6 * 2.0 / 3.0 + 1e-12;
  CHECK(s(0, 0) == doctest::Approx(2.0 / 3.0 + ridge).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(4.0 / 3.0 + ridge).epsilon(1e-15));
  CHECK(s(2, 2) == doctest::Approx(ridge).epsilon(1e-15));
  CHECK(s(0, 1) == 0.0);

  const std::vector<std::array<double, 3>> zeros = {{0, 0, 0}};
  CHECK(regularizedEdgeCovariance(zeros)(1, 1) == 1e-12);
}

TEST_CASE("intraGraph matches the dense reference") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const SegmentedImage seg = slic(rgbToLab(testing::texturedImage(60, 48, seed)), 40);
    const AffinityGraph g = intraGraph(seg);
    const Eigen::MatrixXd dense = testing::denseIntraWeights(seg);
    CHECK((testing::toDense(g) - dense).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < seg.segmentCount; ++i)
      for (int j = 0; j < seg.segmentCount; ++j) {
        const bool adjacent = std::binary_search(seg.adjacency[i].begin(), seg.adjacency[i].end(), j);
        if (!adjacent) CHECK(g.weight(i, j) == 0.0);
        else CHECK((g.weight(i, j) > 0.0 && g.weight(i, j) <= 1.0));
      }
  }
}

TEST_CASE("intraGraph on a uniform image and on one segment") {
  const SegmentedImage blocks = testing::blockSegmentation(testing::uniformLab(12, 12, {0.3, 0.3, 0.3}), 3, 3);
  const AffinityGraph g = intraGraph(blocks);
  CHECK(g.weight(0, 1) == 1.0);
  CHECK(g.weight(0, 4) == 0.0);
  CHECK(g.degrees[4] == 4.0);

  const SegmentedImage one = testing::blockSegmentation(testing::uniformLab(8, 8, {0.3, 0.3, 0.3}), 1, 1);
  CHECK(kindOf([&] { intraGraph(one); }) == ErrorKind::InvalidArg);
}

TEST_CASE("buildClusterLayer") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> jitter(0.0, 0.01);
  const std::array<std::array<double, 3>, 3> centers = {{{0.1, 0.1, 0.1}, {0.5, 0.9, 0.2}, {0.9, 0.3, 0.8}}};
  std::vector<std::array<double, 3>> points;
  for (int i = 0; i < 60; ++i) {
    const auto& c = centers[i % 3];
    points.push_back({c[0] + jitter(rng), c[1] + jitter(rng), c[2] + jitter(rng)});
  }
  const ClusterLayer a = buildClusterLayer(points, 3, 7);
  const ClusterLayer b = buildClusterLayer(points, 3, 7);
  CHECK(a.assignment == b.assignment);
  CHECK(a.centroids == b.centroids);
  for (int i = 3; i < 60; ++i) CHECK(a.assignment[i] == a.assignment[i % 3]);
  CHECK(a.assignment[0] != a.assignment[1]);
  CHECK(a.assignment[1] != a.assignment[2]);
  CHECK(a.assignment[0] != a.assignment[2]);

  const std::vector<std::array<double, 3>> same(5, {0.5, 0.5, 0.5});
  const ClusterLayer c = buildClusterLayer(same, 3, 1);
  std::vector<int> counts(3, 0);
  for (int x : c.assignment) ++counts[x];
  for (int x : counts) CHECK(x > 0);

  CHECK(kindOf([&] { buildClusterLayer(same, 6, 1); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { buildClusterLayer(same, 1, 1); }) == ErrorKind::InvalidArg);
}

TEST_CASE("integratedGraph matches the dense block matrix") {
  std::vector<SegmentedImage> images;
  for (std::uint64_t s = 0; s < 3; ++s) images.push_back(slic(rgbToLab(testing::texturedImage(40, 40, 20 + s)), 20));
  std::vector<AffinityGraph> intra;
  for (const auto& s : images) intra.push_back(intraGraph(s));
  const auto colors = colorsOf(images);
  for (int knn : {1, 3, 10}) {
    const ClusterLayer layer = buildClusterLayer(colors, 6, 3);
    const AffinityGraph g = integratedGraph(intra, colors, layer, 0.1, knn);
    const Eigen::MatrixXd dense = testing::denseIntegratedWeights(images, layer.centroids, layer.assignment, 0.1, knn);
    REQUIRE(g.size == dense.rows());
    CHECK((testing::toDense(g) - dense).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(g.partition.has_value());
    CHECK(g.partition->imageCount() == 3);
    CHECK(g.partition->clusterCount == 6);
    CHECK(g.partition->clusterOffset == static_cast<int>(colors.size()));
  }
  const ClusterLayer layer = buildClusterLayer(colors, 6, 3);
  CHECK(kindOf([&] { integratedGraph(intra, colors, layer, 0.0, 3); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { integratedGraph(intra, colors, layer, 0.1, 0); }) == ErrorKind::InvalidArg);
}

TEST_CASE("RankingSolver agrees with a dense inverse") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 60);
    const AffinityGraph g = testing::randomConnectedGraph(n, 1.5, rng);
    const Eigen::MatrixXd w = testing::toDense(g);
    for (double alpha : {0.5, 0.99}) {
      const RankingSolver solver(g, alpha);
      SeedVector seeds(n, SeedRole::Foreground);
      for (int i = 0; i < n; ++i) seeds.values[i] = rng() % 5 == 0;
      seeds.values[0] = 1;
      const Eigen::VectorXd y = seeds.asVector();
      const Eigen::VectorXd ref = testing::denseRank(w, alpha, y);
      const Eigen::VectorXd f = solver.rank(y);
      CHECK((f - ref).norm() / ref.norm() < 1e-9);
      CHECK(solver.residualInf(solver.solve(y), y) < 1e-8);

      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) d(i, i) = w.row(i).sum();
      const Eigen::MatrixXd inv = (d - alpha * w).inverse();
      CHECK(solver.inverseDiagonal(n - 1) == doctest::Approx(inv(n - 1, n - 1)).epsilon(1e-9));
    }
  }
  const AffinityGraph g = AffinityGraph::fromEdges(2, std::vector<Edge>{{0, 1, 1.0}});
  CHECK(kindOf([&] { RankingSolver(g, 1.0); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { RankingSolver(g, 0.0); }) == ErrorKind::InvalidArg);
}

TEST_CASE("contrastRatio and minMaxNormalize") {
  const std::vector<double> f = {0.0, 1.0, 2.0, 0.0};
  const std::vector<double> b = {0.0, 1.0, 0.0, 3.0};
  const auto c = contrastRatio(f, b, 1.0);
  CHECK(c == std::vector<double>{0.0, 0.0, 1.0, -1.0});
  CHECK(contrastRatio(f, b, 2.0)[1] == doctest::Approx(-1.0 / 3.0));
  CHECK(kindOf([&] { contrastRatio(f, b, 0.0); }) == ErrorKind::InvalidArg);
  CHECK(kindOf([&] { contrastRatio(f, std::vector<double>{1.0}, 1.0); }) == ErrorKind::DimMismatch);

  std::vector<double> v = {2.0, 4.0, 3.0};
  minMaxNormalize(v);
  CHECK(v == std::vector<double>{0.0, 1.0, 0.5});
  std::vector<double> flat = {0.7, 0.7};
  minMaxNormalize(flat);
  CHECK(flat == std::vector<double>{0.0, 0.0});
}

TEST_CASE("propagate and seed validation") {
  std::mt19937_64 rng(12);
  const AffinityGraph g = testing::randomConnectedGraph(30, 1.0, rng);
  const RankingSolver solver(g, 0.99);
  SeedVector fg(30, SeedRole::Foreground), bg(30, SeedRole::Background);
  CHECK(kindOf([&] { rankSeeds(solver, fg, bg); }) == ErrorKind::DegenerateSeeds);
  fg.values[3] = 1;
  bg.values[20] = 1;
  const auto out = propagate(solver, fg, bg, 1.0);
  REQUIRE(out.size() == 30);
  CHECK(*std::max_element(out.begin(), out.end()) == 1.0);
  CHECK(*std::min_element(out.begin(), out.end()) == 0.0);

  const auto part = propagate(solver, fg, bg, 1.0, 10, 20);
  CHECK(part.size() == 10);
  CHECK(kindOf([&] { propagate(solver, fg, bg, 1.0, 20, 40); }) == ErrorKind::InvalidArg);
  SeedVector shortSeeds(5, SeedRole::Foreground);
  shortSeeds.values[0] = 1;
  CHECK(kindOf([&] { rankSeeds(solver, shortSeeds, bg); }) == ErrorKind::DimMismatch);
}
