#include "cosal/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "cosal/error.hpp"

namespace cosal {

AffinityGraph AffinityGraph::fromEdges(int size, std::span<const Edge> edges) {
  if (size <= 0) throw Error(ErrorKind::InvalidArg, "graph must have at least one node");
  std::map<std::pair<int, int>, double> unique;
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= size || e.j >= size)
      throw Error(ErrorKind::InvalidArg, "edge endpoint out of range");
    if (e.i == e.j) throw Error(ErrorKind::InvalidArg, "self loops are not allowed");
    if (!(e.weight >= 0.0 && e.weight <= 1.0))
      throw Error(ErrorKind::InvalidArg, "edge weight outside [0,1]");
    unique[{std::min(e.i, e.j), std::max(e.i, e.j)}] = e.weight;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * unique.size());
  for (const auto& [key, w] : unique) {
    triplets.emplace_back(key.first, key.second, w);
    triplets.emplace_back(key.second, key.first, w);
  }
  AffinityGraph g;
  g.size = size;
  g.weights.resize(size, size);
  g.weights.setFromTriplets(triplets.begin(), triplets.end());
  g.weights.makeCompressed();
  g.degrees.assign(size, 0.0);
  for (int col = 0; col < g.weights.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(g.weights, col); it; ++it) g.degrees[it.row()] += it.value();
  for (double& d : g.degrees)
    if (!(d > 0.0)) d = kIsolatedDegree;
  return g;
}

std::string AffinityGraph::toCoordinateList() const {
  std::vector<std::tuple<int, int, double>> entries;
  for (int col = 0; col < weights.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(weights, col); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  std::sort(entries.begin(), entries.end());
  std::string out;
  char line[96];
  for (const auto& [i, j, w] : entries) {
    std::snprintf(line, sizeof line, "%d %d %.17g\n", i, j, w);
    out += line;
  }
  return out;
}

Eigen::Matrix3d regularizedEdgeCovariance(std::span<const std::array<double, 3>> differences) {
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  for (const auto& d : differences) {
    const Eigen::Vector3d v(d[0], d[1], d[2]);
    sigma += v * v.transpose();
  }
  if (!differences.empty()) sigma /= static_cast<double>(differences.size());
  const double ridge = 1e-6 * sigma.trace() / 3.0 + 1e-12;
  sigma.diagonal().array() += ridge;
  return sigma;
}

AffinityGraph intraGraph(const SegmentedImage& seg) {
  const int n = seg.segmentCount;
  if (n < 2) throw Error(ErrorKind::InvalidArg, "intra-image graph needs at least two segments");
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::array<double, 3>> diffs;
  for (int i = 0; i < n; ++i) {
    for (int j : seg.adjacency[i]) {
      if (j <= i) continue;
      pairs.emplace_back(i, j);
      diffs.push_back({seg.meanLab[i][0] - seg.meanLab[j][0], seg.meanLab[i][1] - seg.meanLab[j][1],
                       seg.meanLab[i][2] - seg.meanLab[j][2]});
    }
  }
  const Eigen::Matrix3d sigma = regularizedEdgeCovariance(diffs);
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(sigma);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const Eigen::Vector3d d(diffs[e][0], diffs[e][1], diffs[e][2]);
    const double q = std::max(0.0, d.dot(ldlt.solve(d)));
    edges.push_back({pairs[e].first, pairs[e].second, std::exp(-q)});
  }
  return AffinityGraph::fromEdges(n, edges);
}

namespace {

double distSq(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt(distSq(a, b));
}

int nearestCentroid(const std::array<double, 3>& p, const std::vector<std::array<double, 3>>& c) {
  int best = 0;
  double bestD = distSq(p, c[0]);
  for (std::size_t j = 1; j < c.size(); ++j) {
    const double d = distSq(p, c[j]);
    if (d < bestD) {
      bestD = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

ClusterLayer buildClusterLayer(std::span<const std::array<double, 3>> points, int k,
                               std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (k < 2) throw Error(ErrorKind::InvalidArg, "cluster count must be at least 2");
  if (n < k)
    throw Error(ErrorKind::InvalidArg, "cannot form " + std::to_string(k) + " clusters from " +
                                           std::to_string(n) + " nodes");

  std::mt19937_64 rng(seed);
  std::vector<std::array<double, 3>> centroids;
  centroids.reserve(k);
  std::vector<std::uint8_t> chosen(n, 0);
  {
    const int first = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    centroids.push_back(points[first]);
    chosen[first] = 1;
  }
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = distSq(points[i], centroids[0]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    int pick = -1;
    if (total > 0.0) {
      const double r = unit(rng) * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= r) {
          pick = i;
          break;
        }
      }
      if (pick < 0)
        for (int i = n - 1; i >= 0 && pick < 0; --i)
          if (d2[i] > 0.0) pick = i;
    } else {
      // Every remaining point coincides with a centroid.
      for (int i = 0; i < n && pick < 0; ++i)
        if (!chosen[i]) pick = i;
    }
    centroids.push_back(points[pick]);
    chosen[pick] = 1;
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], distSq(points[i], points[pick]));
  }

  std::vector<int> assignment(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (int i = 0; i < n; ++i) assignment[i] = nearestCentroid(points[i], centroids);

    std::vector<std::array<double, 3>> sums(k, {0.0, 0.0, 0.0});
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) sums[assignment[i]][c] += points[i][c];
      ++counts[assignment[i]];
    }
    double moved = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      std::array<double, 3> next;
      for (int c = 0; c < 3; ++c) next[c] = sums[j][c] / counts[j];
      moved = std::max(moved, dist(next, centroids[j]));
      centroids[j] = next;
    }
    if (moved < 1e-6) break;
  }

  // Refill empty clusters with the worst-fitting point of a multi-member cluster.
  std::vector<int> counts(k, 0);
  for (int a : assignment) ++counts[a];
  for (int j = 0; j < k; ++j) {
    if (counts[j] > 0) continue;
    int worst = -1;
    double worstD = -1.0;
    for (int i = 0; i < n; ++i) {
      if (counts[assignment[i]] < 2) continue;
      const double d = distSq(points[i], centroids[assignment[i]]);
      if (d > worstD) {
        worstD = d;
        worst = i;
      }
    }
    --counts[assignment[worst]];
    assignment[worst] = j;
    counts[j] = 1;
    centroids[j] = points[worst];
  }

  ClusterLayer layer;
  layer.k = k;
  layer.centroids = std::move(centroids);
  layer.assignment = std::move(assignment);
  return layer;
}

AffinityGraph integratedGraph(std::span<const AffinityGraph> intraGraphs,
                              std::span<const std::array<double, 3>> nodeColors,
                              const ClusterLayer& layer, double sigma, int knn) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArg, "sigma must be positive");
  if (knn < 1) throw Error(ErrorKind::InvalidArg, "k-NN count must be at least 1");
  GraphPartition part;
  part.imageOffsets.push_back(0);
  for (const auto& g : intraGraphs) part.imageOffsets.push_back(part.imageOffsets.back() + g.size);
  const int n = part.imageOffsets.back();
  if (static_cast<int>(nodeColors.size()) != n || static_cast<int>(layer.assignment.size()) != n)
    throw Error(ErrorKind::DimMismatch, "cluster layer does not cover the intra-image nodes");
  const int K = layer.k;
  part.clusterOffset = n;
  part.clusterCount = K;

  std::vector<Edge> edges;
  for (std::size_t m = 0; m < intraGraphs.size(); ++m) {
    const int off = part.imageOffsets[m];
    const SparseMatrix& w = intraGraphs[m].weights;
    for (int col = 0; col < w.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(w, col); it; ++it)
        if (it.row() < it.col())
          edges.push_back({off + static_cast<int>(it.row()), off + static_cast<int>(it.col()), it.value()});
  }
  for (int i = 0; i < n; ++i) {
    const int j = layer.assignment[i];
    edges.push_back({i, n + j, std::exp(-dist(nodeColors[i], layer.centroids[j]) / sigma)});
  }
  std::set<std::pair<int, int>> knnPairs;
  for (int i = 0; i < K; ++i) {
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < K; ++j)
      if (j != i) order.emplace_back(dist(layer.centroids[i], layer.centroids[j]), j);
    std::sort(order.begin(), order.end());
    const int take = std::min<int>(knn, static_cast<int>(order.size()));
    for (int t = 0; t < take; ++t)
      knnPairs.insert({std::min(i, order[t].second), std::max(i, order[t].second)});
  }
  for (const auto& [i, j] : knnPairs)
    edges.push_back({n + i, n + j, std::exp(-dist(layer.centroids[i], layer.centroids[j]) / sigma)});

  AffinityGraph g = AffinityGraph::fromEdges(n + K, edges);
  g.partition = std::move(part);
  return g;
}

RankingSolver::RankingSolver(const AffinityGraph& graph, double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArg, "alpha must lie in (0,1)");
  const int n = graph.size;
  SparseMatrix diag(n, n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, graph.degrees[i]);
  diag.setFromTriplets(t.begin(), t.end());
  system_ = diag - alpha * graph.weights;
  system_.makeCompressed();
  factor_.compute(system_);
  if (factor_.info() != Eigen::Success)
    throw Error(ErrorKind::SolveFailure, "factorization of the ranking system failed");
}

Eigen::VectorXd RankingSolver::solve(const Eigen::VectorXd& y) const {
  if (y.size() != system_.rows()) throw Error(ErrorKind::DimMismatch, "seed vector length mismatch");
  Eigen::VectorXd f = factor_.solve(y);
  // One step of iterative refinement.
  const Eigen::VectorXd r = y - system_ * f;
  f += factor_.solve(r);
  if (!f.allFinite()) throw Error(ErrorKind::SolveFailure, "ranking solve produced non-finite values");
  return f;
}

double RankingSolver::inverseDiagonal(int i) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(system_.rows());
  e[i] = 1.0;
  return solve(e)[i];
}

Eigen::VectorXd RankingSolver::rank(const Eigen::VectorXd& y) const {
  Eigen::VectorXd f = solve(y);
  for (int i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    f[i] = std::max(0.0, f[i] - inverseDiagonal(i) * y[i]);
  }
  return f;
}

double RankingSolver::residualInf(const Eigen::VectorXd& f, const Eigen::VectorXd& y) const {
  return (system_ * f - y).lpNorm<Eigen::Infinity>();
}

bool SeedVector::any() const {
  return std::any_of(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; });
}

std::size_t SeedVector::count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

Eigen::VectorXd SeedVector::asVector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i] ? 1.0 : 0.0;
  return v;
}

RankedSeeds rankSeeds(const RankingSolver& solver, const SeedVector& fg, const SeedVector& bg) {
  if (!fg.any() && !bg.any())
    throw Error(ErrorKind::DegenerateSeeds, "both seed vectors are empty");
  const auto n = static_cast<std::size_t>(solver.size());
  if (fg.values.size() != n || bg.values.size() != n)
    throw Error(ErrorKind::DimMismatch, "seed vector length does not match the graph");
  RankedSeeds r;
  r.foreground = fg.any() ? solver.rank(fg.asVector()) : Eigen::VectorXd::Zero(solver.size());
  r.background = bg.any() ? solver.rank(bg.asVector()) : Eigen::VectorXd::Zero(solver.size());
  return r;
}

std::vector<double> contrastRatio(std::span<const double> fg, std::span<const double> bg, double eta) {
  if (fg.size() != bg.size()) throw Error(ErrorKind::DimMismatch, "ranking vectors differ in length");
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidArg, "eta must be positive");
  std::vector<double> out(fg.size());
  for (std::size_t i = 0; i < fg.size(); ++i) {
    const double num = fg[i] - eta * bg[i];
    const double den = fg[i] + eta * bg[i];
    out[i] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

void minMaxNormalize(std::span<double> values) {
  if (values.empty()) return;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double mn = *lo, mx = *hi;
  if (!(mx > mn)) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (double& v : values) v = std::clamp((v - mn) / (mx - mn), 0.0, 1.0);
}

std::vector<double> propagate(const RankingSolver& solver, const SeedVector& fg,
                              const SeedVector& bg, double eta, int begin, int end) {
  if (begin < 0 || end > solver.size() || begin > end)
    throw Error(ErrorKind::InvalidArg, "node range outside the graph");
  const RankedSeeds r = rankSeeds(solver, fg, bg);
  std::vector<double> out = contrastRatio(
      std::span<const double>(r.foreground.data() + begin, static_cast<std::size_t>(end - begin)),
      std::span<const double>(r.background.data() + begin, static_cast<std::size_t>(end - begin)), eta);
  minMaxNormalize(out);
  return out;
}

std::vector<double> propagate(const RankingSolver& solver, const SeedVector& fg,
                              const SeedVector& bg, double eta) {
  return propagate(solver, fg, bg, eta, 0, solver.size());
}

}  // namespace cosal
