#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "cosal/superpixel.hpp"

namespace cosal {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Degree assigned to a node without any positive edge.
inline constexpr double kIsolatedDegree = 1e-12;

struct Edge {
  int i;
  int j;
  double weight;
};

// Block structure of an integrated graph: image m owns nodes
// [imageOffsets[m], imageOffsets[m+1]); the cluster layer follows.
struct GraphPartition {
  std::vector<int> imageOffsets;
  int clusterOffset = 0;
  int clusterCount = 0;

  int imageCount() const { return static_cast<int>(imageOffsets.size()) - 1; }
};

struct AffinityGraph {
  int size = 0;
  SparseMatrix weights;  // symmetric, zero diagonal, entries in [0,1]
  std::vector<double> degrees;
  std::optional<GraphPartition> partition;

  /// Each undirected edge listed once (either orientation).
  static AffinityGraph fromEdges(int size, std::span<const Edge> edges);

  double weight(int i, int j) const { return weights.coeff(i, j); }
  /// "i j w" per stored entry, 0-based, sorted by (i, j).
  std::string toCoordinateList() const;
};

/// Edge-difference covariance of the colour vectors with a relative ridge
/// (1e-6 * trace / 3) plus an absolute 1e-12 floor.
Eigen::Matrix3d regularizedEdgeCovariance(std::span<const std::array<double, 3>> differences);

/// Colour-affinity graph over segment adjacency.
AffinityGraph intraGraph(const SegmentedImage& seg);

struct ClusterLayer {
  int k = 0;
  std::vector<std::array<double, 3>> centroids;
  std::vector<int> assignment;  // per intra node
};

/// k-means++ seeded from `seed`; at most 100 Lloyd iterations or until no
/// centroid moves by 1e-6. Ties go to the lowest centroid index.
ClusterLayer buildClusterLayer(std::span<const std::array<double, 3>> points, int k,
                               std::uint64_t seed);

/// Block graph [[W_I, W_IC], [W_IC^T, W_C]] over all segments of a group plus
/// the cluster layer. `nodeColors` is the concatenated per-image meanLab.
AffinityGraph integratedGraph(std::span<const AffinityGraph> intraGraphs,
                              std::span<const std::array<double, 3>> nodeColors,
                              const ClusterLayer& layer, double sigma, int knn);

/// Factors D - alpha W once; solves are const and may run concurrently.
class RankingSolver {
 public:
  RankingSolver(const AffinityGraph& graph, double alpha);

  int size() const { return static_cast<int>(system_.rows()); }
  double alpha() const { return alpha_; }

  /// (D - alpha W)^{-1} y.
  Eigen::VectorXd solve(const Eigen::VectorXd& y) const;
  /// solve(y) with the query's own diagonal contribution removed per seed.
  Eigen::VectorXd rank(const Eigen::VectorXd& y) const;
  /// (D - alpha W)^{-1}_{ii}
  double inverseDiagonal(int i) const;
  double residualInf(const Eigen::VectorXd& f, const Eigen::VectorXd& y) const;

 private:
  double alpha_;
  SparseMatrix system_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

enum class SeedRole { Foreground, Background };

struct SeedVector {
  std::vector<std::uint8_t> values;
  SeedRole role = SeedRole::Foreground;

  SeedVector() = default;
  SeedVector(std::size_t n, SeedRole r) : values(n, 0), role(r) {}

  bool any() const;
  std::size_t count() const;
  Eigen::VectorXd asVector() const;
};

struct RankedSeeds {
  Eigen::VectorXd foreground;
  Eigen::VectorXd background;
};

RankedSeeds rankSeeds(const RankingSolver& solver, const SeedVector& fg, const SeedVector& bg);

/// (f - eta b) / (f + eta b) element-wise with 0/0 -> 0.
std::vector<double> contrastRatio(std::span<const double> fg, std::span<const double> bg, double eta);

/// Min-max to [0,1]; a constant input becomes all zeros.
void minMaxNormalize(std::span<double> values);

/// Seed propagation over nodes [begin, end): ranks both seed sets, takes the
/// contrast ratio and min-max normalizes over the range.
std::vector<double> propagate(const RankingSolver& solver, const SeedVector& fg,
                              const SeedVector& bg, double eta, int begin, int end);
std::vector<double> propagate(const RankingSolver& solver, const SeedVector& fg,
                              const SeedVector& bg, double eta);

}  // namespace cosal
