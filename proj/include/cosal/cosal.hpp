#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cosal/features.hpp"
#include "cosal/graph.hpp"
#include "cosal/imagio.hpp"
#include "cosal/superpixel.hpp"

namespace cosal {

enum class AuxNormalization {
  MinMax,     // detection: min-max per image
  HalfShift,  // co-segmentation: x -> (x + 1) / 2
};

struct CosalParams {
  double alpha = 0.95;
  double eta = 2.0;
  double sigma = 0.25;
  double tau = 0.5;
  int clusters = 100;
  int knn = 5;
  bool cosegMode = false;
  std::uint64_t seed = 0;
  double positionalSigma = 0.33;  // fraction of the image diagonal
  double shrinkFactor = 0.25;     // per side, for the positional distance grid
};

// Whole-group state. Each stage fills its fields once; later stages only read.
struct GroupContext {
  CosalParams params;
  std::vector<SegmentedImage> images;
  std::vector<SegmentField> iris;  // rs
  std::vector<SegmentField> ieis;  // es
  std::vector<std::vector<SegmentDescriptor>> descriptors;
  ForegroundPool foregroundPool;
  std::vector<SegmentField> initial;    // IC
  std::vector<SegmentField> auxiliary;  // AC
  std::vector<SegmentField> cosaliency; // CS

  std::size_t imageCount() const { return images.size(); }
  int nodeCount() const;
};

/// delta = rs - es; delta >= tau -> rs * es, else (1 - |delta|) rs + |delta| es.
double initialCosal(double rs, double es, double tau);
SegmentField initialCosal(const SegmentField& rs, const SegmentField& es, double tau);

struct GroupSeeds {
  SeedVector cosal;       // length n + K
  SeedVector background;  // length n + K
};

/// Per image: top-10% IC nodes and boundary nodes; nodes in both sets are
/// dropped from both. The cluster-layer tail stays zero.
GroupSeeds extractGroupSeeds(std::span<const SegmentedImage> images,
                             std::span<const SegmentField> initial, int clusterCount);

std::vector<SegmentField> auxiliaryCosal(const RankingSolver& integrated, const GraphPartition& partition,
                                         const GroupSeeds& seeds, double eta, AuxNormalization mode);

SegmentField fuseMax(const SegmentField& ic, const SegmentField& ac);

/// Attenuates each segment by a Gaussian of its distance to the CS-weighted
/// centroid (estimated on a shrunk grid). Never increases a value.
SegmentField postprocess(const SegmentedImage& seg, const SegmentField& cs, double positionalSigma = 0.33,
                         double shrinkFactor = 0.25);

SegmentField finalCosal(const SegmentedImage& seg, const SegmentField& ic, const SegmentField& ac,
                        double positionalSigma = 0.33, double shrinkFactor = 0.25);

BinaryMask toCosegMask(const SegmentedImage& seg, const SegmentField& cs, double threshold = 0.5);

/// Builds the cluster layer and integrated graph for the context's base
/// segmentations; K is clamped to the node count.
struct IntegratedGraphBundle {
  ClusterLayer layer;
  AffinityGraph graph;
};
IntegratedGraphBundle buildIntegratedGraph(const GroupContext& ctx);

/// Seeds, auxiliary maps and final maps from ctx.initial.
void completeGroup(GroupContext& ctx);

}  // namespace cosal
