#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cosal/graph.hpp"
#include "cosal/ieis.hpp"
#include "cosal/imagio.hpp"
#include "cosal/superpixel.hpp"

namespace cosal::testing {

LabImage uniformLab(int width, int height, std::array<double, 3> lab);

/// Rectangular blocks numbered in raster order.
SegmentedImage blockSegmentation(const LabImage& lab, int cols, int rows);

/// Block segmentation whose blocks take the given Lab colours (raster order).
SegmentedImage coloredBlocks(int width, int height, int cols, int rows,
                             const std::vector<std::array<double, 3>>& colors);

/// Piecewise-smooth test photo with texture and a few objects.
RgbImage texturedImage(int width, int height, std::uint64_t seed);

/// Random connected graph: a random spanning tree plus extra edges, weights in (0,1].
AffinityGraph randomConnectedGraph(int nodes, double extraEdgeRatio, std::mt19937_64& rng);

/// Strip segmentation of a `count`-segment chain: every strip touches only its
/// neighbours, and only the two end strips are flagged as boundary.
SegmentedImage chainSegmentation(int count);

/// 2-D points labeled by a random line, with a margin gap around it.
std::vector<TrainSample> separableSamples(int count, std::uint64_t seed);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratchDir(const std::string& name);

}  // namespace cosal::testing
