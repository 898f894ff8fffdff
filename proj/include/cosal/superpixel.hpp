#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cosal/imagio.hpp"

namespace cosal {

// An over-segmented image: labels plus per-segment geometry and colour summaries.
struct SegmentedImage {
  LabImage lab;
  std::vector<int> labels;  // per pixel, in [0, segmentCount)
  int segmentCount = 0;
  std::vector<std::vector<int>> adjacency;       // sorted neighbour indices
  std::vector<std::uint8_t> boundaryFlags;       // 1 if the segment owns a border pixel
  std::vector<std::array<double, 3>> meanLab;    // normalized Lab means
  std::vector<std::array<double, 2>> meanPos;    // (x, y) means in [0,1]
  std::vector<std::vector<std::size_t>> pixels;  // pixel indices per segment, ascending

  int width() const { return lab.width; }
  int height() const { return lab.height; }
  bool isBoundary(int segment) const { return boundaryFlags[segment] != 0; }

  /// Builds all derived tables from a label map. Labels must be dense in
  /// [0, max] with every segment non-empty and 4-connected.
  static SegmentedImage fromLabels(LabImage lab, std::vector<int> labels);
};

struct SegmentField {
  std::vector<double> values;
  int scaleTag = 0;

  std::size_t size() const { return values.size(); }
};

struct SlicOptions {
  int iterations = 10;
  // Classical SLIC compactness m, expressed for Lab in [0,100] units; the
  // distance is computed on normalized Lab, so m is divided by 100 internally.
  double compactness = 10.0;
};

SegmentedImage slic(const LabImage& lab, int targetCount, const SlicOptions& options = {});

/// Per-segment median of a pixel map (even sizes: mean of the two middle values).
SegmentField poolMedian(const SegmentedImage& seg, const ScalarMap& map);
SegmentField poolMean(const SegmentedImage& seg, const ScalarMap& map);

ScalarMap segmentFieldToPixels(const SegmentedImage& seg, const SegmentField& field);

/// Border pixels of segments drawn in red over the RGB rendering of the Lab input.
RgbImage boundaryOverlay(const SegmentedImage& seg, const RgbImage& image);

}  // namespace cosal
