#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cosal/cosal.hpp"
#include "cosal/ieis.hpp"

namespace cosal {

struct GroupInput {
  std::vector<std::string> names;
  std::vector<RgbImage> images;
  std::vector<ScalarMap> iris;          // pixel-level IrIS; empty -> classical fallback
  std::vector<FeatureTensor> tensors;   // optional, one per image
};

struct PipelineConfig {
  CosalParams params;
  std::vector<int> scales = {200, 150, 50};  // first entry is the base segmentation
  SlicOptions slic;
  std::optional<MlpModel> model;  // absent -> heuristic scorer
  int workers = 1;
};

/// Non-learned IrIS stand-in: mean Lab distance of each segment to the
/// boundary segments, min-max normalized.
SegmentField fallbackIris(const SegmentedImage& seg);

DescriptorLayout layoutFor(const GroupInput& input);

/// Per-scale foreground pools and descriptors for one segmentation of every image.
struct ScaleDescriptors {
  ForegroundPool pool;
  std::vector<std::vector<SegmentDescriptor>> descriptors;
};
ScaleDescriptors describeScale(const std::vector<SegmentedImage>& segs, const std::vector<SegmentField>& iris,
                               const GroupInput& input, int workers);

/// Segmentation, IrIS pooling, multi-scale IeIS and initial co-saliency.
GroupContext prepareGroup(const GroupInput& input, const PipelineConfig& config);

/// prepareGroup followed by completeGroup.
GroupContext runGroup(const GroupInput& input, const PipelineConfig& config);

}  // namespace cosal
