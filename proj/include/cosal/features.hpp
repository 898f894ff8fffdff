#pragma once

#include <array>
#include <span>
#include <vector>

#include "cosal/imagio.hpp"
#include "cosal/superpixel.hpp"

namespace cosal {

inline constexpr int kHistBins = 256;  // 4 (L) x 8 (a) x 8 (b)
inline constexpr int kMaxForegroundComponents = 6;

int labBin(double l, double a, double b);

struct ForegroundRegion {
  std::vector<int> memberSegments;  // sorted
  int owningImage = 0;
  std::vector<double> descriptorHigh;  // empty without a feature tensor
  std::array<double, 3> meanLab{};
  std::array<double, 2> meanPos{};
  std::array<double, 2> posVariance{};
  std::vector<double> colorHist;  // kHistBins entries, L1-normalized then square-rooted

  /// [meanLab, meanPos, posVariance, colorHist]
  std::vector<double> lowLevel() const;
  /// [descriptorHigh, lowLevel()]
  std::vector<double> descriptor() const;
};

// Lengths of the four descriptor parts. highDim is 0 when no tensors are used.
struct DescriptorLayout {
  int highDim = 0;

  int segDim() const { return highDim + 3 + 2 + kHistBins; }
  int regionDim() const { return highDim + 3 + 2 + 2 + kHistBins; }
  int gfgDim() const { return regionDim() + (highDim > 0 ? 2 : 1); }
  int totalDim() const { return 2 * segDim() + regionDim() + gfgDim(); }
};

struct SegmentDescriptor {
  std::vector<double> seg;
  std::vector<double> nbh;
  std::vector<double> sfg;
  std::vector<double> gfg;

  std::vector<double> concatenated() const;
};

// Foreground regions of every image plus the group-level pooled descriptor.
struct ForegroundPool {
  DescriptorLayout layout;
  std::vector<std::vector<ForegroundRegion>> perImage;
  std::vector<double> gfg;  // L2-normalized, layout.gfgDim() entries
  double highTrace = 0.0;
  double lowTrace = 0.0;
};

/// Thresholds the segment-level IrIS field at max(mean, 0.5), splits the mask
/// into connected components over segment adjacency (largest kMaxForegroundComponents
/// kept) and returns every non-empty union of them.
std::vector<ForegroundRegion> extractForegrounds(const SegmentedImage& seg,
                                                 const SegmentField& iris,
                                                 const FeatureTensor* tensor, int imageIndex);

std::vector<double> labHistogram(const SegmentedImage& seg, std::span<const int> members);

/// Masks the tensor grid with the member pixels and max-pools a 2x2 grid over
/// the mask's bounding box. Output is quadrant-major (TL, TR, BL, BR).
std::vector<double> poolSegmentHigh(const SegmentedImage& seg, const FeatureTensor& tensor,
                                    std::span<const int> members);

/// Population covariance trace of equal-length sample vectors.
double covarianceTrace(std::span<const std::vector<double>> samples);

ForegroundPool buildForegroundPool(std::vector<std::vector<ForegroundRegion>> perImage,
                                   const DescriptorLayout& layout);

std::vector<SegmentDescriptor> buildDescriptors(const SegmentedImage& seg,
                                                const FeatureTensor* tensor,
                                                const ForegroundPool& pool, int imageIndex);

/// In place; leaves an all-zero vector untouched. Returns the original norm.
double l2Normalize(std::span<double> v);

/// n_m x dim, C = 1, for export to the scorer trainer.
FeatureTensor descriptorsToTensor(const std::vector<SegmentDescriptor>& descriptors);

}  // namespace cosal
