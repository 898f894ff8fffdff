#include "cosal/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "cosal/error.hpp"
#include "cosal/parallel.hpp"

namespace cosal {

SegmentField fallbackIris(const SegmentedImage& seg) {
  SegmentField f;
  f.scaleTag = seg.segmentCount;
  f.values.assign(seg.segmentCount, 0.0);
  std::vector<int> border;
  for (int i = 0; i < seg.segmentCount; ++i)
    if (seg.isBoundary(i)) border.push_back(i);
  for (int i = 0; i < seg.segmentCount; ++i) {
    double sum = 0.0;
    for (int b : border) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) d += (seg.meanLab[i][c] - seg.meanLab[b][c]) * (seg.meanLab[i][c] - seg.meanLab[b][c]);
      sum += std::sqrt(d);
    }
    f.values[i] = border.empty() ? 0.0 : sum / static_cast<double>(border.size());
  }
  minMaxNormalize(f.values);
  return f;
}

DescriptorLayout layoutFor(const GroupInput& input) {
  DescriptorLayout layout;
  if (!input.tensors.empty()) layout.highDim = 4 * input.tensors.front().channels;
  return layout;
}

ScaleDescriptors describeScale(const std::vector<SegmentedImage>& segs, const std::vector<SegmentField>& iris,
                               const GroupInput& input, int workers) {
  const std::size_t m = segs.size();
  const bool useTensors = !input.tensors.empty();
  auto tensorFor = [&](std::size_t i) { return useTensors ? &input.tensors[i] : nullptr; };

  std::vector<std::vector<ForegroundRegion>> regions(m);
  parallelFor(m, workers, [&](std::size_t i) {
    regions[i] = extractForegrounds(segs[i], iris[i], tensorFor(i), static_cast<int>(i));
  });
  ScaleDescriptors out;
  out.pool = buildForegroundPool(std::move(regions), layoutFor(input));
  out.descriptors.resize(m);
  parallelFor(m, workers, [&](std::size_t i) {
    out.descriptors[i] = buildDescriptors(segs[i], tensorFor(i), out.pool, static_cast<int>(i));
  });
  return out;
}

namespace {

void validateInput(const GroupInput& input, const PipelineConfig& config) {
  const std::size_t m = input.images.size();
  if (m == 0) throw Error(ErrorKind::InvalidArg, "empty image group");
  if (!input.iris.empty() && input.iris.size() != m)
    throw Error(ErrorKind::DimMismatch, "one IrIS map per image is required");
  if (!input.tensors.empty() && input.tensors.size() != m)
    throw Error(ErrorKind::DimMismatch, "one feature tensor per image is required");
  for (std::size_t i = 0; i < m; ++i) {
    const RgbImage& img = input.images[i];
    if (img.width < 8 || img.height < 8 || img.data.size() != 3 * img.pixelCount())
      throw Error(ErrorKind::InvalidArg, "images must be at least 8x8");
    if (!input.iris.empty() && (input.iris[i].width != img.width || input.iris[i].height != img.height))
      throw Error(ErrorKind::DimMismatch, "IrIS map size differs from its image");
    if (!input.tensors.empty()) {
      const FeatureTensor& t = input.tensors[i];
      if (t.channels != input.tensors.front().channels)
        throw Error(ErrorKind::DimMismatch, "feature tensors differ in channel count");
      if (t.sourceWidth != img.width || t.sourceHeight != img.height || t.gridWidth > img.width ||
          t.gridHeight > img.height)
        throw Error(ErrorKind::DimMismatch, "feature tensor does not fit its image");
    }
  }
  const auto& s = config.scales;
  if (s.empty()) throw Error(ErrorKind::InvalidArg, "at least one superpixel scale is required");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 2) throw Error(ErrorKind::InvalidArg, "superpixel scales must be at least 2");
    if (i > 0 && s[i] >= s[i - 1]) throw Error(ErrorKind::InvalidArg, "superpixel scales must be descending");
  }
}

}  // namespace

GroupContext prepareGroup(const GroupInput& input, const PipelineConfig& config) {
  validateInput(input, config);
  const std::size_t m = input.images.size();
  const CosalParams& p = config.params;

  GroupContext ctx;
  ctx.params = p;
  std::vector<LabImage> labs(m);
  ctx.images.resize(m);
  parallelFor(m, config.workers, [&](std::size_t i) {
    labs[i] = rgbToLab(input.images[i]);
    ctx.images[i] = slic(labs[i], config.scales.front(), config.slic);
  });

  std::vector<ScalarMap> irisPixels(m);
  ctx.iris.resize(m);
  parallelFor(m, config.workers, [&](std::size_t i) {
    if (input.iris.empty()) {
      ctx.iris[i] = fallbackIris(ctx.images[i]);
      irisPixels[i] = segmentFieldToPixels(ctx.images[i], ctx.iris[i]);
    } else {
      irisPixels[i] = input.iris[i];
      ctx.iris[i] = poolMedian(ctx.images[i], irisPixels[i]);
    }
  });

  std::vector<ScalarMap> ieisSum(m);
  for (std::size_t i = 0; i < m; ++i) ieisSum[i] = ScalarMap(input.images[i].width, input.images[i].height);

  for (std::size_t s = 0; s < config.scales.size(); ++s) {
    std::vector<SegmentedImage> scaled;
    if (s > 0) {
      scaled.resize(m);
      parallelFor(m, config.workers, [&](std::size_t i) { scaled[i] = slic(labs[i], config.scales[s], config.slic); });
    }
    const std::vector<SegmentedImage>& segs = s == 0 ? ctx.images : scaled;
    std::vector<SegmentField> rs(m);
    for (std::size_t i = 0; i < m; ++i) rs[i] = s == 0 ? ctx.iris[i] : poolMedian(segs[i], irisPixels[i]);

    ScaleDescriptors described = describeScale(segs, rs, input, config.workers);
    std::vector<SegmentField> raw(m);
    if (config.model) {
      for (std::size_t i = 0; i < m; ++i) raw[i] = scoreSegments(*config.model, described.descriptors[i]);
    } else {
      raw = heuristicScores(described.descriptors, described.pool.layout);
    }
    parallelFor(m, config.workers, [&](std::size_t i) {
      const SegmentField es = segs[i].segmentCount >= 2 ? refineIeis(segs[i], raw[i], p.alpha, p.eta) : raw[i];
      const ScalarMap px = segmentFieldToPixels(segs[i], es);
      for (std::size_t k = 0; k < px.values.size(); ++k) ieisSum[i].values[k] += px.values[k];
    });
    if (s == 0) {
      ctx.foregroundPool = std::move(described.pool);
      ctx.descriptors = std::move(described.descriptors);
    }
  }

  ctx.ieis.resize(m);
  ctx.initial.resize(m);
  const double inv = 1.0 / static_cast<double>(config.scales.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (double& v : ieisSum[i].values) v *= inv;
    ctx.ieis[i] = poolMedian(ctx.images[i], ieisSum[i]);
    ctx.initial[i] = initialCosal(ctx.iris[i], ctx.ieis[i], p.tau);
  }
  return ctx;
}

GroupContext runGroup(const GroupInput& input, const PipelineConfig& config) {
  GroupContext ctx = prepareGroup(input, config);
  completeGroup(ctx);
  return ctx;
}

}  // namespace cosal
