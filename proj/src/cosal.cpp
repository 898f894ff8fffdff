#include "cosal/cosal.hpp"

#include <algorithm>
#include <cmath>

#include "cosal/error.hpp"
#include "cosal/ieis.hpp"

namespace cosal {

int GroupContext::nodeCount() const {
  int n = 0;
  for (const auto& s : images) n += s.segmentCount;
  return n;
}

double initialCosal(double rs, double es, double tau) {
  const double delta = rs - es;
  if (delta >= tau) return rs * es;
  const double a = std::abs(delta);
  return (1.0 - a) * rs + a * es;
}

SegmentField initialCosal(const SegmentField& rs, const SegmentField& es, double tau) {
  if (rs.size() != es.size()) throw Error(ErrorKind::DimMismatch, "IrIS and IeIS fields differ in length");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::InvalidArg, "tau must lie in (0,1)");
  SegmentField ic;
  ic.scaleTag = rs.scaleTag;
  ic.values.resize(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i)
    ic.values[i] = std::clamp(initialCosal(rs.values[i], es.values[i], tau), 0.0, 1.0);
  return ic;
}

GroupSeeds extractGroupSeeds(std::span<const SegmentedImage> images,
                             std::span<const SegmentField> initial, int clusterCount) {
  if (images.size() != initial.size()) throw Error(ErrorKind::DimMismatch, "one IC field per image");
  std::size_t n = 0;
  for (std::size_t m = 0; m < images.size(); ++m) {
    if (initial[m].size() != static_cast<std::size_t>(images[m].segmentCount))
      throw Error(ErrorKind::DimMismatch, "IC field does not match its segmentation");
    n += initial[m].size();
  }
  GroupSeeds seeds{SeedVector(n + clusterCount, SeedRole::Foreground),
                   SeedVector(n + clusterCount, SeedRole::Background)};
  std::size_t offset = 0;
  for (std::size_t m = 0; m < images.size(); ++m) {
    const int nm = images[m].segmentCount;
    std::vector<std::uint8_t> top(nm, 0);
    for (int i : topTenPercent(initial[m].values)) top[i] = 1;
    for (int i = 0; i < nm; ++i) {
      const bool boundary = images[m].isBoundary(i);
      if (top[i] && !boundary) seeds.cosal.values[offset + i] = 1;
      if (boundary && !top[i]) seeds.background.values[offset + i] = 1;
    }
    offset += nm;
  }
  if (!seeds.cosal.any())
    throw Error(ErrorKind::DegenerateSeeds, "no co-saliency seeds in the group");
  return seeds;
}

std::vector<SegmentField> auxiliaryCosal(const RankingSolver& integrated, const GraphPartition& partition,
                                         const GroupSeeds& seeds, double eta, AuxNormalization mode) {
  const RankedSeeds r = rankSeeds(integrated, seeds.cosal, seeds.background);
  std::vector<SegmentField> out(partition.imageCount());
  for (int m = 0; m < partition.imageCount(); ++m) {
    const int begin = partition.imageOffsets[m];
    const auto len = static_cast<std::size_t>(partition.imageOffsets[m + 1] - begin);
    out[m].scaleTag = static_cast<int>(len);
    out[m].values = contrastRatio(std::span<const double>(r.foreground.data() + begin, len),
                                  std::span<const double>(r.background.data() + begin, len), eta);
    if (mode == AuxNormalization::MinMax) {
      minMaxNormalize(out[m].values);
    } else {
      for (double& v : out[m].values) v = std::clamp((v + 1.0) / 2.0, 0.0, 1.0);
    }
  }
  return out;
}

SegmentField fuseMax(const SegmentField& ic, const SegmentField& ac) {
  if (ic.size() != ac.size()) throw Error(ErrorKind::DimMismatch, "IC and AC fields differ in length");
  SegmentField cs;
  cs.scaleTag = ic.scaleTag;
  cs.values.resize(ic.size());
  for (std::size_t i = 0; i < ic.size(); ++i) cs.values[i] = std::max(ic.values[i], ac.values[i]);
  return cs;
}

SegmentField postprocess(const SegmentedImage& seg, const SegmentField& cs, double positionalSigma,
                         double shrinkFactor) {
  if (cs.size() != static_cast<std::size_t>(seg.segmentCount))
    throw Error(ErrorKind::DimMismatch, "CS field does not match its segmentation");
  if (!(positionalSigma > 0.0) || !(shrinkFactor > 0.0 && shrinkFactor <= 1.0))
    throw Error(ErrorKind::InvalidArg, "invalid post-processing parameters");
  const int w = seg.width();
  const int h = seg.height();
  const int gw = std::max(1, static_cast<int>(std::lround(w * shrinkFactor)));
  const int gh = std::max(1, static_cast<int>(std::lround(h * shrinkFactor)));

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (int gy = 0; gy < gh; ++gy) {
    const double cy = (gy + 0.5) * h / gh - 0.5;
    const int py = std::clamp(static_cast<int>(std::lround(cy)), 0, h - 1);
    for (int gx = 0; gx < gw; ++gx) {
      const double cx = (gx + 0.5) * w / gw - 0.5;
      const int px = std::clamp(static_cast<int>(std::lround(cx)), 0, w - 1);
      const double wt = cs.values[seg.labels[static_cast<std::size_t>(py) * w + px]];
      sw += wt;
      sx += wt * cx;
      sy += wt * cy;
    }
  }
  const double centerX = sw > 0.0 ? sx / sw : 0.5 * (w - 1);
  const double centerY = sw > 0.0 ? sy / sw : 0.5 * (h - 1);
  const double diag = std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h);
  const double denom = 2.0 * positionalSigma * positionalSigma;

  SegmentField out;
  out.scaleTag = cs.scaleTag;
  out.values.resize(cs.size());
  for (int i = 0; i < seg.segmentCount; ++i) {
    const double dx = (seg.meanPos[i][0] * (w - 1) - centerX) / diag;
    const double dy = (seg.meanPos[i][1] * (h - 1) - centerY) / diag;
    out.values[i] = cs.values[i] * std::exp(-(dx * dx + dy * dy) / denom);
  }
  return out;
}

SegmentField finalCosal(const SegmentedImage& seg, const SegmentField& ic, const SegmentField& ac,
                        double positionalSigma, double shrinkFactor) {
  return postprocess(seg, fuseMax(ic, ac), positionalSigma, shrinkFactor);
}

BinaryMask toCosegMask(const SegmentedImage& seg, const SegmentField& cs, double threshold) {
  if (cs.size() != static_cast<std::size_t>(seg.segmentCount))
    throw Error(ErrorKind::DimMismatch, "CS field does not match its segmentation");
  BinaryMask mask(seg.width(), seg.height());
  for (std::size_t p = 0; p < mask.values.size(); ++p)
    mask.values[p] = cs.values[seg.labels[p]] >= threshold ? 1 : 0;
  return mask;
}

IntegratedGraphBundle buildIntegratedGraph(const GroupContext& ctx) {
  std::vector<AffinityGraph> intra;
  std::vector<std::array<double, 3>> colors;
  intra.reserve(ctx.images.size());
  for (const auto& seg : ctx.images) {
    intra.push_back(intraGraph(seg));
    colors.insert(colors.end(), seg.meanLab.begin(), seg.meanLab.end());
  }
  const int k = std::min(ctx.params.clusters, static_cast<int>(colors.size()));
  IntegratedGraphBundle b;
  b.layer = buildClusterLayer(colors, k, ctx.params.seed);
  b.graph = integratedGraph(intra, colors, b.layer, ctx.params.sigma, ctx.params.knn);
  return b;
}

void completeGroup(GroupContext& ctx) {
  if (ctx.initial.size() != ctx.images.size())
    throw Error(ErrorKind::InvalidArg, "initial co-saliency must be computed first");
  const IntegratedGraphBundle b = buildIntegratedGraph(ctx);
  const RankingSolver solver(b.graph, ctx.params.alpha);
  const GroupSeeds seeds = extractGroupSeeds(ctx.images, ctx.initial, b.layer.k);
  ctx.auxiliary = auxiliaryCosal(solver, *b.graph.partition, seeds, ctx.params.eta,
                                 ctx.params.cosegMode ? AuxNormalization::HalfShift : AuxNormalization::MinMax);
  ctx.cosaliency.clear();
  for (std::size_t m = 0; m < ctx.images.size(); ++m)
    ctx.cosaliency.push_back(finalCosal(ctx.images[m], ctx.initial[m], ctx.auxiliary[m],
                                        ctx.params.positionalSigma, ctx.params.shrinkFactor));
}

}  // namespace cosal
