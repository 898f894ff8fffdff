#include "cosal/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cosal/error.hpp"

namespace cosal {

namespace {

// Raw per-segment sums from which any union's statistics follow exactly.
struct SegmentStats {
  std::vector<std::array<double, kHistBins>> hist;
  std::vector<std::array<double, 3>> labSum;
  std::vector<std::array<double, 2>> posSum;
  std::vector<std::array<double, 2>> posSqSum;
  std::vector<double> count;
};

SegmentStats computeStats(const SegmentedImage& seg) {
  const int n = seg.segmentCount;
  const int w = seg.width();
  const int h = seg.height();
  const double sx = w > 1 ? 1.0 / (w - 1) : 0.0;
  const double sy = h > 1 ? 1.0 / (h - 1) : 0.0;
  SegmentStats st;
  st.hist.assign(n, {});
  st.labSum.assign(n, {0.0, 0.0, 0.0});
  st.posSum.assign(n, {0.0, 0.0});
  st.posSqSum.assign(n, {0.0, 0.0});
  st.count.assign(n, 0.0);
  for (int s = 0; s < n; ++s) {
    st.hist[s].fill(0.0);
    for (std::size_t p : seg.pixels[s]) {
      const double l = seg.lab.data[3 * p], a = seg.lab.data[3 * p + 1], b = seg.lab.data[3 * p + 2];
      st.hist[s][labBin(l, a, b)] += 1.0;
      st.labSum[s][0] += l;
      st.labSum[s][1] += a;
      st.labSum[s][2] += b;
      const double x = static_cast<double>(p % w) * sx;
      const double y = static_cast<double>(p / w) * sy;
      st.posSum[s][0] += x;
      st.posSum[s][1] += y;
      st.posSqSum[s][0] += x * x;
      st.posSqSum[s][1] += y * y;
    }
    st.count[s] = static_cast<double>(seg.pixels[s].size());
  }
  return st;
}

struct UnionStats {
  std::array<double, 3> meanLab{};
  std::array<double, 2> meanPos{};
  std::array<double, 2> posVariance{};
  std::vector<double> hist;
};

UnionStats unionStats(const SegmentStats& st, std::span<const int> members) {
  UnionStats u;
  u.hist.assign(kHistBins, 0.0);
  double count = 0.0;
  std::array<double, 2> sq{0.0, 0.0};
  for (int s : members) {
    for (int b = 0; b < kHistBins; ++b) u.hist[b] += st.hist[s][b];
    for (int c = 0; c < 3; ++c) u.meanLab[c] += st.labSum[s][c];
    for (int c = 0; c < 2; ++c) {
      u.meanPos[c] += st.posSum[s][c];
      sq[c] += st.posSqSum[s][c];
    }
    count += st.count[s];
  }
  const double inv = 1.0 / count;
  for (double& v : u.meanLab) v *= inv;
  for (int c = 0; c < 2; ++c) {
    u.meanPos[c] *= inv;
    u.posVariance[c] = std::max(0.0, sq[c] * inv - u.meanPos[c] * u.meanPos[c]);
  }
  for (double& v : u.hist) v = std::sqrt(v * inv);
  return u;
}

void append(std::vector<double>& out, std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); }

}  // namespace

int labBin(double l, double a, double b) {
  const int lb = std::clamp(static_cast<int>(l * 4.0), 0, 3);
  const int ab = std::clamp(static_cast<int>(a * 8.0), 0, 7);
  const int bb = std::clamp(static_cast<int>(b * 8.0), 0, 7);
  return lb * 64 + ab * 8 + bb;
}

std::vector<double> ForegroundRegion::lowLevel() const {
  std::vector<double> v;
  v.reserve(7 + colorHist.size());
  append(v, meanLab);
  append(v, meanPos);
  append(v, posVariance);
  append(v, colorHist);
  return v;
}

std::vector<double> ForegroundRegion::descriptor() const {
  std::vector<double> v = descriptorHigh;
  append(v, lowLevel());
  return v;
}

std::vector<double> SegmentDescriptor::concatenated() const {
  std::vector<double> v;
  v.reserve(seg.size() + nbh.size() + sfg.size() + gfg.size());
  append(v, seg);
  append(v, nbh);
  append(v, sfg);
  append(v, gfg);
  return v;
}

double l2Normalize(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
  return norm;
}

std::vector<double> labHistogram(const SegmentedImage& seg, std::span<const int> members) {
  if (members.empty()) throw Error(ErrorKind::EmptyRegion, "histogram of an empty region");
  std::vector<double> hist(kHistBins, 0.0);
  double count = 0.0;
  for (int s : members) {
    for (std::size_t p : seg.pixels.at(s)) {
      hist[labBin(seg.lab.data[3 * p], seg.lab.data[3 * p + 1], seg.lab.data[3 * p + 2])] += 1.0;
      count += 1.0;
    }
  }
  for (double& v : hist) v = std::sqrt(v / count);
  return hist;
}

std::vector<double> poolSegmentHigh(const SegmentedImage& seg, const FeatureTensor& tensor,
                                    std::span<const int> members) {
  const int w = seg.width();
  const int h = seg.height();
  if (tensor.sourceWidth != w || tensor.sourceHeight != h)
    throw Error(ErrorKind::DimMismatch, "feature tensor was not computed for this image");
  const int gw = tensor.gridWidth;
  const int gh = tensor.gridHeight;
  const int ch = tensor.channels;
  auto cellX = [&](int x) { return static_cast<int>(static_cast<long long>(x) * gw / w); };
  auto cellY = [&](int y) { return static_cast<int>(static_cast<long long>(y) * gh / h); };

  std::vector<double> colsIn(gw, 0.0), rowsIn(gh, 0.0);
  for (int x = 0; x < w; ++x) colsIn[cellX(x)] += 1.0;
  for (int y = 0; y < h; ++y) rowsIn[cellY(y)] += 1.0;

  std::vector<double> covered(static_cast<std::size_t>(gw) * gh, 0.0);
  for (int s : members) {
    for (std::size_t p : seg.pixels.at(s)) {
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      covered[static_cast<std::size_t>(cellY(y)) * gw + cellX(x)] += 1.0;
    }
  }
  std::vector<std::uint8_t> inMask(covered.size(), 0);
  std::size_t bestCell = 0;
  double bestFrac = -1.0;
  bool any = false;
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      const std::size_t c = static_cast<std::size_t>(gy) * gw + gx;
      const double frac = covered[c] / (colsIn[gx] * rowsIn[gy]);
      if (frac >= 0.5) {
        inMask[c] = 1;
        any = true;
      }
      if (frac > bestFrac) {
        bestFrac = frac;
        bestCell = c;
      }
    }
  }
  if (!any) inMask[bestCell] = 1;

  int x0 = gw, x1 = -1, y0 = gh, y1 = -1;
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      if (!inMask[static_cast<std::size_t>(gy) * gw + gx]) continue;
      x0 = std::min(x0, gx);
      x1 = std::max(x1, gx);
      y0 = std::min(y0, gy);
      y1 = std::max(y1, gy);
    }
  }
  // Halves overlap on the middle row/column when the box side is odd.
  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1;
  const std::array<std::array<int, 2>, 2> xs = {{{x0, x0 + (bw + 1) / 2 - 1}, {x0 + bw / 2, x1}}};
  const std::array<std::array<int, 2>, 2> ys = {{{y0, y0 + (bh + 1) / 2 - 1}, {y0 + bh / 2, y1}}};

  std::vector<double> out(4 * static_cast<std::size_t>(ch), 0.0);
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx) {
      const std::size_t base = static_cast<std::size_t>(qy * 2 + qx) * ch;
      bool seen = false;
      for (int gy = ys[qy][0]; gy <= ys[qy][1]; ++gy) {
        for (int gx = xs[qx][0]; gx <= xs[qx][1]; ++gx) {
          if (!inMask[static_cast<std::size_t>(gy) * gw + gx]) continue;
          for (int c = 0; c < ch; ++c) {
            const double v = tensor.at(gx, gy, c);
            out[base + c] = seen ? std::max(out[base + c], v) : v;
          }
          seen = true;
        }
      }
    }
  }
  return out;
}

std::vector<ForegroundRegion> extractForegrounds(const SegmentedImage& seg,
                                                 const SegmentField& iris,
                                                 const FeatureTensor* tensor, int imageIndex) {
  const int n = seg.segmentCount;
  if (iris.size() != static_cast<std::size_t>(n))
    throw Error(ErrorKind::DimMismatch, "IrIS field does not match segmentation");
  const double mean = std::accumulate(iris.values.begin(), iris.values.end(), 0.0) / n;
  const double threshold = std::max(mean, 0.5);

  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> components;
  for (int s = 0; s < n; ++s) {
    if (iris.values[s] < threshold || comp[s] >= 0) continue;
    std::vector<int> members;
    std::vector<int> stack = {s};
    comp[s] = static_cast<int>(components.size());
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      members.push_back(cur);
      for (int nb : seg.adjacency[cur]) {
        if (comp[nb] < 0 && iris.values[nb] >= threshold) {
          comp[nb] = comp[s];
          stack.push_back(nb);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  if (components.empty()) return {};

  auto pixelCount = [&](const std::vector<int>& m) {
    std::size_t c = 0;
    for (int s : m) c += seg.pixels[s].size();
    return c;
  };
  // Components are discovered in ascending order of their smallest segment, so a
  // stable sort by size breaks ties by that index.
  std::stable_sort(components.begin(), components.end(),
                   [&](const auto& a, const auto& b) { return pixelCount(a) > pixelCount(b); });
  if (components.size() > static_cast<std::size_t>(kMaxForegroundComponents))
    components.resize(kMaxForegroundComponents);

  const SegmentStats st = computeStats(seg);
  const int c = static_cast<int>(components.size());
  std::vector<ForegroundRegion> regions;
  regions.reserve((1u << c) - 1);
  for (unsigned mask = 1; mask < (1u << c); ++mask) {
    ForegroundRegion r;
    r.owningImage = imageIndex;
    for (int k = 0; k < c; ++k)
      if (mask & (1u << k))
        r.memberSegments.insert(r.memberSegments.end(), components[k].begin(), components[k].end());
    std::sort(r.memberSegments.begin(), r.memberSegments.end());
    const UnionStats u = unionStats(st, r.memberSegments);
    r.meanLab = u.meanLab;
    r.meanPos = u.meanPos;
    r.posVariance = u.posVariance;
    r.colorHist = u.hist;
    if (tensor != nullptr && !tensor->empty())
      r.descriptorHigh = poolSegmentHigh(seg, *tensor, r.memberSegments);
    regions.push_back(std::move(r));
  }
  return regions;
}

double covarianceTrace(std::span<const std::vector<double>> samples) {
  if (samples.empty()) return 0.0;
  const std::size_t dim = samples.front().size();
  const double n = static_cast<double>(samples.size());
  double trace = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[d];
    mean /= n;
    double var = 0.0;
    for (const auto& s : samples) var += (s[d] - mean) * (s[d] - mean);
    trace += var / n;
  }
  return trace;
}

ForegroundPool buildForegroundPool(std::vector<std::vector<ForegroundRegion>> perImage,
                                   const DescriptorLayout& layout) {
  ForegroundPool pool;
  pool.layout = layout;
  pool.perImage = std::move(perImage);
  pool.gfg.assign(layout.gfgDim(), 0.0);

  std::vector<std::vector<double>> highs, lows;
  for (const auto& regions : pool.perImage) {
    for (const auto& r : regions) {
      const std::vector<double> d = r.descriptor();
      if (static_cast<int>(d.size()) != layout.regionDim())
        throw Error(ErrorKind::DimMismatch, "foreground region descriptor has unexpected length");
      for (std::size_t k = 0; k < d.size(); ++k) pool.gfg[k] += d[k];
      if (layout.highDim > 0) highs.push_back(r.descriptorHigh);
      lows.push_back(r.lowLevel());
    }
  }
  pool.lowTrace = covarianceTrace(lows);
  std::size_t slot = layout.regionDim();
  if (layout.highDim > 0) {
    pool.highTrace = covarianceTrace(highs);
    pool.gfg[slot++] = pool.highTrace;
  }
  pool.gfg[slot] = pool.lowTrace;
  l2Normalize(pool.gfg);
  return pool;
}

std::vector<SegmentDescriptor> buildDescriptors(const SegmentedImage& seg,
                                                const FeatureTensor* tensor,
                                                const ForegroundPool& pool, int imageIndex) {
  const DescriptorLayout& layout = pool.layout;
  const bool useHigh = layout.highDim > 0;
  if (useHigh && (tensor == nullptr || 4 * tensor->channels != layout.highDim))
    throw Error(ErrorKind::DimMismatch, "feature tensor does not match the descriptor layout");
  if (imageIndex < 0 || static_cast<std::size_t>(imageIndex) >= pool.perImage.size())
    throw Error(ErrorKind::InvalidArg, "image index outside the foreground pool");

  std::vector<double> sfg(layout.regionDim(), 0.0);
  for (const auto& r : pool.perImage[imageIndex]) {
    const std::vector<double> d = r.descriptor();
    for (std::size_t k = 0; k < d.size(); ++k) sfg[k] += d[k];
  }
  l2Normalize(sfg);

  const SegmentStats st = computeStats(seg);
  auto partFor = [&](std::span<const int> members) {
    std::vector<double> part;
    part.reserve(layout.segDim());
    if (useHigh) append(part, poolSegmentHigh(seg, *tensor, members));
    const UnionStats u = unionStats(st, members);
    append(part, u.meanLab);
    append(part, u.meanPos);
    append(part, u.hist);
    l2Normalize(part);
    return part;
  };

  std::vector<SegmentDescriptor> out(seg.segmentCount);
  for (int s = 0; s < seg.segmentCount; ++s) {
    const int self[1] = {s};
    std::vector<int> nbh = seg.adjacency[s];
    nbh.insert(std::lower_bound(nbh.begin(), nbh.end(), s), s);
    out[s].seg = partFor(self);
    out[s].nbh = partFor(nbh);
    out[s].sfg = sfg;
    out[s].gfg = pool.gfg;
  }
  return out;
}

FeatureTensor descriptorsToTensor(const std::vector<SegmentDescriptor>& descriptors) {
  FeatureTensor t;
  t.channels = 1;
  t.gridHeight = static_cast<int>(descriptors.size());
  t.gridWidth = descriptors.empty() ? 0 : static_cast<int>(descriptors.front().concatenated().size());
  for (const auto& d : descriptors) {
    const auto v = d.concatenated();
    if (static_cast<int>(v.size()) != t.gridWidth)
      throw Error(ErrorKind::DimMismatch, "descriptors have inconsistent lengths");
    for (double x : v) t.data.push_back(static_cast<float>(x));
  }
  t.sourceWidth = t.gridWidth;
  t.sourceHeight = t.gridHeight;
  return t;
}

}  // namespace cosal
