#include "cosal/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cosal/error.hpp"

namespace cosal {

namespace {

double labDistSq(const LabImage& lab, std::size_t p, const std::array<double, 3>& c) {
  const double d0 = lab.data[3 * p] - c[0];
  const double d1 = lab.data[3 * p + 1] - c[1];
  const double d2 = lab.data[3 * p + 2] - c[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

double gradientAt(const LabImage& lab, int x, int y) {
  const int w = lab.width;
  const int h = lab.height;
  auto idx = [&](int xx, int yy) {
    return static_cast<std::size_t>(std::clamp(yy, 0, h - 1)) * w + std::clamp(xx, 0, w - 1);
  };
  double g = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double dx = lab.data[3 * idx(x + 1, y) + c] - lab.data[3 * idx(x - 1, y) + c];
    const double dy = lab.data[3 * idx(x, y + 1) + c] - lab.data[3 * idx(x, y - 1) + c];
    g += dx * dx + dy * dy;
  }
  return g;
}

struct Center {
  std::array<double, 3> lab;
  double x, y;
};

// Labels 4-connected components; returns component count.
int connectedComponents(const std::vector<int>& labels, int w, int h, std::vector<int>& comp) {
  comp.assign(labels.size(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (comp[start] >= 0) continue;
    const int lbl = labels[start];
    comp[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      const std::size_t nbrs[4] = {x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p,
                                   y > 0 ? p - w : p, y + 1 < h ? p + w : p};
      for (std::size_t q : nbrs) {
        if (comp[q] < 0 && labels[q] == lbl) {
          comp[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  return next;
}

// Merges orphan components (non-largest pieces of a label, or pieces below
// minSize) into their largest adjacent region, smallest orphans first.
std::vector<int> enforceConnectivity(const std::vector<int>& labels, int w, int h, int labelCount,
                                     std::size_t minSize) {
  std::vector<int> comp;
  const int nComp = connectedComponents(labels, w, h, comp);

  std::vector<std::size_t> size(nComp, 0);
  std::vector<int> compLabel(nComp, -1);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    ++size[comp[p]];
    compLabel[comp[p]] = labels[p];
  }
  std::vector<int> largest(labelCount, -1);
  for (int c = 0; c < nComp; ++c) {
    int& best = largest[compLabel[c]];
    if (best < 0 || size[c] > size[best]) best = c;
  }

  std::vector<std::set<int>> adj(nComp);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w && comp[p] != comp[p + 1]) {
        adj[comp[p]].insert(comp[p + 1]);
        adj[comp[p + 1]].insert(comp[p]);
      }
      if (y + 1 < h && comp[p] != comp[p + w]) {
        adj[comp[p]].insert(comp[p + w]);
        adj[comp[p + w]].insert(comp[p]);
      }
    }
  }

  std::vector<int> parent(nComp);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> alive(nComp, true);
  std::vector<bool> kept(nComp);
  for (int c = 0; c < nComp; ++c) kept[c] = largest[compLabel[c]] == c && size[c] >= minSize;
  int aliveCount = nComp;

  while (aliveCount > 1) {
    int orphan = -1;
    for (int c = 0; c < nComp; ++c) {
      if (alive[c] && !kept[c] && (orphan < 0 || size[c] < size[orphan])) orphan = c;
    }
    if (orphan < 0) break;
    int target = -1;
    for (int n : adj[orphan]) {
      if (target < 0 || size[n] > size[target]) target = n;
    }
    if (target < 0) break;
    parent[orphan] = target;
    alive[orphan] = false;
    --aliveCount;
    size[target] += size[orphan];
    kept[target] = kept[target] || size[target] >= minSize;
    adj[target].erase(orphan);
    for (int n : adj[orphan]) {
      if (n == target) continue;
      adj[n].erase(orphan);
      adj[n].insert(target);
      adj[target].insert(n);
    }
    adj[orphan].clear();
  }

  auto find = [&](int c) {
    while (parent[c] != c) c = parent[c];
    return c;
  };
  std::vector<int> out(labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) out[p] = find(comp[p]);
  return out;
}

// Renumbers labels densely in raster order of first appearance.
int relabelDense(std::vector<int>& labels) {
  std::vector<int> remap;
  int next = 0;
  for (int& l : labels) {
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(l + 1, -1);
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

}  // namespace

SegmentedImage SegmentedImage::fromLabels(LabImage lab, std::vector<int> labels) {
  const int w = lab.width;
  const int h = lab.height;
  if (w <= 0 || h <= 0 || labels.size() != lab.pixelCount())
    throw Error(ErrorKind::DimMismatch, "label map does not match image size");
  const int maxLabel = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 0)
    throw Error(ErrorKind::InvalidArg, "negative segment label");

  SegmentedImage seg;
  seg.segmentCount = maxLabel + 1;
  const int n = seg.segmentCount;
  seg.pixels.assign(n, {});
  for (std::size_t p = 0; p < labels.size(); ++p) seg.pixels[labels[p]].push_back(p);
  for (int s = 0; s < n; ++s)
    if (seg.pixels[s].empty()) throw Error(ErrorKind::InvalidArg, "segment labels are not dense");

  std::vector<int> comp;
  if (connectedComponents(labels, w, h, comp) != n)
    throw Error(ErrorKind::InvalidArg, "segments must be 4-connected");

  std::vector<std::set<int>> adj(n);
  seg.boundaryFlags.assign(n, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const int l = labels[p];
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) seg.boundaryFlags[l] = 1;
      if (x + 1 < w && labels[p + 1] != l) {
        adj[l].insert(labels[p + 1]);
        adj[labels[p + 1]].insert(l);
      }
      if (y + 1 < h && labels[p + w] != l) {
        adj[l].insert(labels[p + w]);
        adj[labels[p + w]].insert(l);
      }
    }
  }
  seg.adjacency.resize(n);
  for (int s = 0; s < n; ++s) seg.adjacency[s].assign(adj[s].begin(), adj[s].end());

  seg.meanLab.assign(n, {0.0, 0.0, 0.0});
  seg.meanPos.assign(n, {0.0, 0.0});
  const double sx = w > 1 ? 1.0 / (w - 1) : 0.0;
  const double sy = h > 1 ? 1.0 / (h - 1) : 0.0;
  for (int s = 0; s < n; ++s) {
    std::array<double, 3> l{0.0, 0.0, 0.0};
    double px = 0.0, py = 0.0;
    for (std::size_t p : seg.pixels[s]) {
      for (int c = 0; c < 3; ++c) l[c] += lab.data[3 * p + c];
      px += static_cast<double>(p % w);
      py += static_cast<double>(p / w);
    }
    const double inv = 1.0 / static_cast<double>(seg.pixels[s].size());
    for (int c = 0; c < 3; ++c) seg.meanLab[s][c] = std::clamp(l[c] * inv, 0.0, 1.0);
    seg.meanPos[s] = {std::clamp(px * inv * sx, 0.0, 1.0), std::clamp(py * inv * sy, 0.0, 1.0)};
  }

  seg.labels = std::move(labels);
  seg.lab = std::move(lab);
  return seg;
}

SegmentedImage slic(const LabImage& lab, int targetCount, const SlicOptions& options) {
  const int w = lab.width;
  const int h = lab.height;
  const std::size_t n = lab.pixelCount();
  if (targetCount < 2 || static_cast<std::size_t>(targetCount) > n)
    throw Error(ErrorKind::InvalidArg,
                "superpixel count " + std::to_string(targetCount) + " out of range");

  const double step = std::sqrt(static_cast<double>(n) / targetCount);
  const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
  const int ny = std::max(1, static_cast<int>(std::lround(h / step)));

  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int cx = std::min(w - 1, static_cast<int>((i + 0.5) * w / nx));
      int cy = std::min(h - 1, static_cast<int>((j + 0.5) * h / ny));
      // Move the seed to the lowest-gradient pixel of its 3x3 neighbourhood.
      double best = gradientAt(lab, cx, cy);
      int bx = cx, by = cy;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = cx + dx, yy = cy + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          const double g = gradientAt(lab, xx, yy);
          if (g < best) {
            best = g;
            bx = xx;
            by = yy;
          }
        }
      }
      const auto c = lab.at(static_cast<std::size_t>(by) * w + bx);
      centers.push_back({c, static_cast<double>(bx), static_cast<double>(by)});
    }
  }

  const double m = options.compactness / 100.0;
  const double spatialScale = (m * m) / (step * step);
  const int window = static_cast<int>(std::ceil(step));
  std::vector<int> labels(n, -1);
  std::vector<double> dist(n);

  for (int iter = 0; iter < options.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(c.x) - window);
      const int x1 = std::min(w - 1, static_cast<int>(c.x) + window);
      const int y0 = std::max(0, static_cast<int>(c.y) - window);
      const int y1 = std::min(h - 1, static_cast<int>(c.y) + window);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          const double dxs = x - c.x, dys = y - c.y;
          const double d = labDistSq(lab, p, c.lab) + (dxs * dxs + dys * dys) * spatialScale;
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = static_cast<int>(k);
          }
        }
      }
    }
    // Any pixel outside every window goes to its nearest centre.
    for (std::size_t p = 0; p < n; ++p) {
      if (labels[p] >= 0) continue;
      const double x = static_cast<double>(p % w), y = static_cast<double>(p / w);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double dxs = x - centers[k].x, dys = y - centers[k].y;
        const double d = labDistSq(lab, p, centers[k].lab) + (dxs * dxs + dys * dys) * spatialScale;
        if (d < best) {
          best = d;
          labels[p] = static_cast<int>(k);
        }
      }
    }

    std::vector<Center> sums(centers.size(), Center{{0.0, 0.0, 0.0}, 0.0, 0.0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      Center& s = sums[labels[p]];
      for (int c = 0; c < 3; ++c) s.lab[c] += lab.data[3 * p + c];
      s.x += static_cast<double>(p % w);
      s.y += static_cast<double>(p / w);
      ++counts[labels[p]];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[k]);
      for (int c = 0; c < 3; ++c) centers[k].lab[c] = sums[k].lab[c] * inv;
      centers[k].x = sums[k].x * inv;
      centers[k].y = sums[k].y * inv;
    }
  }

  relabelDense(labels);
  const int labelCount = *std::max_element(labels.begin(), labels.end()) + 1;
  const auto minSize = static_cast<std::size_t>(std::max(1.0, step * step / 4.0));
  std::vector<int> connected = enforceConnectivity(labels, w, h, labelCount, minSize);
  relabelDense(connected);
  return SegmentedImage::fromLabels(lab, std::move(connected));
}

SegmentField poolMedian(const SegmentedImage& seg, const ScalarMap& map) {
  if (map.width != seg.width() || map.height != seg.height())
    throw Error(ErrorKind::DimMismatch, "map size does not match segmentation");
  SegmentField field;
  field.scaleTag = seg.segmentCount;
  field.values.resize(seg.segmentCount);
  std::vector<double> buf;
  for (int s = 0; s < seg.segmentCount; ++s) {
    buf.clear();
    for (std::size_t p : seg.pixels[s]) buf.push_back(map.values[p]);
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
    double med = buf[mid];
    if (buf.size() % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
      med = 0.5 * (lower + med);
    }
    field.values[s] = std::clamp(med, 0.0, 1.0);
  }
  return field;
}

SegmentField poolMean(const SegmentedImage& seg, const ScalarMap& map) {
  if (map.width != seg.width() || map.height != seg.height())
    throw Error(ErrorKind::DimMismatch, "map size does not match segmentation");
  SegmentField field;
  field.scaleTag = seg.segmentCount;
  field.values.resize(seg.segmentCount);
  for (int s = 0; s < seg.segmentCount; ++s) {
    double sum = 0.0;
    for (std::size_t p : seg.pixels[s]) sum += map.values[p];
    field.values[s] = sum / static_cast<double>(seg.pixels[s].size());
  }
  return field;
}

ScalarMap segmentFieldToPixels(const SegmentedImage& seg, const SegmentField& field) {
  if (field.size() != static_cast<std::size_t>(seg.segmentCount))
    throw Error(ErrorKind::DimMismatch, "field length does not match segment count");
  ScalarMap map(seg.width(), seg.height());
  for (std::size_t p = 0; p < map.values.size(); ++p) map.values[p] = field.values[seg.labels[p]];
  return map;
}

RgbImage boundaryOverlay(const SegmentedImage& seg, const RgbImage& image) {
  if (image.width != seg.width() || image.height != seg.height())
    throw Error(ErrorKind::DimMismatch, "image size does not match segmentation");
  RgbImage out = image;
  const int w = seg.width();
  const int h = seg.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const bool edge = (x + 1 < w && seg.labels[p + 1] != seg.labels[p]) ||
                        (y + 1 < h && seg.labels[p + w] != seg.labels[p]);
      if (edge) {
        out.data[3 * p] = 255;
        out.data[3 * p + 1] = 0;
        out.data[3 * p + 2] = 0;
      }
    }
  }
  return out;
}

}  // namespace cosal
