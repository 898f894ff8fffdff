#include "fixtures.hpp"

#include <cmath>
#include <set>

namespace cosal::testing {

LabImage uniformLab(int width, int height, std::array<double, 3> lab) {
  LabImage img;
  img.width = width;
  img.height = height;
  img.data.resize(3 * img.pixelCount());
  for (std::size_t p = 0; p < img.pixelCount(); ++p)
    for (int c = 0; c < 3; ++c) img.data[3 * p + c] = lab[c];
  return img;
}

SegmentedImage blockSegmentation(const LabImage& lab, int cols, int rows) {
  std::vector<int> labels(lab.pixelCount());
  for (int y = 0; y < lab.height; ++y)
    for (int x = 0; x < lab.width; ++x) {
      const int bx = x * cols / lab.width;
      const int by = y * rows / lab.height;
      labels[static_cast<std::size_t>(y) * lab.width + x] = by * cols + bx;
    }
  return SegmentedImage::fromLabels(lab, std::move(labels));
}

SegmentedImage coloredBlocks(int width, int height, int cols, int rows,
                             const std::vector<std::array<double, 3>>& colors) {
  LabImage lab = uniformLab(width, height, {0.5, 0.5, 0.5});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int b = (y * rows / height) * cols + x * cols / width;
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      for (int c = 0; c < 3; ++c) lab.data[3 * p + c] = colors[b][c];
    }
  return blockSegmentation(lab, cols, rows);
}

RgbImage texturedImage(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 6.0);
  struct Blob {
    double cx, cy, r;
    double color[3];
  };
  std::vector<Blob> blobs(6);
  for (auto& b : blobs) {
    b.cx = u(rng) * width;
    b.cy = u(rng) * height;
    b.r = (0.08 + 0.15 * u(rng)) * std::min(width, height);
    for (double& c : b.color) c = 30 + 200 * u(rng);
  }
  const double fx = 2 + 4 * u(rng), fy = 2 + 4 * u(rng);
  RgbImage img;
  img.width = width;
  img.height = height;
  img.data.resize(3 * img.pixelCount());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double c[3];
      for (int k = 0; k < 3; ++k)
        c[k] = 128 + 50 * std::sin(fx * x / width * 6.283 + k) * std::cos(fy * y / height * 6.283 - k);
      for (const auto& b : blobs)
        if (std::hypot(x - b.cx, y - b.cy) < b.r)
          for (int k = 0; k < 3; ++k) c[k] = b.color[k];
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      for (int k = 0; k < 3; ++k)
        img.data[3 * p + k] = static_cast<std::uint8_t>(std::clamp(std::lround(c[k] + noise(rng)), 0L, 255L));
    }
  return img;
}

AffinityGraph randomConnectedGraph(int nodes, double extraEdgeRatio, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(std::nextafter(0.0, 1.0), 1.0);
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;
  for (int i = 1; i < nodes; ++i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i));
    seen.insert({j, i});
    edges.push_back({j, i, std::max(1e-3, weight(rng))});
  }
  const int extra = static_cast<int>(extraEdgeRatio * nodes);
  for (int e = 0; e < extra; ++e) {
    int i = static_cast<int>(rng() % nodes), j = static_cast<int>(rng() % nodes);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second) continue;
    edges.push_back({i, j, weight(rng)});
  }
  return AffinityGraph::fromEdges(nodes, edges);
}

SegmentedImage chainSegmentation(int count) {
  const LabImage lab = uniformLab(count, 2, {0.5, 0.5, 0.5});
  SegmentedImage seg = blockSegmentation(lab, count, 1);
  std::fill(seg.boundaryFlags.begin(), seg.boundaryFlags.end(), 0);
  seg.boundaryFlags.front() = 1;
  seg.boundaryFlags.back() = 1;
  return seg;
}

std::vector<TrainSample> separableSamples(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double angle = 3.14159265358979323846 * (u(rng) + 1.0);
  const double nx = std::cos(angle), ny = std::sin(angle), offset = 0.3 * u(rng);
  std::vector<TrainSample> out;
  while (static_cast<int>(out.size()) < count) {
    const double x = u(rng), y = u(rng);
    const double side = nx * x + ny * y - offset;
    if (std::abs(side) < 0.1) continue;
    TrainSample s;
    s.x = {x, y};
    s.label = side > 0.0 ? 1 : 0;
    s.gtCosal = s.label;
    s.iris = s.label;
    out.push_back(std::move(s));
  }
  return out;
}

std::filesystem::path scratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cosal_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cosal::testing
