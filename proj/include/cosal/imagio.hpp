#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cosal {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB triples

  std::size_t pixelCount() const { return static_cast<std::size_t>(width) * height; }
};

// Lab with every channel rescaled to [0,1]: L/100, (a+128)/255, (b+128)/255.
struct LabImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major (L,a,b) triples

  std::size_t pixelCount() const { return static_cast<std::size_t>(width) * height; }
  std::array<double, 3> at(std::size_t pixel) const {
    return {data[3 * pixel], data[3 * pixel + 1], data[3 * pixel + 2]};
  }
};

struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, each in [0,1]

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}
  std::size_t count() const;
};

// Generic per-image feature grid, e.g. a convolutional activation volume.
struct FeatureTensor {
  int gridWidth = 0;
  int gridHeight = 0;
  int channels = 0;
  std::vector<float> data;  // row-major cells, channel-fastest
  int sourceWidth = 0;
  int sourceHeight = 0;

  float at(int gx, int gy, int c) const {
    return data[(static_cast<std::size_t>(gy) * gridWidth + gx) * channels + c];
  }
  bool empty() const { return data.empty(); }
};

RgbImage loadImage(const std::filesystem::path& path);
void saveImage(const RgbImage& img, const std::filesystem::path& path);

std::array<double, 3> rgbToLabNormalized(std::uint8_t r, std::uint8_t g, std::uint8_t b);
LabImage rgbToLab(const RgbImage& img);

/// Reads an 8/16-bit grayscale PNG (or a single-channel CSGT tensor), scales to
/// [0,1] and resamples to the target size with a Catmull-Rom bicubic kernel.
ScalarMap loadScalarMap(const std::filesystem::path& path, int targetWidth, int targetHeight);
/// Same scaling and clamping as loadScalarMap, at the stored size.
ScalarMap readScalarMap(const std::filesystem::path& path);

/// Catmull-Rom (a = -0.5) resampling with corner-aligned sampling positions, so
/// the four corner samples of the source land exactly on the target corners.
ScalarMap resizeBicubic(const ScalarMap& src, int targetWidth, int targetHeight);
ScalarMap resizeNearest(const ScalarMap& src, int targetWidth, int targetHeight);

/// Ground-truth masks: nearest-neighbour resize, then value >= 0.5.
BinaryMask loadMask(const std::filesystem::path& path, int targetWidth, int targetHeight);

void saveScalarMapPng(const ScalarMap& map, const std::filesystem::path& path);
void saveMaskPng(const BinaryMask& mask, const std::filesystem::path& path);
void saveLabelPng16(std::span<const int> labels, int width, int height,
                    const std::filesystem::path& path);
void saveRgbPng(const RgbImage& img, const std::filesystem::path& path);

// CSGT container: "CSGT", u8 version=1, u32 LE H, W, C, then H*W*C LE float32.
std::vector<std::uint8_t> encodeTensor(const FeatureTensor& tensor);
FeatureTensor decodeTensor(std::span<const std::uint8_t> bytes);
FeatureTensor loadTensor(const std::filesystem::path& path);
void saveTensor(const FeatureTensor& tensor, const std::filesystem::path& path);

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path);
void writeFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cosal
