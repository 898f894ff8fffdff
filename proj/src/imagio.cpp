#include "cosal/imagio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "cosal/error.hpp"

namespace cosal {

namespace {

constexpr std::array<char, 4> kTensorMagic = {'C', 'S', 'G', 'T'};
constexpr std::uint8_t kTensorVersion = 1;
constexpr std::size_t kTensorHeaderSize = 4 + 1 + 3 * 4;

cv::Mat decodeFile(const std::filesystem::path& path, int flags) {
  const auto bytes = readFileBytes(path);
  cv::Mat img;
  try {
    img = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8U,
                               const_cast<std::uint8_t*>(bytes.data())),
                       flags);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
  if (img.empty()) throw Error(ErrorKind::Format, "cannot decode " + path.string());
  return img;
}

void encodeFile(const cv::Mat& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buf;
  // Fixed compression settings keep output bytes reproducible.
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imencode(".png", img, buf, params))
    throw Error(ErrorKind::Format, "cannot encode " + path.string());
  writeFileBytes(path, buf);
}

double srgbToLinear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double labF(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

// Catmull-Rom kernel, a = -0.5.
double cubicWeight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

double sourcePosition(int target, int targetSize, int sourceSize) {
  if (targetSize <= 1) return 0.0;
  return static_cast<double>(target) * (sourceSize - 1) / (targetSize - 1);
}

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t getU32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> readFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, "read failed for " + path.string());
  return bytes;
}

void writeFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

RgbImage loadImage(const std::filesystem::path& path) {
  const cv::Mat bgr = decodeFile(path, cv::IMREAD_COLOR);
  RgbImage img;
  img.width = bgr.cols;
  img.height = bgr.rows;
  img.data.resize(3 * img.pixelCount());
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::size_t p = 3 * (static_cast<std::size_t>(y) * img.width + x);
      img.data[p] = row[x][2];
      img.data[p + 1] = row[x][1];
      img.data[p + 2] = row[x][0];
    }
  }
  return img;
}

void saveImage(const RgbImage& img, const std::filesystem::path& path) { saveRgbPng(img, path); }

void saveRgbPng(const RgbImage& img, const std::filesystem::path& path) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      const std::size_t p = 3 * (static_cast<std::size_t>(y) * img.width + x);
      row[x] = cv::Vec3b(img.data[p + 2], img.data[p + 1], img.data[p]);
    }
  }
  encodeFile(bgr, path);
}

std::array<double, 3> rgbToLabNormalized(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double rl = srgbToLinear(r / 255.0);
  const double gl = srgbToLinear(g / 255.0);
  const double bl = srgbToLinear(b / 255.0);
  // sRGB -> XYZ, D65 reference white.
  const double X = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double Y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double Z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  const double fx = labF(X / 0.95047);
  const double fy = labF(Y / 1.0);
  const double fz = labF(Z / 1.08883);
  const double L = 116.0 * fy - 16.0;
  const double A = 500.0 * (fx - fy);
  const double B = 200.0 * (fy - fz);
  return {std::clamp(L / 100.0, 0.0, 1.0), std::clamp((A + 128.0) / 255.0, 0.0, 1.0),
          std::clamp((B + 128.0) / 255.0, 0.0, 1.0)};
}

LabImage rgbToLab(const RgbImage& img) {
  LabImage lab;
  lab.width = img.width;
  lab.height = img.height;
  lab.data.resize(img.data.size());
  for (std::size_t p = 0; p < img.pixelCount(); ++p) {
    const auto v = rgbToLabNormalized(img.data[3 * p], img.data[3 * p + 1], img.data[3 * p + 2]);
    std::copy(v.begin(), v.end(), lab.data.begin() + 3 * p);
  }
  return lab;
}

ScalarMap resizeBicubic(const ScalarMap& src, int targetWidth, int targetHeight) {
  if (targetWidth <= 0 || targetHeight <= 0)
    throw Error(ErrorKind::InvalidArg, "target size must be positive");
  if (src.width == targetWidth && src.height == targetHeight) return src;

  // Horizontal pass.
  ScalarMap tmp(targetWidth, src.height);
  for (int tx = 0; tx < targetWidth; ++tx) {
    const double sx = sourcePosition(tx, targetWidth, src.width);
    const int x0 = static_cast<int>(std::floor(sx));
    double w[4];
    for (int k = 0; k < 4; ++k) w[k] = cubicWeight(sx - (x0 - 1 + k));
    for (int y = 0; y < src.height; ++y) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        const int xi = std::clamp(x0 - 1 + k, 0, src.width - 1);
        acc += w[k] * src.at(xi, y);
      }
      tmp.at(tx, y) = acc;
    }
  }
  ScalarMap out(targetWidth, targetHeight);
  for (int ty = 0; ty < targetHeight; ++ty) {
    const double sy = sourcePosition(ty, targetHeight, src.height);
    const int y0 = static_cast<int>(std::floor(sy));
    double w[4];
    for (int k = 0; k < 4; ++k) w[k] = cubicWeight(sy - (y0 - 1 + k));
    for (int x = 0; x < targetWidth; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        const int yi = std::clamp(y0 - 1 + k, 0, src.height - 1);
        acc += w[k] * tmp.at(x, yi);
      }
      out.at(x, ty) = acc;
    }
  }
  return out;
}

ScalarMap resizeNearest(const ScalarMap& src, int targetWidth, int targetHeight) {
  if (targetWidth <= 0 || targetHeight <= 0)
    throw Error(ErrorKind::InvalidArg, "target size must be positive");
  ScalarMap out(targetWidth, targetHeight);
  for (int y = 0; y < targetHeight; ++y) {
    const int sy = std::min(src.height - 1, static_cast<int>((y + 0.5) * src.height / targetHeight));
    for (int x = 0; x < targetWidth; ++x) {
      const int sx = std::min(src.width - 1, static_cast<int>((x + 0.5) * src.width / targetWidth));
      out.at(x, y) = src.at(sx, sy);
    }
  }
  return out;
}

namespace {

ScalarMap readRawScalarMap(const std::filesystem::path& path) {
  if (path.extension() == ".csgt") {
    const FeatureTensor t = loadTensor(path);
    if (t.channels != 1)
      throw Error(ErrorKind::Format, path.string() + ": scalar map tensor must have C=1");
    ScalarMap m(t.gridWidth, t.gridHeight);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = t.data[i];
    return m;
  }
  cv::Mat img = decodeFile(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
  double scale = 1.0;
  if (img.depth() == CV_8U) scale = 255.0;
  else if (img.depth() == CV_16U) scale = 65535.0;
  else throw Error(ErrorKind::Format, path.string() + ": unsupported bit depth");
  ScalarMap m(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      const double v = img.depth() == CV_8U ? img.at<std::uint8_t>(y, x) : img.at<std::uint16_t>(y, x);
      m.at(x, y) = v / scale;
    }
  }
  return m;
}

}  // namespace

ScalarMap readScalarMap(const std::filesystem::path& path) {
  ScalarMap m = readRawScalarMap(path);
  for (double& v : m.values) v = std::clamp(v, 0.0, 1.0);
  return m;
}

ScalarMap loadScalarMap(const std::filesystem::path& path, int targetWidth, int targetHeight) {
  if (targetWidth <= 0 || targetHeight <= 0)
    throw Error(ErrorKind::InvalidArg, "target size must be positive");
  ScalarMap m = resizeBicubic(readRawScalarMap(path), targetWidth, targetHeight);
  for (double& v : m.values) v = std::clamp(v, 0.0, 1.0);
  return m;
}

BinaryMask loadMask(const std::filesystem::path& path, int targetWidth, int targetHeight) {
  const ScalarMap m = resizeNearest(readRawScalarMap(path), targetWidth, targetHeight);
  BinaryMask mask(targetWidth, targetHeight);
  for (std::size_t i = 0; i < m.values.size(); ++i) mask.values[i] = m.values[i] >= 0.5 ? 1 : 0;
  return mask;
}

void saveScalarMapPng(const ScalarMap& map, const std::filesystem::path& path) {
  cv::Mat img(map.height, map.width, CV_8U);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      img.at<std::uint8_t>(y, x) =
          static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(map.at(x, y), 0.0, 1.0)));
  encodeFile(img, path);
}

void saveMaskPng(const BinaryMask& mask, const std::filesystem::path& path) {
  cv::Mat img(mask.height, mask.width, CV_8U);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      img.at<std::uint8_t>(y, x) = mask.values[static_cast<std::size_t>(y) * mask.width + x] ? 255 : 0;
  encodeFile(img, path);
}

void saveLabelPng16(std::span<const int> labels, int width, int height,
                    const std::filesystem::path& path) {
  if (labels.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorKind::DimMismatch, "label count does not match image size");
  cv::Mat img(height, width, CV_16U);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      img.at<std::uint16_t>(y, x) =
          static_cast<std::uint16_t>(labels[static_cast<std::size_t>(y) * width + x]);
  encodeFile(img, path);
}

std::vector<std::uint8_t> encodeTensor(const FeatureTensor& tensor) {
  const std::size_t count =
      static_cast<std::size_t>(tensor.gridHeight) * tensor.gridWidth * tensor.channels;
  if (tensor.data.size() != count)
    throw Error(ErrorKind::DimMismatch, "tensor data length does not match its shape");
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderSize + 4 * count);
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  out.push_back(kTensorVersion);
  putU32(out, static_cast<std::uint32_t>(tensor.gridHeight));
  putU32(out, static_cast<std::uint32_t>(tensor.gridWidth));
  putU32(out, static_cast<std::uint32_t>(tensor.channels));
  for (float v : tensor.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    putU32(out, bits);
  }
  return out;
}

FeatureTensor decodeTensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTensorHeaderSize) throw Error(ErrorKind::Format, "tensor header truncated");
  if (!std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin()))
    throw Error(ErrorKind::Format, "bad tensor magic");
  if (bytes[4] != kTensorVersion)
    throw Error(ErrorKind::Format, "unsupported tensor version " + std::to_string(bytes[4]));
  const std::uint64_t h = getU32(bytes, 5);
  const std::uint64_t w = getU32(bytes, 9);
  const std::uint64_t c = getU32(bytes, 13);
  if (h == 0 || w == 0 || c == 0) throw Error(ErrorKind::Format, "tensor has a zero dimension");
  const std::uint64_t count = h * w * c;
  if (count > (bytes.size() - kTensorHeaderSize) / 4 ||
      bytes.size() != kTensorHeaderSize + 4 * count)
    throw Error(ErrorKind::Format, "tensor payload size does not match its shape");

  FeatureTensor t;
  t.gridHeight = static_cast<int>(h);
  t.gridWidth = static_cast<int>(w);
  t.channels = static_cast<int>(c);
  t.sourceWidth = t.gridWidth;
  t.sourceHeight = t.gridHeight;
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = getU32(bytes, kTensorHeaderSize + 4 * i);
    std::memcpy(&t.data[i], &bits, sizeof bits);
  }
  return t;
}

FeatureTensor loadTensor(const std::filesystem::path& path) {
  try {
    return decodeTensor(readFileBytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) throw Error(ErrorKind::Format, path.string() + ": " + e.what());
    throw;
  }
}

void saveTensor(const FeatureTensor& tensor, const std::filesystem::path& path) {
  writeFileBytes(path, encodeTensor(tensor));
}

}  // namespace cosal
