#include "app.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "cosal/error.hpp"
#include "cosal/eval.hpp"
#include "cosal/pipeline.hpp"

namespace cosal::app {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void badValue(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value for '" + key + "': '" + value + "'");
}

bool parseBool(const std::string& key, const std::string& v) {
  std::string l = v;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  badValue(key, v);
}

template <typename T>
T parseNumber(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) badValue(key, v);
  return out;
}

std::vector<int> parseIntList(const std::string& key, const std::string& v) {
  std::string body = v;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') badValue(key, v);
    body = body.substr(1, body.size() - 2);
  }
  std::vector<int> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) badValue(key, v);
    out.push_back(parseNumber<int>(key, item));
  }
  return out;
}

bool isImageFile(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> listFiles(const fs::path& dir, bool (*accept)(const fs::path&)) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && accept(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

bool isMapFile(const fs::path& p) { return isImageFile(p) || p.extension() == ".csgt"; }

std::optional<fs::path> findByStem(const fs::path& dir, const std::string& stem,
                                   std::initializer_list<const char*> extensions) {
  for (const char* ext : extensions) {
    fs::path p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

fs::path resolveGroup(const RunConfig& config) {
  if (config.datasetRoot.empty()) throw ConfigError("dataset_root is required");
  if (!fs::is_directory(config.datasetRoot))
    throw ConfigError("dataset_root is not a directory: " + config.datasetRoot.string());
  if (config.groupName) {
    const fs::path dir = config.datasetRoot / *config.groupName;
    if (!fs::is_directory(dir / "images")) throw DataError("group has no images directory: " + dir.string());
    return dir;
  }
  if (fs::is_directory(config.datasetRoot / "images")) return config.datasetRoot;
  std::vector<fs::path> groups;
  for (const auto& e : fs::directory_iterator(config.datasetRoot))
    if (e.is_directory() && fs::is_directory(e.path() / "images")) groups.push_back(e.path());
  if (groups.size() != 1)
    throw ConfigError("dataset_root holds " + std::to_string(groups.size()) +
                      " groups; select one with group=<name>");
  return groups.front();
}

struct LoadedGroup {
  fs::path dir;
  std::vector<std::string> stems;
  GroupInput input;
  std::vector<BinaryMask> gt;  // empty when the group has no ground truth
};

LoadedGroup loadGroup(const RunConfig& config, const fs::path& dir, bool requireGt) {
  LoadedGroup g;
  g.dir = dir;
  const std::vector<fs::path> files = listFiles(dir / "images", isImageFile);
  if (files.empty()) throw DataError("no images in " + (dir / "images").string());
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    if (std::find(g.stems.begin(), g.stems.end(), stem) != g.stems.end())
      throw DataError("duplicate image stem '" + stem + "' in " + (dir / "images").string());
    g.stems.push_back(stem);
    g.input.names.push_back(stem);
    g.input.images.push_back(loadImage(f));
  }

  if (config.irisSource == IrisSource::Files) {
    for (std::size_t i = 0; i < g.stems.size(); ++i) {
      const auto p = findByStem(dir / "iris", g.stems[i], {".png", ".csgt"});
      if (!p) throw DataError("missing IrIS map: " + (dir / "iris" / (g.stems[i] + ".png")).string());
      const RgbImage& img = g.input.images[i];
      g.input.iris.push_back(loadScalarMap(*p, img.width, img.height));
    }
  }

  if (config.featureTensors) {
    const fs::path featDir = config.featureTensors->is_absolute() ? *config.featureTensors : dir / *config.featureTensors;
    for (std::size_t i = 0; i < g.stems.size(); ++i) {
      const fs::path p = featDir / (g.stems[i] + ".csgt");
      if (!fs::is_regular_file(p)) throw DataError("missing feature tensor: " + p.string());
      FeatureTensor t = loadTensor(p);
      t.sourceWidth = g.input.images[i].width;
      t.sourceHeight = g.input.images[i].height;
      g.input.tensors.push_back(std::move(t));
    }
  }

  const bool hasGt = fs::is_directory(dir / "gt");
  if (requireGt && !hasGt) throw DataError("missing ground-truth directory: " + (dir / "gt").string());
  if (hasGt) {
    for (std::size_t i = 0; i < g.stems.size(); ++i) {
      const auto p = findByStem(dir / "gt", g.stems[i], {".png"});
      if (!p) throw DataError("missing ground-truth mask: " + (dir / "gt" / (g.stems[i] + ".png")).string());
      const RgbImage& img = g.input.images[i];
      g.gt.push_back(loadMask(*p, img.width, img.height));
    }
  }
  return g;
}

PipelineConfig pipelineConfig(const RunConfig& config) {
  PipelineConfig pc;
  pc.params = config.params;
  pc.scales = config.scales;
  pc.slic.compactness = config.compactness;
  pc.workers = config.workers;
  if (config.modelWeights) pc.model = loadModel(*config.modelWeights);
  return pc;
}

// Every file written through here is listed, with its hash, in manifest.json.
class OutputSet {
 public:
  explicit OutputSet(fs::path root) : root_(std::move(root)) {
    if (root_.empty()) throw ConfigError("output_dir is required");
    fs::create_directories(root_);
  }

  fs::path prepare(const std::string& relative) {
    const fs::path p = root_ / relative;
    fs::create_directories(p.parent_path());
    return p;
  }

  void record(const std::string& relative) {
    const std::vector<std::uint8_t> bytes = readFileBytes(root_ / relative);
    entries_[relative] = {sha256Hex(bytes), bytes.size()};
  }

  void text(const std::string& relative, const std::string& content) {
    writeFileBytes(prepare(relative),
                   std::span(reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
    record(relative);
  }

  void map(const std::string& relative, const ScalarMap& m) {
    saveScalarMapPng(m, prepare(relative));
    record(relative);
  }

  void mask(const std::string& relative, const BinaryMask& m) {
    saveMaskPng(m, prepare(relative));
    record(relative);
  }

  void finish(const RunConfig& config, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    nlohmann::ordered_json params;
    for (const auto& [k, v] : describe(config)) params[k] = v;
    j["parameters"] = params;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& [path, entry] : entries_)
      files.push_back({{"path", path}, {"sha256", entry.first}, {"bytes", entry.second}});
    j["files"] = files;
    const std::string s = j.dump(2) + "\n";
    writeFileBytes(root_ / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

 private:
  fs::path root_;
  std::map<std::string, std::pair<std::string, std::size_t>> entries_;
};

void writeDebugMaps(OutputSet& out, const GroupContext& ctx, const LoadedGroup& g) {
  for (std::size_t m = 0; m < ctx.imageCount(); ++m) {
    const SegmentedImage& seg = ctx.images[m];
    const std::string base = "debug/" + g.stems[m];
    saveLabelPng16(seg.labels, seg.width(), seg.height(), out.prepare(base + "_labels.png"));
    out.record(base + "_labels.png");
    saveRgbPng(boundaryOverlay(seg, g.input.images[m]), out.prepare(base + "_overlay.png"));
    out.record(base + "_overlay.png");
    out.map(base + "_rs.png", segmentFieldToPixels(seg, ctx.iris[m]));
    out.map(base + "_es.png", segmentFieldToPixels(seg, ctx.ieis[m]));
    out.map(base + "_ic.png", segmentFieldToPixels(seg, ctx.initial[m]));
    out.map(base + "_ac.png", segmentFieldToPixels(seg, ctx.auxiliary[m]));
  }
}

int detect(const RunConfig& config, bool dump) {
  validate(config);
  const fs::path groupDir = resolveGroup(config);
  if (config.outputDir.empty()) throw ConfigError("output_dir is required");
  const LoadedGroup g = loadGroup(config, groupDir, false);
  const GroupContext ctx = runGroup(g.input, pipelineConfig(config));

  OutputSet out(config.outputDir);
  std::vector<ScalarMap> maps;
  std::vector<BinaryMask> masks;
  const bool withMasks = config.writeMasks || config.params.cosegMode;
  for (std::size_t m = 0; m < ctx.imageCount(); ++m) {
    maps.push_back(segmentFieldToPixels(ctx.images[m], ctx.cosaliency[m]));
    out.map("cs/" + g.stems[m] + ".png", maps.back());
    if (withMasks) {
      masks.push_back(toCosegMask(ctx.images[m], ctx.cosaliency[m]));
      out.mask("mask/" + g.stems[m] + ".png", masks.back());
    }
  }
  if (config.debug || dump) writeDebugMaps(out, ctx, g);
  if (dump) {
    for (std::size_t m = 0; m < ctx.imageCount(); ++m) {
      const std::string base = "debug/" + g.stems[m];
      out.text(base + "_graph.txt", intraGraph(ctx.images[m]).toCoordinateList());
      saveTensor(descriptorsToTensor(ctx.descriptors[m]), out.prepare(base + "_descriptors.csgt"));
      out.record(base + "_descriptors.csgt");
    }
  }
  if (!g.gt.empty()) {
    const MetricReport report = evaluate(maps, g.gt, masks);
    out.text("report.json", reportJson(report));
    out.text("pr_curve.csv", curveCsv(report.curve));
  }
  out.finish(config, dump ? "dump-debug" : "detect");
  std::cerr << "processed " << ctx.imageCount() << " images of group " << groupDir.filename().string() << "\n";
  return kExitOk;
}

}  // namespace

void applySetting(RunConfig& c, const std::string& rawKey, const std::string& rawValue) {
  const std::string key = trim(rawKey);
  const std::string v = unquote(trim(rawValue));
  if (key == "dataset_root") c.datasetRoot = v;
  else if (key == "group") c.groupName = v.empty() ? std::nullopt : std::optional<std::string>(v);
  else if (key == "iris_source") {
    if (v == "files") c.irisSource = IrisSource::Files;
    else if (v == "fallback") c.irisSource = IrisSource::Fallback;
    else badValue(key, v);
  } else if (key == "feature_tensors") c.featureTensors = v.empty() ? std::nullopt : std::optional<fs::path>(v);
  else if (key == "model_weights") c.modelWeights = v.empty() ? std::nullopt : std::optional<fs::path>(v);
  else if (key == "alpha") c.params.alpha = parseNumber<double>(key, v);
  else if (key == "eta") c.params.eta = parseNumber<double>(key, v);
  else if (key == "sigma") c.params.sigma = parseNumber<double>(key, v);
  else if (key == "tau") c.params.tau = parseNumber<double>(key, v);
  else if (key == "clusters" || key == "K") c.params.clusters = parseNumber<int>(key, v);
  else if (key == "knn" || key == "k") c.params.knn = parseNumber<int>(key, v);
  else if (key == "rho") c.rho = parseNumber<double>(key, v);
  else if (key == "gamma") c.gamma = parseNumber<double>(key, v);
  else if (key == "scales" || key == "superpixel_scales") c.scales = parseIntList(key, v);
  else if (key == "coseg_mode") c.params.cosegMode = parseBool(key, v);
  else if (key == "seed" || key == "random_seed") c.params.seed = parseNumber<std::uint64_t>(key, v);
  else if (key == "positional_sigma") c.params.positionalSigma = parseNumber<double>(key, v);
  else if (key == "output_dir") c.outputDir = v;
  else if (key == "workers") c.workers = parseNumber<int>(key, v);
  else if (key == "compactness") c.compactness = parseNumber<double>(key, v);
  else if (key == "write_masks") c.writeMasks = parseBool(key, v);
  else if (key == "debug") c.debug = parseBool(key, v);
  else if (key == "train_root") c.trainRoot = v;
  else if (key == "epochs") c.epochs = parseNumber<int>(key, v);
  else if (key == "batch_size") c.batchSize = parseNumber<int>(key, v);
  else if (key == "learning_rate") c.learningRate = parseNumber<double>(key, v);
  else if (key == "momentum") c.momentum = parseNumber<double>(key, v);
  else if (key == "weight_decay") c.weightDecay = parseNumber<double>(key, v);
  else if (key == "hidden") c.hidden = parseIntList(key, v);
  else if (key == "pred_dir") c.predDir = v;
  else if (key == "gt_dir") c.gtDir = v;
  else throw ConfigError("unknown setting '" + key + "'");
}

void applyConfigFile(RunConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string s = trim(line);
    if (s.empty() || s.front() == '#' || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineNo) + ": expected key = value");
    std::string value = trim(s.substr(eq + 1));
    if (!value.empty() && value.front() != '"' && value.front() != '\'') {
      const auto hash = value.find('#');
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    applySetting(config, s.substr(0, eq), value);
  }
}

void validate(const RunConfig& c) {
  const CosalParams& p = c.params;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha must lie in (0,1)");
  require(p.eta > 0.0, "eta must be positive");
  require(p.sigma > 0.0, "sigma must be positive");
  require(p.tau > 0.0 && p.tau < 1.0, "tau must lie in (0,1)");
  require(p.clusters >= 2, "clusters (K) must be at least 2");
  require(p.knn >= 1, "knn (k) must be at least 1");
  require(c.rho > 0.0 && c.rho < 1.0, "rho must lie in (0,1)");
  require(c.gamma > 0.0, "gamma must be positive");
  require(p.positionalSigma > 0.0, "positional_sigma must be positive");
  require(!c.scales.empty(), "scales must not be empty");
  for (std::size_t i = 0; i < c.scales.size(); ++i) {
    require(c.scales[i] >= 2, "scales must be at least 2");
    require(i == 0 || c.scales[i] < c.scales[i - 1], "scales must be strictly descending");
  }
  require(c.compactness > 0.0, "compactness must be positive");
  require(c.workers >= 1, "workers must be at least 1");
  require(c.epochs >= 1, "epochs must be at least 1");
  require(c.batchSize >= 2, "batch_size must be at least 2");
  require(c.learningRate > 0.0, "learning_rate must be positive");
  require(c.momentum >= 0.0 && c.momentum < 1.0, "momentum must lie in [0,1)");
  require(c.weightDecay >= 0.0, "weight_decay must be non-negative");
  require(!c.hidden.empty(), "hidden must list at least one layer");
  for (int h : c.hidden) require(h >= 1, "hidden layer widths must be positive");
}

std::map<std::string, std::string> describe(const RunConfig& c) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto list = [](const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
  };
  const CosalParams& p = c.params;
  return {
      {"alpha", num(p.alpha)},
      {"eta", num(p.eta)},
      {"sigma", num(p.sigma)},
      {"tau", num(p.tau)},
      {"clusters", std::to_string(p.clusters)},
      {"knn", std::to_string(p.knn)},
      {"rho", num(c.rho)},
      {"gamma", num(c.gamma)},
      {"scales", list(c.scales)},
      {"coseg_mode", p.cosegMode ? "true" : "false"},
      {"seed", std::to_string(p.seed)},
      {"positional_sigma", num(p.positionalSigma)},
      {"compactness", num(c.compactness)},
      {"iris_source", c.irisSource == IrisSource::Files ? "files" : "fallback"},
      {"feature_tensors", c.featureTensors ? "yes" : "no"},
      {"model", c.modelWeights ? "loaded" : "heuristic"},
      {"epochs", std::to_string(c.epochs)},
      {"batch_size", std::to_string(c.batchSize)},
      {"learning_rate", num(c.learningRate)},
      {"momentum", num(c.momentum)},
      {"weight_decay", num(c.weightDecay)},
      {"hidden", list(c.hidden)},
  };
}

int runDetect(const RunConfig& config) { return detect(config, false); }

int runDumpDebug(const RunConfig& config) { return detect(config, true); }

int runTrainIeis(const RunConfig& config) {
  validate(config);
  const fs::path root = config.trainRoot.empty() ? config.datasetRoot : config.trainRoot;
  if (root.empty()) throw ConfigError("train_root (or dataset_root) is required");
  if (!fs::is_directory(root)) throw DataError("training root is not a directory: " + root.string());
  std::vector<fs::path> groups;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && fs::is_directory(e.path() / "images")) groups.push_back(e.path());
  std::sort(groups.begin(), groups.end());
  if (groups.empty()) throw DataError("no training groups under " + root.string());
  if (config.outputDir.empty()) throw ConfigError("output_dir is required");

  std::vector<TrainSample> samples;
  for (const fs::path& dir : groups) {
    const LoadedGroup g = loadGroup(config, dir, true);
    const std::size_t m = g.stems.size();
    std::vector<LabImage> labs(m);
    for (std::size_t i = 0; i < m; ++i) labs[i] = rgbToLab(g.input.images[i]);
    for (int scale : config.scales) {
      std::vector<SegmentedImage> segs(m);
      std::vector<SegmentField> rs(m);
      SlicOptions slicOptions;
      slicOptions.compactness = config.compactness;
      for (std::size_t i = 0; i < m; ++i) {
        segs[i] = slic(labs[i], scale, slicOptions);
        rs[i] = g.input.iris.empty() ? fallbackIris(segs[i]) : poolMedian(segs[i], g.input.iris[i]);
      }
      const ScaleDescriptors d = describeScale(segs, rs, g.input, config.workers);
      for (std::size_t i = 0; i < m; ++i) {
        ScalarMap gtMap(g.gt[i].width, g.gt[i].height);
        for (std::size_t p = 0; p < gtMap.values.size(); ++p) gtMap.values[p] = g.gt[i].values[p];
        const SegmentField gtField = poolMean(segs[i], gtMap);
        for (int s = 0; s < segs[i].segmentCount; ++s) {
          TrainSample t;
          t.x = d.descriptors[i][s].concatenated();
          t.gtCosal = gtField.values[s];
          t.label = t.gtCosal >= 0.5 ? 1 : 0;
          t.iris = rs[i].values[s];
          samples.push_back(std::move(t));
        }
      }
    }
  }

  TrainConfig tc;
  tc.loss = {config.rho, config.gamma};
  tc.learningRate = config.learningRate;
  tc.momentum = config.momentum;
  tc.weightDecay = config.weightDecay;
  tc.epochs = config.epochs;
  tc.batchSize = config.batchSize;
  tc.hidden = config.hidden;
  tc.seed = config.params.seed;
  const TrainResult result = train(samples, tc);

  OutputSet out(config.outputDir);
  saveModel(result.model, out.prepare("ieis_model"));
  out.record("ieis_model.csgt");
  out.record("ieis_model.json");
  std::string csv = "epoch,loss\n";
  char line[64];
  for (std::size_t e = 0; e < result.lossTrace.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.12g\n", e + 1, result.lossTrace[e]);
    csv += line;
  }
  out.text("loss.csv", csv);
  out.finish(config, "train-ieis");
  std::cerr << "trained on " << samples.size() << " segments from " << groups.size() << " groups; accuracy "
            << accuracy(result.model, samples) << "\n";
  return kExitOk;
}

int runEval(const RunConfig& config) {
  if (config.predDir.empty() || config.gtDir.empty()) throw ConfigError("pred_dir and gt_dir are required");
  const std::vector<fs::path> preds = listFiles(config.predDir, isMapFile);
  const std::vector<fs::path> gts = listFiles(config.gtDir, isImageFile);
  if (preds.empty() || gts.empty()) throw DataError("nothing to evaluate: prediction or ground-truth directory is empty");
  std::map<std::string, fs::path> predByStem, gtByStem;
  for (const auto& p : preds) predByStem[p.stem().string()] = p;
  for (const auto& p : gts) gtByStem[p.stem().string()] = p;
  for (const auto& [stem, p] : gtByStem)
    if (!predByStem.count(stem)) throw DataError("no prediction for ground truth " + p.string());
  for (const auto& [stem, p] : predByStem)
    if (!gtByStem.count(stem)) throw DataError("no ground truth for prediction " + p.string());

  std::vector<ScalarMap> maps;
  std::vector<BinaryMask> masks;
  for (const auto& [stem, gtPath] : gtByStem) {
    const ScalarMap raw = readScalarMap(gtPath);
    BinaryMask gt(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.values.size(); ++i) gt.values[i] = raw.values[i] >= 0.5 ? 1 : 0;
    maps.push_back(loadScalarMap(predByStem.at(stem), gt.width, gt.height));
    masks.push_back(std::move(gt));
  }
  const MetricReport report = evaluate(maps, masks);
  const std::string json = reportJson(report);
  std::cout << json;
  if (!config.outputDir.empty()) {
    OutputSet out(config.outputDir);
    out.text("report.json", json);
    out.text("pr_curve.csv", curveCsv(report.curve));
    out.finish(config, "eval");
  }
  return kExitOk;
}

int reportFailure(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitData;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::DegenerateSeeds: return kExitDegenerate;
      case ErrorKind::SolveFailure: return kExitInternal;
      default: return kExitData;
    }
  }
  return kExitInternal;
}

std::string sha256Hex(const std::vector<std::uint8_t>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace cosal::app
