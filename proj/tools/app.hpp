#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosal/cosal.hpp"

namespace cosal::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or malformed dataset content that the library itself does not see.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IrisSource { Files, Fallback };

struct RunConfig {
  std::filesystem::path datasetRoot;
  std::optional<std::string> groupName;
  IrisSource irisSource = IrisSource::Files;
  std::optional<std::filesystem::path> featureTensors;  // relative paths resolve against the group
  std::optional<std::filesystem::path> modelWeights;
  CosalParams params;
  double rho = 0.7;
  double gamma = 3.0;
  std::vector<int> scales = {200, 150, 50};
  double compactness = 10.0;
  std::filesystem::path outputDir;
  int workers = 1;
  bool writeMasks = false;
  bool debug = false;

  // train-ieis
  std::filesystem::path trainRoot;
  int epochs = 100;
  int batchSize = 32;
  double learningRate = 0.001;
  double momentum = 0.9;
  double weightDecay = 0.0005;
  std::vector<int> hidden = {256, 64};

  // eval
  std::filesystem::path predDir;
  std::filesystem::path gtDir;
};

/// Applies one key = value setting; unknown keys and bad values throw ConfigError.
void applySetting(RunConfig& config, const std::string& key, const std::string& value);

/// "key = value" lines; '#' starts a comment, [section] headers are ignored.
void applyConfigFile(RunConfig& config, const std::filesystem::path& path);

void validate(const RunConfig& config);

/// Parameters that affect results, as stable "key=value" text.
std::map<std::string, std::string> describe(const RunConfig& config);

int runDetect(const RunConfig& config);
int runTrainIeis(const RunConfig& config);
int runEval(const RunConfig& config);
int runDumpDebug(const RunConfig& config);

/// Maps an exception to the documented exit status and prints it to stderr.
int reportFailure(const std::exception& e);

std::string sha256Hex(const std::vector<std::uint8_t>& bytes);

}  // namespace cosal::app
