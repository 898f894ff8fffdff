#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "app.hpp"

namespace {

struct FlagBinding {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::string configPath;
  std::vector<std::string> sets;
  std::vector<std::unique_ptr<FlagBinding>> flags;

  void bind(const std::string& name, const std::string& key, const std::string& help) {
    auto f = std::make_unique<FlagBinding>();
    f->key = key;
    f->option = app->add_option(name, f->value, help);
    flags.push_back(std::move(f));
  }

  void bindSwitch(const std::string& name, const std::string& key, const std::string& help) {
    auto f = std::make_unique<FlagBinding>();
    f->key = key;
    f->value = "true";
    f->option = app->add_flag(name, help);
    flags.push_back(std::move(f));
  }

  cosal::app::RunConfig resolve() const {
    cosal::app::RunConfig config;
    if (!configPath.empty()) cosal::app::applyConfigFile(config, configPath);
    for (const auto& f : flags)
      if (f->option->count() > 0) cosal::app::applySetting(config, f->key, f->value);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw cosal::app::ConfigError("--set expects key=value, got '" + s + "'");
      cosal::app::applySetting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    return config;
  }
};

Subcommand makeSubcommand(CLI::App& root, const std::string& name, const std::string& help) {
  Subcommand sc;
  sc.app = root.add_subcommand(name, help);
  sc.app->add_option("-c,--config", sc.configPath, "key = value configuration file");
  sc.app->add_option("--set", sc.sets, "override any setting, key=value (repeatable)");
  return sc;
}

void addRunFlags(Subcommand& sc) {
  sc.bind("-d,--dataset-root", "dataset_root", "dataset root directory");
  sc.bind("-g,--group", "group", "group name under the dataset root");
  sc.bind("-o,--output", "output_dir", "output directory");
  sc.bind("--iris-source", "iris_source", "files | fallback");
  sc.bind("--features", "feature_tensors", "feature tensor directory (relative to the group)");
  sc.bind("--model", "model_weights", "trained scorer weights (base path)");
  sc.bind("--seed", "seed", "random seed");
  sc.bind("--workers", "workers", "worker threads");
  sc.bind("--scales", "scales", "superpixel scales, e.g. 200,150,50");
  sc.bindSwitch("--coseg", "coseg_mode", "co-segmentation normalization and masks");
  sc.bindSwitch("--masks", "write_masks", "write binary masks");
  sc.bindSwitch("--debug", "debug", "write intermediate maps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App root{"Co-saliency detection for image groups"};
  root.require_subcommand(1);

  Subcommand detect = makeSubcommand(root, "detect", "compute co-saliency maps for one group");
  addRunFlags(detect);
  Subcommand dump = makeSubcommand(root, "dump-debug", "detect plus segmentations, graphs and descriptors");
  addRunFlags(dump);
  Subcommand trainCmd = makeSubcommand(root, "train-ieis", "train the inter-image scorer");
  addRunFlags(trainCmd);
  trainCmd.bind("--train-root", "train_root", "root holding training groups");
  trainCmd.bind("--epochs", "epochs", "training epochs");
  Subcommand evalCmd = makeSubcommand(root, "eval", "score predicted maps against ground truth");
  evalCmd.bind("--pred", "pred_dir", "directory of predicted maps");
  evalCmd.bind("--gt", "gt_dir", "directory of ground-truth masks");
  evalCmd.bind("-o,--output", "output_dir", "directory for report and curves");

  try {
    root.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return root.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return root.exit(e);
  } catch (const CLI::ParseError& e) {
    root.exit(e);
    return cosal::app::kExitConfig;
  }

  try {
    if (*detect.app) return cosal::app::runDetect(detect.resolve());
    if (*dump.app) return cosal::app::runDumpDebug(dump.resolve());
    if (*trainCmd.app) return cosal::app::runTrainIeis(trainCmd.resolve());
    if (*evalCmd.app) return cosal::app::runEval(evalCmd.resolve());
  } catch (const std::exception& e) {
    return cosal::app::reportFailure(e);
  }
  return cosal::app::kExitConfig;
}
