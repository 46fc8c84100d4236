#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "msmr/metrics/metrics.hpp"
#include "msmr/net/model.hpp"
#include "msmr/net/train.hpp"
#include "msmr/scene/scene.hpp"

namespace msmr::pipeline {

namespace fs = std::filesystem;

struct BuildHierarchyOptions {
  fs::path out;
  std::string asset = "hand_left";
  std::size_t levels = 5;
  std::size_t finest = 0;  // 0 keeps the template resolution
  std::vector<std::size_t> spiral_lengths;  // empty: defaults
  bool overwrite = false;
};

struct GenScenesOptions {
  fs::path out;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  scene::Mode mode = scene::Mode::HandHand;
  std::size_t threads = 1;
  std::size_t image_size = 224;
  bool overwrite = false;
};

struct GenScenesResult {
  std::size_t scenes = 0;
  std::size_t failures = 0;  // generation attempts that were retried
};

/// Hierarchy, model, schedule, split and seed for one training run.
struct ExperimentConfig {
  fs::path hierarchy;
  std::string asset = "hand_left";
  net::ModelConfig model;
  net::TrainConfig train;
  double train_fraction = 1.0;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;

  /// Small model for desk-scale runs on a hierarchy with `levels` levels.
  static ExperimentConfig toy(std::size_t levels);
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Keys missing from `j` keep the values already in `base`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base);

struct TrainOptions {
  fs::path manifest;
  fs::path out;
  ExperimentConfig config;
  bool ablation = false;
  bool overwrite = false;
  bool quiet = false;
};

struct TrainResult {
  std::vector<net::EpochLog> log;
  double initial_loss = 0.0;  // before any update, no augmentation
  double final_loss = 0.0;
  std::size_t parameter_count = 0;
};

struct AblationRow {
  std::string variant;
  std::size_t parameter_count = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double first_epoch_loss = 0.0;
  double last_epoch_loss = 0.0;
};

struct PredictOptions {
  fs::path checkpoint;  // directory written by train-toy
  fs::path manifest;
  fs::path out;
  std::string split = "all";
  bool overwrite = false;
};

struct EvalOptions {
  fs::path pred;
  fs::path gt;
  fs::path out;
  std::optional<fs::path> manifest;  // adds VR and the bucket table
  std::size_t threads = 1;
};

struct VrReportOptions {
  fs::path manifest;
  fs::path pred;
  fs::path out;
};

void build_hierarchy_command(const BuildHierarchyOptions& o, std::ostream& log);
GenScenesResult gen_scenes(const GenScenesOptions& o, std::ostream& log);
TrainResult train_toy(const TrainOptions& o, std::ostream& log);
/// Trains single-path, multi-path and multi-path with attention on the same
/// data and seeds; writes one run per variant plus ablation.csv/json.
std::vector<AblationRow> run_ablation(const TrainOptions& o, std::ostream& log);
std::size_t predict_command(const PredictOptions& o, std::ostream& log);
nlohmann::json eval_command(const EvalOptions& o, std::ostream& log);
metrics::BucketReport vr_report(const VrReportOptions& o, std::ostream& log);

/// Parses the command line and dispatches. Returns 0 on success, 1 on a
/// domain error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msmr::pipeline
