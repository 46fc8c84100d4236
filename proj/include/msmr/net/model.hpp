#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "json.hpp"
#include "msmr/hierarchy/hierarchy.hpp"
#include "msmr/net/layers.hpp"

namespace msmr::net {

struct ModelConfig {
  std::size_t image_size = 224;
  /// Output channels of the stride-2 3x3 encoder convolutions.
  std::vector<std::size_t> encoder_channels{16, 32, 64};
  /// Feature channels per hierarchy level, coarsest first; one per stage.
  std::vector<std::size_t> channels{64, 64, 32, 32, 16};
  std::size_t blocks_per_stage = 1;
  /// Keep only the finest active level at each stage.
  bool single_path = false;
  bool use_attention = true;
  std::size_t attention_heads = 4;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ModelConfig& c);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j);

class Model {
 public:
  Model(ModelConfig config, std::shared_ptr<const hierarchy::MeshHierarchy> hierarchy);

  /// image: normalized [s x s x 3] with s = image_size. Returns [N_0 x 3].
  Var forward(Tape& tape, const Tensor& image) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return config_; }
  const hierarchy::MeshHierarchy& hierarchy() const { return *hierarchy_; }
  std::size_t stage_count() const { return stages_.size(); }
  /// Levels holding features during stage k (0-based), coarsest first.
  const std::vector<std::size_t>& active_levels(std::size_t stage) const { return stages_[stage].levels; }

 private:
  struct Conv2d {
    Parameter* kernel;
    Parameter* bias;
  };
  struct Stage {
    std::vector<std::size_t> levels;
    std::vector<std::vector<GraphResBlock>> blocks;  // per level
    FusionLayer fusion;
  };
  struct Attention {
    Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
    LayerNormParams ln1, ln2;
    Parameter *ff1_w, *ff1_b, *ff2_w, *ff2_b;
  };

  Var encode(Tape& tape, const Tensor& image) const;

  ModelConfig config_;
  std::shared_ptr<const hierarchy::MeshHierarchy> hierarchy_;
  ParameterStore store_;
  std::vector<std::size_t> level_channels_;  // indexed by level, finest first
  std::vector<Conv2d> encoder_;
  std::vector<numeric::GatherIndex> encoder_index_;
  std::vector<std::size_t> encoder_rows_;
  Parameter* fc_w_ = nullptr;
  Parameter* fc_b_ = nullptr;
  Attention attention_{};
  std::vector<Stage> stages_;
  SpiralConvLayer head_;
};

}  // namespace msmr::net
