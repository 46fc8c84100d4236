#pragma once

#include <functional>
#include <vector>

#include "msmr/mesh/mesh.hpp"
#include "msmr/net/image.hpp"
#include "msmr/net/model.hpp"

namespace msmr::net {

struct Sample {
  Tensor image;                       // [h x w x 3] in [0, 1], any size
  std::vector<mesh::Vec3> vertices;   // root-centered, one per finest-level vertex
};

struct TrainConfig {
  int epochs = 200;
  double lr = 1e-4;
  int decay_every = 50;
  double decay_factor = 0.5;
  std::size_t batch_size = 32;
  bool augment = true;
  AugmentConfig augmentation;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochLog {
  int epoch;
  double lr;
  double loss;  // mean per-sample loss seen during the epoch
};

Tensor vertices_tensor(const std::vector<mesh::Vec3>& v);
std::vector<mesh::Vec3> tensor_vertices(const Tensor& t);

/// Prediction for a raw [0, 1] image of any size: resize, normalize, forward.
std::vector<mesh::Vec3> predict(const Model& model, const Tensor& image);
/// Mean L1 loss over samples, without augmentation.
double evaluate_loss(const Model& model, const std::vector<Sample>& data);

/// Adam with step decay. Each batch averages per-sample losses; samples are
/// visited in a per-epoch shuffled order drawn from the seed.
std::vector<EpochLog> train(Model& model, const std::vector<Sample>& data, const TrainConfig& config,
                            const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace msmr::net
