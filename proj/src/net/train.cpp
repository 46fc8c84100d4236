#include "msmr/net/train.hpp"

#include <algorithm>
#include <numeric>

#include "msmr/error.hpp"
#include "msmr/net/loss.hpp"
#include "msmr/numeric/adam.hpp"

namespace msmr::net {

using nlohmann::json;

json to_json(const TrainConfig& c) {
  return json{{"epochs", c.epochs},
              {"lr", c.lr},
              {"decay_every", c.decay_every},
              {"decay_factor", c.decay_factor},
              {"batch_size", c.batch_size},
              {"augment", c.augment},
              {"crop_min", c.augmentation.crop_min},
              {"crop_max", c.augmentation.crop_max},
              {"max_rotation_deg", c.augmentation.max_rotation_deg},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "decay_every") c.decay_every = value.get<int>();
      else if (key == "decay_factor") c.decay_factor = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "augment") c.augment = value.get<bool>();
      else if (key == "crop_min") c.augmentation.crop_min = value.get<double>();
      else if (key == "crop_max") c.augmentation.crop_max = value.get<double>();
      else if (key == "max_rotation_deg") c.augmentation.max_rotation_deg = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown training config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad training config: ") + e.what());
  }
  if (c.epochs < 0 || c.batch_size == 0 || c.decay_every <= 0 || c.lr < 0.0)
    throw ConfigError("training config needs epochs >= 0, lr >= 0, batch_size > 0, decay_every > 0");
  if (!(0.0 < c.augmentation.crop_min && c.augmentation.crop_min <= c.augmentation.crop_max &&
        c.augmentation.crop_max <= 1.0))
    throw ConfigError("crop range must satisfy 0 < crop_min <= crop_max <= 1");
  return c;
}

Tensor vertices_tensor(const std::vector<mesh::Vec3>& v) {
  Tensor t({v.size(), 3});
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int k = 0; k < 3; ++k) t(i, k) = v[i][k];
  return t;
}

std::vector<mesh::Vec3> tensor_vertices(const Tensor& t) {
  if (t.rank() != 2 || t.cols() != 3) throw ShapeError("expected [M x 3] vertices, got " + numeric::to_string(t.shape()));
  std::vector<mesh::Vec3> v(t.rows());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mesh::Vec3(t(i, 0), t(i, 1), t(i, 2));
  return v;
}

namespace {
Tensor prepare(const Model& model, const Tensor& image) {
  const std::size_t s = model.config().image_size;
  if (image.rank() == 3 && image.shape()[0] == s && image.shape()[1] == s) return normalize_image(image);
  return normalize_image(resize_image(image, s, s));
}
}  // namespace

std::vector<mesh::Vec3> predict(const Model& model, const Tensor& image) {
  Tape tape;
  return tensor_vertices(model.forward(tape, prepare(model, image)).value());
}

double evaluate_loss(const Model& model, const std::vector<Sample>& data) {
  if (data.empty()) throw ConfigError("cannot evaluate on an empty dataset");
  double total = 0.0;
  for (const Sample& s : data) {
    Tape tape;
    total += l1_vertex_loss(model.forward(tape, prepare(model, s.image)), vertices_tensor(s.vertices)).value()[0];
  }
  return total / static_cast<double>(data.size());
}

std::vector<EpochLog> train(Model& model, const std::vector<Sample>& data, const TrainConfig& config,
                            const std::function<void(const EpochLog&)>& on_epoch) {
  if (data.empty()) throw ConfigError("cannot train on an empty dataset");
  const std::size_t m = model.hierarchy().size(0);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].vertices.size() != m)
      throw ShapeError("sample " + std::to_string(i) + " has " + std::to_string(data[i].vertices.size()) +
                       " vertices, the finest level has " + std::to_string(m));

  numeric::Adam adam(numeric::AdamConfig{config.lr});
  const Rng root = Rng(config.seed).derive("train");
  const std::size_t s = model.config().image_size;
  std::vector<EpochLog> log;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = numeric::step_decay_lr(config.lr, epoch, config.decay_every, config.decay_factor);
    adam.set_lr(lr);
    Rng rng = root.derive(static_cast<std::uint64_t>(epoch));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    std::vector<double> sample_loss(data.size());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      model.parameters().zero_grad();
      for (auto& p : model.parameters().all()) p.tensor.ensure_grad();
      for (std::size_t k = start; k < end; ++k) {
        const Sample& sample = data[order[k]];
        Tensor image;
        std::vector<mesh::Vec3> gt = sample.vertices;
        if (config.augment) {
          const Augmentation a = draw_augmentation(config.augmentation, sample.image.shape()[1], rng);
          image = normalize_image(augment_image(sample.image, a, s));
          gt = augment_points(gt, a);
        } else {
          image = prepare(model, sample.image);
        }
        Tape tape;
        Var loss = l1_vertex_loss(model.forward(tape, image), vertices_tensor(gt));
        const double seed = inv;
        tape.backward(loss, std::span<const double>(&seed, 1));
        sample_loss[order[k]] = loss.value()[0];
      }
      adam.step(model.parameters());
    }
    const double total = std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0);
    log.push_back({epoch, lr, total / static_cast<double>(data.size())});
    if (on_epoch) on_epoch(log.back());
  }
  return log;
}

}  // namespace msmr::net
