#include "msmr/net/model.hpp"

#include "msmr/error.hpp"
#include "msmr/numeric/attention.hpp"

namespace msmr::net {

using nlohmann::json;

json to_json(const ModelConfig& c) {
  return json{{"image_size", c.image_size},
              {"encoder_channels", c.encoder_channels},
              {"channels", c.channels},
              {"blocks_per_stage", c.blocks_per_stage},
              {"single_path", c.single_path},
              {"use_attention", c.use_attention},
              {"attention_heads", c.attention_heads},
              {"seed", c.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "image_size") c.image_size = value.get<std::size_t>();
      else if (key == "encoder_channels") c.encoder_channels = value.get<std::vector<std::size_t>>();
      else if (key == "channels") c.channels = value.get<std::vector<std::size_t>>();
      else if (key == "blocks_per_stage") c.blocks_per_stage = value.get<std::size_t>();
      else if (key == "single_path") c.single_path = value.get<bool>();
      else if (key == "use_attention") c.use_attention = value.get<bool>();
      else if (key == "attention_heads") c.attention_heads = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown model config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  return c;
}

namespace {

// 3x3 stride-2 patches with zero padding, as a row gather table over an
// [h*w x c] pixel matrix.
std::vector<std::ptrdiff_t> conv_patches(std::size_t h, std::size_t w, std::size_t& out_h, std::size_t& out_w) {
  out_h = (h - 1) / 2 + 1;
  out_w = (w - 1) / 2 + 1;
  std::vector<std::ptrdiff_t> table;
  table.reserve(out_h * out_w * 9);
  for (std::size_t r = 0; r < out_h; ++r)
    for (std::size_t c = 0; c < out_w; ++c)
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const auto sr = static_cast<std::ptrdiff_t>(2 * r) + dr, sc = static_cast<std::ptrdiff_t>(2 * c) + dc;
          const bool inside = sr >= 0 && sc >= 0 && sr < static_cast<std::ptrdiff_t>(h) && sc < static_cast<std::ptrdiff_t>(w);
          table.push_back(inside ? sr * static_cast<std::ptrdiff_t>(w) + sc : -1);
        }
  return table;
}

}  // namespace

Model::Model(ModelConfig config, std::shared_ptr<const hierarchy::MeshHierarchy> hierarchy)
    : config_(std::move(config)), hierarchy_(std::move(hierarchy)) {
  if (!hierarchy_) throw ConfigError("model needs a mesh hierarchy");
  const std::size_t L = hierarchy_->level_count();
  if (config_.channels.size() != L)
    throw ConfigError("model has " + std::to_string(config_.channels.size()) + " stages but the hierarchy has " +
                      std::to_string(L) + " levels");
  if (config_.image_size == 0 || config_.encoder_channels.empty()) throw ConfigError("encoder needs an image and layers");
  for (std::size_t c : config_.channels)
    if (c == 0) throw ConfigError("level channel count must be positive");
  level_channels_.resize(L);
  for (std::size_t l = 0; l < L; ++l) level_channels_[l] = config_.channels[L - 1 - l];

  Rng rng = Rng(config_.seed).derive("init");
  std::size_t h = config_.image_size, w = config_.image_size, in = 3;
  for (std::size_t i = 0; i < config_.encoder_channels.size(); ++i) {
    const std::size_t out = config_.encoder_channels[i];
    const std::string name = "encoder.conv" + std::to_string(i);
    encoder_.push_back({&store_.add(name + ".kernel", glorot(9 * in, out, rng)), &store_.add(name + ".bias", Tensor({out}))});
    std::size_t oh, ow;
    const auto table = conv_patches(h, w, oh, ow);
    encoder_index_.push_back(numeric::row_gather_index(table, 9, h * w, in));
    encoder_rows_.push_back(oh * ow);
    h = oh;
    w = ow;
    in = out;
  }
  const std::size_t coarse = L - 1;
  const std::size_t nc = hierarchy_->size(coarse), cc = level_channels_[coarse];
  fc_w_ = &store_.add("intermediate.fc.weight", glorot(in, nc * cc, rng));
  fc_b_ = &store_.add("intermediate.fc.bias", Tensor({nc * cc}));

  if (config_.use_attention) {
    if (config_.attention_heads == 0 || cc % config_.attention_heads != 0)
      throw ConfigError("attention heads (" + std::to_string(config_.attention_heads) + ") must divide " +
                        std::to_string(cc) + " channels");
    auto mat = [&](const std::string& n, std::size_t r, std::size_t c) {
      return &store_.add("intermediate.attention." + n, glorot(r, c, rng));
    };
    auto vec = [&](const std::string& n, std::size_t c) { return &store_.add("intermediate.attention." + n, Tensor({c})); };
    Attention& a = attention_;
    a.wq = mat("wq", cc, cc), a.bq = vec("bq", cc);
    a.wk = mat("wk", cc, cc), a.bk = vec("bk", cc);
    a.wv = mat("wv", cc, cc), a.bv = vec("bv", cc);
    a.wo = mat("wo", cc, cc), a.bo = vec("bo", cc);
    a.ln1 = LayerNormParams::create(store_, "intermediate.attention.ln1", cc);
    a.ff1_w = mat("ff1_w", cc, 2 * cc), a.ff1_b = vec("ff1_b", 2 * cc);
    a.ff2_w = mat("ff2_w", 2 * cc, cc), a.ff2_b = vec("ff2_b", cc);
    a.ln2 = LayerNormParams::create(store_, "intermediate.attention.ln2", cc);
  }

  auto active = [&](std::size_t k) {  // stage k, 0-based: k + 1 coarsest levels
    std::vector<std::size_t> lv;
    if (config_.single_path)
      lv.push_back(L - 1 - k);
    else
      for (std::size_t i = 0; i <= k; ++i) lv.push_back(L - 1 - i);
    return lv;
  };
  for (std::size_t k = 0; k < L; ++k) {
    Stage s;
    s.levels = active(k);
    for (std::size_t l : s.levels) {
      s.blocks.emplace_back();
      for (std::size_t b = 0; b < config_.blocks_per_stage; ++b)
        s.blocks.back().push_back(GraphResBlock::create(
            store_, "stage" + std::to_string(k) + ".level" + std::to_string(l) + ".block" + std::to_string(b),
            hierarchy_->spirals[l].length, level_channels_[l], rng));
    }
    const std::vector<std::size_t> next = k + 1 < L ? active(k + 1) : std::vector<std::size_t>{0};
    s.fusion = FusionLayer::create(store_, "stage" + std::to_string(k) + ".fusion", s.levels, next, level_channels_, rng);
    stages_.push_back(std::move(s));
  }
  head_ = SpiralConvLayer::create(store_, "head", hierarchy_->spirals[0].length, level_channels_[0], 3, rng);
}

Var Model::encode(Tape& tape, const Tensor& image) const {
  const std::size_t s = config_.image_size;
  if (image.rank() != 3 || image.shape()[0] != s || image.shape()[1] != s || image.shape()[2] != 3)
    throw ShapeError("model expects a [" + std::to_string(s) + "x" + std::to_string(s) + "x3] image, got " +
                     numeric::to_string(image.shape()));
  Var x = tape.constant(image.reshaped({s * s, 3}));
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    const std::size_t in = x.value().cols();
    Var patches = numeric::gather(x, encoder_index_[i], {encoder_rows_[i], 9 * in});
    x = numeric::elu(numeric::add_row_bias(numeric::matmul(patches, tape.parameter(*encoder_[i].kernel)),
                                           tape.parameter(*encoder_[i].bias)));
  }
  return numeric::mean_rows(x);
}

Var Model::forward(Tape& tape, const Tensor& image) const {
  const auto& h = *hierarchy_;
  const std::size_t L = h.level_count(), coarse = L - 1;
  Var latent = encode(tape, image);
  Var x = numeric::add_row_bias(numeric::matmul(latent, tape.parameter(*fc_w_)), tape.parameter(*fc_b_));
  x = numeric::reshape(x, {h.size(coarse), level_channels_[coarse]});
  if (config_.use_attention) {
    const Attention& a = attention_;
    auto P = [&](Parameter* p) { return tape.parameter(*p); };
    const numeric::AttentionWeights w{P(a.wq),    P(a.bq),      P(a.wk),     P(a.bk),     P(a.wv),    P(a.bv),
                                      P(a.wo),    P(a.bo),      P(a.ln1.gain), P(a.ln1.bias), P(a.ff1_w), P(a.ff1_b),
                                      P(a.ff2_w), P(a.ff2_b),   P(a.ln2.gain), P(a.ln2.bias)};
    x = numeric::attention_block(x, w, config_.attention_heads);
  }

  std::vector<FeatureMap> maps{{coarse, x}};
  for (const Stage& s : stages_) {
    for (std::size_t i = 0; i < s.levels.size(); ++i)
      for (const GraphResBlock& b : s.blocks[i]) maps[i].features = b(tape, maps[i].features, h.spirals[s.levels[i]]);
    maps = s.fusion(tape, maps, h);
    for (FeatureMap& m : maps) m.features = numeric::elu(m.features);
  }
  return head_(tape, maps.front().features, h.spirals[0]);
}

}  // namespace msmr::net
