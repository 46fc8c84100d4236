#include "msmr/net/layers.hpp"

#include <cmath>

#include "msmr/error.hpp"

namespace msmr::net {

Var spiral_conv(Var x, const hierarchy::SpiralTable& spirals, Var kernel, Var bias) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("spiral_conv expects [vertices x channels], got " + numeric::to_string(xv.shape()));
  const std::size_t n = xv.rows(), c = xv.cols(), s = spirals.length;
  if (spirals.vertex_count() != n)
    throw ShapeError("spiral table has " + std::to_string(spirals.vertex_count()) + " vertices but features have " +
                     std::to_string(n));
  if (kernel.value().rank() != 2 || kernel.value().rows() != s * c)
    throw ShapeError("spiral kernel " + numeric::to_string(kernel.shape()) + " does not match spiral length " +
                     std::to_string(s) + " and " + std::to_string(c) + " input channels");
  std::vector<std::ptrdiff_t> table(spirals.indices.begin(), spirals.indices.end());
  for (std::ptrdiff_t i : table)
    if (i >= static_cast<std::ptrdiff_t>(n))
      throw ShapeError("spiral index " + std::to_string(i) + " out of range for " + std::to_string(n) + " vertices");
  const auto index = numeric::row_gather_index(table, s, n, c);
  Var gathered = numeric::gather(x, index, {n, s * c});
  return numeric::add_row_bias(numeric::matmul(gathered, kernel), bias);
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& v : t.values()) v = rng.uniform(-a, a);
  return t;
}

SpiralConvLayer SpiralConvLayer::create(ParameterStore& store, const std::string& name, std::size_t length,
                                        std::size_t in, std::size_t out, Rng& rng) {
  SpiralConvLayer l;
  l.kernel = &store.add(name + ".kernel", glorot(length * in, out, rng));
  l.bias = &store.add(name + ".bias", Tensor({out}));
  return l;
}

Var SpiralConvLayer::operator()(Tape& tape, Var x, const hierarchy::SpiralTable& spirals) const {
  return spiral_conv(x, spirals, tape.parameter(*kernel), tape.parameter(*bias));
}

LayerNormParams LayerNormParams::create(ParameterStore& store, const std::string& name, std::size_t channels) {
  return {&store.add(name + ".gain", Tensor::filled({channels}, 1.0)), &store.add(name + ".bias", Tensor({channels}))};
}

Var LayerNormParams::operator()(Tape& tape, Var x) const {
  return numeric::layer_norm(x, tape.parameter(*gain), tape.parameter(*bias));
}

GraphResBlock GraphResBlock::create(ParameterStore& store, const std::string& name, std::size_t length,
                                    std::size_t channels, Rng& rng) {
  GraphResBlock b;
  b.conv1 = SpiralConvLayer::create(store, name + ".conv1", length, channels, channels, rng);
  b.norm1 = LayerNormParams::create(store, name + ".norm1", channels);
  b.conv2 = SpiralConvLayer::create(store, name + ".conv2", length, channels, channels, rng);
  b.norm2 = LayerNormParams::create(store, name + ".norm2", channels);
  return b;
}

Var GraphResBlock::operator()(Tape& tape, Var x, const hierarchy::SpiralTable& spirals) const {
  const std::size_t c = norm1.gain->tensor.size();
  if (x.value().rank() != 2 || x.value().cols() != c)
    throw ShapeError("residual block over " + std::to_string(c) + " channels got " + numeric::to_string(x.shape()));
  Var h = numeric::elu(norm1(tape, conv1(tape, x, spirals)));
  return numeric::add(x, norm2(tape, conv2(tape, h, spirals)));
}

Var resample(Var x, const hierarchy::MeshHierarchy& h, std::size_t from, std::size_t to) {
  if (from >= h.level_count() || to >= h.level_count()) throw ConfigError("resample level out of range");
  for (std::size_t l = from; l < to; ++l) x = numeric::sparse_matmul(h.down[l], x);
  for (std::size_t l = from; l > to; --l) x = numeric::sparse_matmul(h.up[l - 1], x);
  return x;
}

FusionLayer FusionLayer::create(ParameterStore& store, const std::string& name, std::vector<std::size_t> inputs,
                                std::vector<std::size_t> outputs, const std::vector<std::size_t>& level_channels,
                                Rng& rng) {
  FusionLayer f;
  f.inputs = std::move(inputs);
  f.outputs = std::move(outputs);
  for (std::size_t o : f.outputs) {
    f.maps.emplace_back();
    for (std::size_t i : f.inputs)
      f.maps.back().push_back(&store.add(name + ".l" + std::to_string(i) + "_to_l" + std::to_string(o),
                                         glorot(level_channels[i], level_channels[o], rng)));
  }
  return f;
}

std::vector<FeatureMap> FusionLayer::operator()(Tape& tape, const std::vector<FeatureMap>& in,
                                                const hierarchy::MeshHierarchy& h) const {
  if (in.size() != inputs.size()) throw ConfigError("fusion expects " + std::to_string(inputs.size()) + " inputs");
  for (std::size_t k = 0; k < in.size(); ++k)
    if (in[k].level != inputs[k])
      throw ConfigError("fusion input " + std::to_string(k) + " is level " + std::to_string(in[k].level) +
                        ", expected level " + std::to_string(inputs[k]));
  std::vector<FeatureMap> out;
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    Var acc{};
    for (std::size_t k = 0; k < in.size(); ++k) {
      Var term = numeric::matmul(resample(in[k].features, h, in[k].level, outputs[o]), tape.parameter(*maps[o][k]));
      acc = k == 0 ? term : numeric::add(acc, term);
    }
    out.push_back({outputs[o], acc});
  }
  return out;
}

}  // namespace msmr::net
