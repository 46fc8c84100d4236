#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msmr/hierarchy/hierarchy.hpp"
#include "msmr/numeric/ops.hpp"
#include "msmr/numeric/parameter.hpp"
#include "msmr/numeric/rng.hpp"

namespace msmr::net {

using numeric::Parameter;
using numeric::ParameterStore;
using numeric::Rng;
using numeric::Tape;
using numeric::Tensor;
using numeric::Var;

/// Node features at one hierarchy level: [vertices x channels].
struct FeatureMap {
  std::size_t level = 0;
  Var features;
};

/// out[v] = concat(x[spiral(v)]) * kernel + bias, with padded slots reading
/// zeros. kernel is [(S * C_in) x C_out], bias [C_out].
Var spiral_conv(Var x, const hierarchy::SpiralTable& spirals, Var kernel, Var bias);

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct SpiralConvLayer {
  Parameter* kernel = nullptr;
  Parameter* bias = nullptr;

  static SpiralConvLayer create(ParameterStore& store, const std::string& name, std::size_t length,
                                std::size_t in, std::size_t out, Rng& rng);
  Var operator()(Tape& tape, Var x, const hierarchy::SpiralTable& spirals) const;
};

struct LayerNormParams {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;

  static LayerNormParams create(ParameterStore& store, const std::string& name, std::size_t channels);
  Var operator()(Tape& tape, Var x) const;
};

/// Basic residual block with spiral convolutions and layer norms:
/// y = x + LN2(conv2(ELU(LN1(conv1(x))))).
struct GraphResBlock {
  SpiralConvLayer conv1, conv2;
  LayerNormParams norm1, norm2;

  static GraphResBlock create(ParameterStore& store, const std::string& name, std::size_t length,
                              std::size_t channels, Rng& rng);
  Var operator()(Tape& tape, Var x, const hierarchy::SpiralTable& spirals) const;
};

/// Resamples [n_from x c] features from one level to another through the
/// chain of down (towards coarse) or up (towards fine) matrices.
Var resample(Var x, const hierarchy::MeshHierarchy& h, std::size_t from, std::size_t to);

/// Linear channel maps between every (input level, output level) pair.
struct FusionLayer {
  std::vector<std::size_t> inputs;   // levels
  std::vector<std::size_t> outputs;  // levels
  std::vector<std::vector<Parameter*>> maps;  // [output][input], [C_in x C_out]

  static FusionLayer create(ParameterStore& store, const std::string& name, std::vector<std::size_t> inputs,
                            std::vector<std::size_t> outputs, const std::vector<std::size_t>& level_channels,
                            Rng& rng);
  /// One FeatureMap per input level, in `inputs` order; returns one per
  /// output level: sum over inputs of resample-then-map. No activation.
  std::vector<FeatureMap> operator()(Tape& tape, const std::vector<FeatureMap>& in,
                                     const hierarchy::MeshHierarchy& h) const;
};

}  // namespace msmr::net
