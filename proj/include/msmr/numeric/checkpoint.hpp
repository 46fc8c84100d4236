#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msmr/numeric/parameter.hpp"
#include "msmr/numeric/tensor.hpp"

namespace msmr::numeric {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Checkpoint layout, all integers and floats little-endian:
//   "MSMRCKPT"  8-byte magic
//   u32         format version (1)
//   u32         entry count
//   per entry:  u32 name length, name bytes,
//               u32 rank, u64 extent per axis,
//               f64 values in row-major order
void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

std::vector<NamedTensor> snapshot(const ParameterStore& store);
/// Copies values into matching parameters; names and shapes must agree
/// exactly with the store.
void restore(ParameterStore& store, const std::vector<NamedTensor>& entries);

}  // namespace msmr::numeric
