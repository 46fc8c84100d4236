#include "msmr/numeric/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "msmr/error.hpp"

namespace msmr::numeric {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'M', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw IoError("truncated checkpoint " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.tensor.rank()));
    for (auto d : e.tensor.shape()) put_le<std::uint64_t>(out, d);
    for (double v : e.tensor.values()) put_le<double>(out, v);
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError(path.string() + " is not a checkpoint");
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(in, path);
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get_le<std::uint32_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw IoError("truncated checkpoint " + path.string());
    const auto rank = get_le<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(in, path));
    std::vector<double> values(element_count(shape));
    for (auto& v : values) v = get_le<double>(in, path);
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  return out;
}

std::vector<NamedTensor> snapshot(const ParameterStore& store) {
  std::vector<NamedTensor> out;
  for (const auto& p : store.all()) out.push_back({p.name, p.tensor.reshaped(p.tensor.shape())});
  return out;
}

void restore(ParameterStore& store, const std::vector<NamedTensor>& entries) {
  if (entries.size() != store.all().size())
    throw IoError("checkpoint holds " + std::to_string(entries.size()) + " tensors, model has " +
                  std::to_string(store.all().size()));
  for (const auto& e : entries) {
    Parameter& p = store.get(e.name);
    if (p.tensor.shape() != e.tensor.shape())
      throw ShapeError("checkpoint tensor '" + e.name + "' has shape " + to_string(e.tensor.shape()) +
                       ", model expects " + to_string(p.tensor.shape()));
    std::copy(e.tensor.values().begin(), e.tensor.values().end(), p.tensor.values().begin());
  }
}

}  // namespace msmr::numeric
