#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace msmr {

/// Base class for every domain error raised by the library. The CLI maps it
/// to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A model, layer or generator was configured inconsistently.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or otherwise unusable geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for its inputs (empty set, object absent).
class MetricError : public Error {
 public:
  using Error::Error;
};

class DecimationStuck : public GeometryError {
 public:
  DecimationStuck(std::size_t achieved, std::size_t target)
      : GeometryError("decimation stuck at " + std::to_string(achieved) +
                      " vertices (target " + std::to_string(target) +
                      "): no legal edge contraction remains"),
        achieved_(achieved) {}
  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

class GenerationFailure : public Error {
 public:
  GenerationFailure(std::uint64_t seed, const std::string& what)
      : Error("scene generation failed for seed " + std::to_string(seed) + ": " + what),
        seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace msmr
