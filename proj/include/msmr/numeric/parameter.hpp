#pragma once

#include <deque>
#include <string>
#include <vector>

#include "msmr/numeric/tensor.hpp"

namespace msmr::numeric {

/// Trainable tensor plus the Adam moment estimates that belong to it.
struct Parameter {
  Parameter(std::string name, Tensor init);

  std::string name;
  Tensor tensor;
  std::vector<double> moment1;
  std::vector<double> moment2;
};

/// Owns the parameters of one model. Addresses stay stable for the store's
/// lifetime, so layers may keep references.
class ParameterStore {
 public:
  /// Throws ConfigError when `name` is already taken.
  Parameter& add(std::string name, Tensor init);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::deque<Parameter>& all() noexcept { return params_; }
  const std::deque<Parameter>& all() const noexcept { return params_; }
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::deque<Parameter> params_;
};

}  // namespace msmr::numeric
