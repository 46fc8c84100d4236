#include "msmr/numeric/parameter.hpp"

#include <algorithm>

#include "msmr/error.hpp"

namespace msmr::numeric {

Parameter::Parameter(std::string name_, Tensor init)
    : name(std::move(name_)),
      tensor(std::move(init)),
      moment1(tensor.size(), 0.0),
      moment2(tensor.size(), 0.0) {}

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  return params_.emplace_back(std::move(name), std::move(init));
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = std::find_if(params_.begin(), params_.end(),
                         [&](const Parameter& p) { return p.name == name; });
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *it;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace msmr::numeric
