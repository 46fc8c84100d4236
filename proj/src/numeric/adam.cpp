#include "msmr/numeric/adam.hpp"

#include <cmath>
#include <vector>

#include "msmr/error.hpp"

namespace msmr::numeric {

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params)
    if (!p->tensor.has_grad()) throw Error("parameter '" + p->name + "' has no gradient");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    auto g = p->tensor.grad();
    auto w = p->tensor.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      p->moment1[i] = config_.beta1 * p->moment1[i] + (1.0 - config_.beta1) * g[i];
      p->moment2[i] = config_.beta2 * p->moment2[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = p->moment1[i] / c1;
      const double vhat = p->moment2[i] / c2;
      w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

void Adam::step(ParameterStore& store) {
  std::vector<Parameter*> ptrs;
  for (auto& p : store.all()) ptrs.push_back(&p);
  step(ptrs);
}

double step_decay_lr(double base_lr, int epoch, int every, double factor) {
  if (every <= 0) throw ConfigError("decay interval must be positive");
  return base_lr * std::pow(factor, epoch / every);
}

}  // namespace msmr::numeric
