#pragma once

#include <cstdint>
#include <span>

#include "msmr/numeric/parameter.hpp"

namespace msmr::numeric {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment estimates live in the Parameters; the
/// optimizer only tracks the step count.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Throws Error naming the first parameter without a gradient.
  void step(std::span<Parameter* const> params);
  void step(ParameterStore& store);

  double lr() const noexcept { return config_.lr; }
  void set_lr(double lr) noexcept { config_.lr = lr; }
  std::int64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
};

/// Step decay: base * factor^(epoch / every).
double step_decay_lr(double base_lr, int epoch, int every = 50, double factor = 0.5);

}  // namespace msmr::numeric
