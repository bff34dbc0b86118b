#pragma once

#include <cstddef>

#include "aset/simulator.hpp"

namespace aset::agent {

struct RewardParams {
  double success_threshold = 0.9;  // below it the reward is the loss ratio
  double active_time_scale_s = 5.0;
};

/// -(q_fail + q_reject) when the window's success ratio is under the
/// threshold, otherwise -min(1, scale / t_active). Always in [-1, 0].
double compute_reward(const MetricsWindow& window, double t_active_s,
                      const RewardParams& params = {});

/// Discounted sum r_0 + gamma r_1 + gamma^2 r_2 + ...
class ReturnAccumulator {
 public:
  explicit ReturnAccumulator(double gamma) : gamma_(gamma) {}

  void add(double reward) {
    value_ += weight_ * reward;
    weight_ *= gamma_;
    ++steps_;
  }
  double value() const { return value_; }
  std::size_t steps() const { return steps_; }

 private:
  double gamma_;
  double value_ = 0.0;
  double weight_ = 1.0;
  std::size_t steps_ = 0;
};

}  // namespace aset::agent
