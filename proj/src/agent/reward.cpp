#include "aset/agent/reward.hpp"

#include <algorithm>

namespace aset::agent {

double compute_reward(const MetricsWindow& window, double t_active_s, const RewardParams& params) {
  const double lost = std::clamp(window.q_fail + window.q_reject, 0.0, 1.0);
  if (1.0 - lost < params.success_threshold) return -lost;
  if (!(t_active_s > 0.0)) return -1.0;
  return -std::min(1.0, params.active_time_scale_s / t_active_s);
}

}  // namespace aset::agent
