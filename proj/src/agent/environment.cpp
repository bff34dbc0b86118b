#include "aset/agent/environment.hpp"

#include <algorithm>
#include <stdexcept>

namespace aset::agent {

SimulatorEnvironment::SimulatorEnvironment(EpisodeConfig base, FeaturePartition partition,
                                           RewardParams reward)
    : SimulatorEnvironment(std::vector<EpisodeConfig>{std::move(base)}, std::move(partition),
                           reward) {}

SimulatorEnvironment::SimulatorEnvironment(std::vector<EpisodeConfig> scenarios,
                                           FeaturePartition partition, RewardParams reward)
    : scenarios_(std::move(scenarios)), partition_(std::move(partition)), reward_(reward) {
  if (scenarios_.empty()) throw std::invalid_argument("at least one scenario is required");
  partition_.validate();
  // The deployment depends only on the topology, so a probe run fixes the
  // observation shape for every episode.
  for (const auto& config : scenarios_) {
    Simulation probe(config);
    const StateShape shape = encode_state(probe, partition_).shape();
    if (&config == &scenarios_.front()) {
      shape_ = shape;
    } else if (!(shape == shape_) || config.window_s != base().window_s ||
               config.horizon_s != base().horizon_s) {
      throw std::invalid_argument("scenarios disagree on observation shape, window or horizon");
    }
  }
}

std::shared_ptr<const StateTensor> SimulatorEnvironment::reset(std::uint64_t seed) {
  current_ = static_cast<std::size_t>(seed % scenarios_.size());
  EpisodeConfig config = scenarios_[current_];
  config.seed = seed;
  sim_ = std::make_unique<Simulation>(std::move(config));
  time_ = 0.0;
  last_result_.reset();
  return std::make_shared<const StateTensor>(encode_state(*sim_, partition_));
}

StepResult SimulatorEnvironment::step(int action) {
  if (!sim_ || sim_->stopped()) throw std::logic_error("step called on a finished episode");
  sim_->set_policy(policy_from_index(action));
  time_ = std::min(time_ + base().window_s, base().horizon_s);
  sim_->run_until(time_);
  const MetricsWindow window = sim_->live_window();
  StepResult result;
  result.reward = compute_reward(window, time_, reward_);
  result.success = window.q_success;
  result.next_state = std::make_shared<const StateTensor>(encode_state(*sim_, partition_));
  if (time_ >= base().horizon_s) {
    result.done = true;
  } else if (const auto& theta = scenarios_[current_].early_stop_threshold;
             theta && window.q_success <= *theta) {
    result.done = true;
    result.terminal = true;
  }
  if (result.done) last_result_ = sim_->finish(result.terminal);
  return result;
}

}  // namespace aset::agent
