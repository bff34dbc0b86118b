#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "aset/agent/reward.hpp"
#include "aset/agent/state.hpp"
#include "aset/simulator.hpp"

namespace aset::agent {

struct StepResult {
  std::shared_ptr<const StateTensor> next_state;
  double reward = 0.0;
  bool done = false;
  bool terminal = false;  // done for a reason other than the time limit
  double success = 1.0;   // window success ratio, for logging
};

/// Episodic environment with a discrete action set.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual StateShape state_shape() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::shared_ptr<const StateTensor> reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;
};

/// One simulated episode per reset; each step installs a static policy for
/// one window. Early stop ends the episode as terminal, the horizon as a
/// timeout.
class SimulatorEnvironment final : public Environment {
 public:
  SimulatorEnvironment(EpisodeConfig base, FeaturePartition partition, RewardParams reward = {});
  /// Episode seeds pick a scenario by seed mod count. Every scenario must
  /// yield the same observation shape and share window and horizon.
  SimulatorEnvironment(std::vector<EpisodeConfig> scenarios, FeaturePartition partition,
                       RewardParams reward = {});

  StateShape state_shape() const override { return shape_; }
  std::size_t action_count() const override { return kPolicyCount; }
  std::shared_ptr<const StateTensor> reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  /// Record of the last finished episode.
  const std::optional<EpisodeResult>& last_result() const { return last_result_; }

 private:
  const EpisodeConfig& base() const { return scenarios_.front(); }

  std::vector<EpisodeConfig> scenarios_;
  std::size_t current_ = 0;
  FeaturePartition partition_;
  RewardParams reward_;
  StateShape shape_;
  std::unique_ptr<Simulation> sim_;
  double time_ = 0.0;
  std::optional<EpisodeResult> last_result_;
};

}  // namespace aset::agent
