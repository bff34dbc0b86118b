#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "aset/agent/environment.hpp"

namespace aset::agent {

struct MdpOutcome {
  double probability = 1.0;
  std::size_t next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

/// Finite MDP; outcomes[s][a] lists the possible results of taking a in s.
struct TabularMdp {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<std::vector<std::vector<MdpOutcome>>> outcomes;

  void validate() const;
};

/// Q iteration to a sup-norm change below `tolerance`. Rows are states.
/// Throws std::runtime_error if `max_iterations` is reached first.
Eigen::MatrixXd tabular_value_iteration(const TabularMdp& mdp, double gamma, double tolerance,
                                        std::size_t max_iterations = 1000000);

/// Samples a TabularMdp with one-hot observations, one state per input
/// channel. Episodes end at a terminal outcome or after `episode_length`
/// steps (a timeout, not terminal).
class TabularEnvironment final : public Environment {
 public:
  TabularEnvironment(TabularMdp mdp, std::size_t episode_length, std::size_t start_state = 0);

  StateShape state_shape() const override { return {1, mdp_.states, 1}; }
  std::size_t action_count() const override { return mdp_.actions; }
  std::shared_ptr<const StateTensor> reset(std::uint64_t seed) override;
  StepResult step(int action) override;

  std::shared_ptr<const StateTensor> observation(std::size_t state) const;

 private:
  TabularMdp mdp_;
  std::size_t episode_length_;
  std::size_t start_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace aset::agent
