#include "aset/agent/controller.hpp"

#include <stdexcept>

#include "aset/agent/dqn.hpp"

namespace aset::agent {

AgentController::AgentController(QNetwork network, FeaturePartition partition, double epsilon,
                                 std::uint64_t seed)
    : network_(std::move(network)), partition_(std::move(partition)), epsilon_(epsilon), rng_(seed) {
  partition_.validate();
  if (network_.config().actions != kPolicyCount) {
    throw std::invalid_argument("serving network must have one output per static policy");
  }
}

PolicyKind AgentController::on_tick(const Simulation& sim) {
  const StateTensor state = encode_state(sim, partition_);
  const int action = select_action(network_.forward(state), epsilon_, rng_);
  decisions_.push_back(policy_from_index(action));
  return decisions_.back();
}

}  // namespace aset::agent
