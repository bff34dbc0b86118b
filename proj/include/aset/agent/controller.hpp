#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "aset/agent/qnetwork.hpp"
#include "aset/agent/state.hpp"
#include "aset/simulator.hpp"

namespace aset::agent {

/// Serves a frozen Q-network: at each tick it encodes the last window and
/// installs the selected static policy for the next one.
class AgentController final : public PolicyController {
 public:
  AgentController(QNetwork network, FeaturePartition partition, double epsilon = 0.0,
                  std::uint64_t seed = 0);

  PolicyKind on_tick(const Simulation& sim) override;

  const std::vector<PolicyKind>& decisions() const { return decisions_; }

 private:
  QNetwork network_;
  FeaturePartition partition_;
  double epsilon_;
  std::mt19937_64 rng_;
  std::vector<PolicyKind> decisions_;
};

}  // namespace aset::agent
