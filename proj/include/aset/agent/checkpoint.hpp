#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "aset/agent/adam.hpp"
#include "aset/agent/qnetwork.hpp"
#include "aset/agent/state.hpp"
#include "aset/agent/trainer.hpp"

namespace aset::agent {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  FeaturePartition partition;
  StateShape shape;
  QNetworkConfig network;
  Eigen::VectorXd parameters;
  Hyperparams hyperparams;
  std::size_t episodes_done = 0;
  nlohmann::json optimizer;  // Adam state, may be null
  std::string rng_state;
  nlohmann::json environment;  // episode config the agent was trained on
};

Checkpoint make_checkpoint(const Trainer& trainer, const FeaturePartition& partition,
                           const StateShape& shape, const nlohmann::json& environment = {});

/// Text JSON container; written to a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws CheckpointError for unreadable, malformed or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

QNetwork network_from_checkpoint(const Checkpoint& checkpoint);
Trainer trainer_from_checkpoint(const Checkpoint& checkpoint, Hyperparams hp);

}  // namespace aset::agent
