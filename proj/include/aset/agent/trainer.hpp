#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aset/agent/adam.hpp"
#include "aset/agent/environment.hpp"
#include "aset/agent/qnetwork.hpp"
#include "aset/agent/replay.hpp"

namespace aset::agent {

struct Hyperparams {
  double gamma = 0.95;
  double learning_rate = 1e-4;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;  // share of episodes spent decaying
  double window_s = 25.0;
  double horizon_s = 300.0;
  std::optional<double> early_stop_threshold = 0.7;
  double reward_threshold = 0.9;
  std::size_t buffer_size = 10000;
  std::size_t gradient_steps = 64;
  std::size_t batch_size = 32;
  std::size_t episodes = 200;
  std::size_t seed_pool = 16;
  std::uint64_t seed_pool_base = 1000000;
  std::uint64_t seed = 0;  // network init and exploration

  void validate() const;
  double epsilon_at(std::size_t episode) const;
  std::vector<std::uint64_t> training_seeds() const;
};

nlohmann::json hyperparams_to_json(const Hyperparams& hp);
/// Missing keys keep their defaults; unknown keys are rejected.
Hyperparams hyperparams_from_json(const nlohmann::json& doc);

struct EpisodeLog {
  std::size_t episode = 0;
  double episode_return = 0.0;  // discounted, from the first tick
  double mean_success = 0.0;    // mean window success over the episode's ticks
  double epsilon = 0.0;
  std::size_t steps = 0;
  bool early_stopped = false;
  double mean_loss = 0.0;  // over the episode's gradient steps, 0 if skipped
};

/// Episodic DQN: an epsilon-greedy rollout fills the replay buffer, then a
/// fixed number of minibatch Adam steps regress Q toward targets computed
/// with the parameters frozen at the start of the gradient phase.
class Trainer {
 public:
  Trainer(Hyperparams hp, QNetworkConfig network);
  /// Resumes from saved parameters and optimizer state.
  Trainer(Hyperparams hp, QNetwork network, Adam optimizer, std::size_t episodes_done,
          const std::string& rng_state = {});

  EpisodeLog run_episode(Environment& env);
  std::vector<EpisodeLog> train(Environment& env, std::size_t episodes,
                                const std::function<void(const EpisodeLog&)>& on_episode = {});

  const Hyperparams& hyperparams() const { return hp_; }
  const QNetwork& network() const { return net_; }
  const Adam& optimizer() const { return adam_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t episodes_done() const { return episodes_done_; }
  std::string rng_state() const;

 private:
  double gradient_phase();

  Hyperparams hp_;
  QNetwork net_;
  Adam adam_;
  ReplayBuffer buffer_;
  std::vector<std::uint64_t> seeds_;
  std::mt19937_64 rng_;
  std::size_t episodes_done_ = 0;
};

/// Learning-curve table: episode, return, mean_success, epsilon.
void write_learning_curve_header(std::ostream& out, const std::string& provenance);
void write_learning_curve_row(std::ostream& out, const EpisodeLog& log);

}  // namespace aset::agent
