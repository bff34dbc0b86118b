#include "aset/agent/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "aset/agent/dqn.hpp"
#include "aset/catalog.hpp"

namespace aset::agent {

namespace {

Hyperparams validated(Hyperparams hp) {
  hp.validate();
  return hp;
}

}  // namespace

void Hyperparams::validate() const {
  std::vector<std::string> errors;
  if (!(gamma >= 0.0 && gamma <= 1.0)) errors.push_back("gamma must lie in [0, 1]");
  if (!(learning_rate >= 0.0)) errors.push_back("learning rate must be nonnegative");
  for (double e : {epsilon_start, epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) errors.push_back("epsilon must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0)) {
    errors.push_back("epsilon decay fraction must lie in (0, 1]");
  }
  if (!(window_s > 0.0) || !(horizon_s > 0.0)) errors.push_back("window and horizon must be positive");
  if (early_stop_threshold && !(*early_stop_threshold >= 0.0 && *early_stop_threshold <= 1.0)) {
    errors.push_back("early-stop threshold must lie in [0, 1]");
  }
  if (!(reward_threshold >= 0.0 && reward_threshold <= 1.0)) {
    errors.push_back("reward threshold must lie in [0, 1]");
  }
  if (buffer_size == 0 || batch_size == 0 || episodes == 0 || seed_pool == 0) {
    errors.push_back("buffer size, batch size, episodes and seed pool must be positive");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

double Hyperparams::epsilon_at(std::size_t episode) const {
  const double span = std::max(1.0, epsilon_decay_fraction * static_cast<double>(episodes));
  const double progress = std::min(1.0, static_cast<double>(episode) / span);
  return epsilon_start + (epsilon_end - epsilon_start) * progress;
}

std::vector<std::uint64_t> Hyperparams::training_seeds() const {
  std::vector<std::uint64_t> seeds(seed_pool);
  for (std::size_t i = 0; i < seed_pool; ++i) seeds[i] = seed_pool_base + i;
  return seeds;
}

nlohmann::json hyperparams_to_json(const Hyperparams& hp) {
  return {{"gamma", hp.gamma},
          {"learning_rate", hp.learning_rate},
          {"epsilon_start", hp.epsilon_start},
          {"epsilon_end", hp.epsilon_end},
          {"epsilon_decay_fraction", hp.epsilon_decay_fraction},
          {"window_s", hp.window_s},
          {"horizon_s", hp.horizon_s},
          {"early_stop_threshold",
           hp.early_stop_threshold ? nlohmann::json(*hp.early_stop_threshold) : nlohmann::json()},
          {"reward_threshold", hp.reward_threshold},
          {"buffer_size", hp.buffer_size},
          {"gradient_steps", hp.gradient_steps},
          {"batch_size", hp.batch_size},
          {"episodes", hp.episodes},
          {"seed_pool", hp.seed_pool},
          {"seed_pool_base", hp.seed_pool_base},
          {"seed", hp.seed}};
}

Hyperparams hyperparams_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> kKeys = {
      "gamma",      "learning_rate",     "epsilon_start",    "epsilon_end",
      "epsilon_decay_fraction", "window_s", "horizon_s",     "early_stop_threshold",
      "reward_threshold", "buffer_size", "gradient_steps",   "batch_size",
      "episodes",   "seed_pool",         "seed_pool_base",   "seed"};
  Hyperparams hp;
  std::vector<std::string> errors;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!kKeys.count(key)) errors.push_back("unknown hyperparameter '" + key + "'");
    }
    hp.gamma = doc.value("gamma", hp.gamma);
    hp.learning_rate = doc.value("learning_rate", hp.learning_rate);
    hp.epsilon_start = doc.value("epsilon_start", hp.epsilon_start);
    hp.epsilon_end = doc.value("epsilon_end", hp.epsilon_end);
    hp.epsilon_decay_fraction = doc.value("epsilon_decay_fraction", hp.epsilon_decay_fraction);
    hp.window_s = doc.value("window_s", hp.window_s);
    hp.horizon_s = doc.value("horizon_s", hp.horizon_s);
    if (doc.contains("early_stop_threshold")) {
      const auto& v = doc.at("early_stop_threshold");
      hp.early_stop_threshold = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    hp.reward_threshold = doc.value("reward_threshold", hp.reward_threshold);
    hp.buffer_size = doc.value("buffer_size", hp.buffer_size);
    hp.gradient_steps = doc.value("gradient_steps", hp.gradient_steps);
    hp.batch_size = doc.value("batch_size", hp.batch_size);
    hp.episodes = doc.value("episodes", hp.episodes);
    hp.seed_pool = doc.value("seed_pool", hp.seed_pool);
    hp.seed_pool_base = doc.value("seed_pool_base", hp.seed_pool_base);
    hp.seed = doc.value("seed", hp.seed);
  } catch (const nlohmann::json::exception& e) {
    errors.push_back(std::string("malformed hyperparameters: ") + e.what());
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  hp.validate();
  return hp;
}

Trainer::Trainer(Hyperparams hp, QNetworkConfig network)
    : hp_(validated(std::move(hp))),
      net_(std::move(network), hp_.seed),
      adam_(net_.parameter_count(), AdamParams{hp_.learning_rate}),
      buffer_(hp_.buffer_size),
      seeds_(hp_.training_seeds()),
      rng_(hp_.seed ^ 0x5DEECE66DULL) {}

Trainer::Trainer(Hyperparams hp, QNetwork network, Adam optimizer, std::size_t episodes_done,
                 const std::string& rng_state)
    : hp_(validated(std::move(hp))),
      net_(std::move(network)),
      adam_(std::move(optimizer)),
      buffer_(hp_.buffer_size),
      seeds_(hp_.training_seeds()),
      rng_(hp_.seed ^ 0x5DEECE66DULL),
      episodes_done_(episodes_done) {
  adam_.set_learning_rate(hp_.learning_rate);
  if (!rng_state.empty()) {
    std::istringstream in(rng_state);
    in >> rng_;
    if (!in) throw std::invalid_argument("corrupt trainer RNG state");
  }
}

std::string Trainer::rng_state() const {
  std::ostringstream out;
  out << rng_;
  return out.str();
}

EpisodeLog Trainer::run_episode(Environment& env) {
  if (env.action_count() != net_.config().actions) {
    throw std::invalid_argument("environment action count does not match the network");
  }
  EpisodeLog log;
  log.episode = episodes_done_;
  log.epsilon = hp_.epsilon_at(episodes_done_);
  const std::uint64_t seed =
      seeds_[std::uniform_int_distribution<std::size_t>(0, seeds_.size() - 1)(rng_)];

  ReturnAccumulator ret(hp_.gamma);
  double success_sum = 0.0;
  auto state = env.reset(seed);
  while (true) {
    const int action = select_action(net_.forward(*state), log.epsilon, rng_);
    StepResult step = env.step(action);
    buffer_.push({state, action, step.next_state, step.reward, step.terminal});
    ret.add(step.reward);
    success_sum += step.success;
    state = step.next_state;
    if (step.done) {
      log.early_stopped = step.terminal;
      break;
    }
  }
  log.steps = ret.steps();
  log.episode_return = ret.value();
  log.mean_success = success_sum / static_cast<double>(std::max<std::size_t>(1, log.steps));
  log.mean_loss = gradient_phase();
  ++episodes_done_;
  return log;
}

double Trainer::gradient_phase() {
  if (buffer_.size() < hp_.batch_size || hp_.gradient_steps == 0) return 0.0;
  const QNetwork frozen = net_;
  double loss_sum = 0.0;
  std::vector<const Transition*> batch(hp_.batch_size);
  for (std::size_t g = 0; g < hp_.gradient_steps; ++g) {
    const auto picks = buffer_.sample_indices(hp_.batch_size, rng_);
    for (std::size_t i = 0; i < picks.size(); ++i) batch[i] = &buffer_.at(picks[i]);
    const auto targets = td_targets(batch, frozen, hp_.gamma);
    auto lg = loss_and_gradient(net_, batch, targets);
    Eigen::VectorXd params = net_.parameters();
    adam_.step(params, lg.gradient);
    net_.set_parameters(params);
    loss_sum += lg.loss / static_cast<double>(hp_.batch_size);
  }
  return loss_sum / static_cast<double>(hp_.gradient_steps);
}

std::vector<EpisodeLog> Trainer::train(Environment& env, std::size_t episodes,
                                       const std::function<void(const EpisodeLog&)>& on_episode) {
  std::vector<EpisodeLog> logs;
  logs.reserve(episodes);
  for (std::size_t m = 0; m < episodes; ++m) {
    logs.push_back(run_episode(env));
    if (on_episode) on_episode(logs.back());
  }
  return logs;
}

void write_learning_curve_header(std::ostream& out, const std::string& provenance) {
  out << "# " << provenance << '\n' << "episode,return,mean_success,epsilon\n";
}

void write_learning_curve_row(std::ostream& out, const EpisodeLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.6f,%.6f\n", log.episode, log.episode_return,
                log.mean_success, log.epsilon);
  out << buf;
}

}  // namespace aset::agent
