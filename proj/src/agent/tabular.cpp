#include "aset/agent/tabular.hpp"

#include <cmath>
#include <stdexcept>

#include "aset/catalog.hpp"

namespace aset::agent {

void TabularMdp::validate() const {
  std::vector<std::string> errors;
  if (states == 0 || actions == 0) errors.push_back("MDP needs at least one state and action");
  if (outcomes.size() != states) errors.push_back("outcome table needs one row per state");
  for (const auto& row : outcomes) {
    if (row.size() != actions) {
      errors.push_back("outcome table needs one entry per action");
      break;
    }
    for (const auto& list : row) {
      double total = 0.0;
      for (const auto& o : list) {
        if (o.next_state >= states) errors.push_back("outcome names an unknown state");
        if (o.probability < 0.0) errors.push_back("negative transition probability");
        total += o.probability;
      }
      if (std::abs(total - 1.0) > 1e-12) errors.push_back("transition probabilities must sum to 1");
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

Eigen::MatrixXd tabular_value_iteration(const TabularMdp& mdp, double gamma, double tolerance,
                                        std::size_t max_iterations) {
  mdp.validate();
  const auto ns = static_cast<Eigen::Index>(mdp.states);
  const auto na = static_cast<Eigen::Index>(mdp.actions);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ns, na);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd v = q.rowwise().maxCoeff();
    Eigen::MatrixXd next(ns, na);
    for (Eigen::Index s = 0; s < ns; ++s) {
      for (Eigen::Index a = 0; a < na; ++a) {
        double value = 0.0;
        for (const auto& o : mdp.outcomes[s][a]) {
          const double future = o.terminal ? 0.0 : v[static_cast<Eigen::Index>(o.next_state)];
          value += o.probability * (o.reward + gamma * future);
        }
        next(s, a) = value;
      }
    }
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change < tolerance) return q;
  }
  throw std::runtime_error("value iteration did not converge");
}

TabularEnvironment::TabularEnvironment(TabularMdp mdp, std::size_t episode_length,
                                       std::size_t start_state)
    : mdp_(std::move(mdp)), episode_length_(episode_length), start_(start_state) {
  mdp_.validate();
  if (episode_length_ == 0) throw std::invalid_argument("episode length must be positive");
  if (start_ >= mdp_.states) throw std::invalid_argument("start state out of range");
}

std::shared_ptr<const StateTensor> TabularEnvironment::observation(std::size_t state) const {
  auto obs = std::make_shared<StateTensor>(state_shape());
  obs->at(0, state, 0) = 1.0;
  return obs;
}

std::shared_ptr<const StateTensor> TabularEnvironment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = start_;
  steps_ = 0;
  return observation(state_);
}

StepResult TabularEnvironment::step(int action) {
  if (action < 0 || static_cast<std::size_t>(action) >= mdp_.actions) {
    throw std::out_of_range("action out of range");
  }
  const auto& list = mdp_.outcomes[state_][static_cast<std::size_t>(action)];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  std::size_t pick = list.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    acc += list[i].probability;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const auto& o = list[pick];
  state_ = o.next_state;
  ++steps_;
  StepResult result;
  result.reward = o.reward;
  result.next_state = observation(state_);
  result.terminal = o.terminal;
  result.done = o.terminal || steps_ >= episode_length_;
  return result;
}

}  // namespace aset::agent
