#include "aset/agent/dqn.hpp"

#include <stdexcept>

namespace aset::agent {

int greedy_action(const Eigen::VectorXd& q) {
  if (q.size() == 0) throw std::invalid_argument("empty action-value vector");
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<int>(best);
}

int select_action(const Eigen::VectorXd& q, double epsilon, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < epsilon) {
    return std::uniform_int_distribution<int>(0, static_cast<int>(q.size()) - 1)(rng);
  }
  return greedy_action(q);
}

double td_target(double reward, double next_max_q, double gamma, bool terminal) {
  return terminal ? reward : reward + gamma * next_max_q;
}

double td_target(const Transition& t, const QNetwork& frozen, double gamma) {
  if (t.terminal) return t.reward;
  return td_target(t.reward, frozen.forward(*t.next_state).maxCoeff(), gamma, false);
}

std::vector<double> td_targets(const std::vector<const Transition*>& batch,
                               const QNetwork& frozen, double gamma) {
  std::vector<const StateTensor*> next;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i]->terminal) {
      next.push_back(batch[i]->next_state.get());
      rows.push_back(i);
    }
  }
  std::vector<double> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = batch[i]->reward;
  if (next.empty()) return targets;
  const Eigen::MatrixXd q = frozen.forward_batch(next);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::size_t i = rows[j];
    targets[i] = td_target(batch[i]->reward, q.col(static_cast<Eigen::Index>(j)).maxCoeff(), gamma,
                           false);
  }
  return targets;
}

LossGradient loss_and_gradient(const QNetwork& net, const std::vector<const Transition*>& batch,
                               const std::vector<double>& targets) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (targets.size() != batch.size()) throw std::invalid_argument("one target per transition");
  std::vector<const StateTensor*> states;
  states.reserve(batch.size());
  for (const auto* t : batch) states.push_back(t->state.get());
  QNetwork::Cache cache;
  const Eigen::MatrixXd q = net.forward_batch(states, cache);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  LossGradient result;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(batch[i]->action);
    if (a < 0 || a >= q.rows()) throw std::out_of_range("transition action out of range");
    const auto col = static_cast<Eigen::Index>(i);
    const double error = targets[i] - q(a, col);
    result.loss += error * error;
    d_out(a, col) = -2.0 * error;
  }
  result.gradient = net.backward(cache, d_out);
  return result;
}

}  // namespace aset::agent
