#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "aset/agent/qnetwork.hpp"
#include "aset/agent/replay.hpp"

namespace aset::agent {

/// Index of the largest value; ties go to the lowest index.
int greedy_action(const Eigen::VectorXd& q);

/// Uniform random action with probability epsilon, else greedy. Draws one
/// uniform variate per call so the RNG stream does not depend on the branch.
int select_action(const Eigen::VectorXd& q, double epsilon, std::mt19937_64& rng);

/// r + gamma * max_a' Q(s', a'), or r for terminal transitions.
double td_target(double reward, double next_max_q, double gamma, bool terminal);
double td_target(const Transition& t, const QNetwork& frozen, double gamma);

/// Targets for a minibatch, evaluated with one batched forward pass.
std::vector<double> td_targets(const std::vector<const Transition*>& batch,
                               const QNetwork& frozen, double gamma);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Summed squared Bellman error over the batch and its gradient; targets are
/// constants.
LossGradient loss_and_gradient(const QNetwork& net, const std::vector<const Transition*>& batch,
                               const std::vector<double>& targets);

}  // namespace aset::agent
