#include <gtest/gtest.h>

#include <cmath>

#include "aset/agent/adam.hpp"
#include "aset/agent/dqn.hpp"
#include "aset/agent/qnetwork.hpp"

namespace aset::agent {
namespace {

QNetworkConfig small_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(2, 7), ch(1, 3);
  QNetworkConfig c;
  c.in_channels = ch(rng);
  c.height = dim(rng);
  c.width = dim(rng);
  c.conv_channels = {ch(rng) + 1, ch(rng) + 1, ch(rng)};
  c.kernel = 4;
  c.hidden = 12;
  c.actions = 3 + ch(rng);
  c.log_input = true;
  return c;
}

std::shared_ptr<StateTensor> random_state(const QNetworkConfig& c, std::mt19937_64& rng) {
  auto s = std::make_shared<StateTensor>(StateShape{c.height, c.in_channels, c.width});
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (auto& x : s->data()) x = u(rng);
  return s;
}

TEST(GreedyAction, ArgmaxAndTies) {
  Eigen::VectorXd q(7);
  q << 0, 0, 0, 0, 0, 0, 9;
  EXPECT_EQ(greedy_action(q), 6);
  q.setZero();
  EXPECT_EQ(greedy_action(q), 0);
  q << 1, 3, 3, 2, 0, -1, 3;
  EXPECT_EQ(greedy_action(q), 1);
}

TEST(GreedyAction, InvariantToUniformShift) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd q(7);
    for (int i = 0; i < 7; ++i) q[i] = n(rng);
    ASSERT_EQ(greedy_action(q), greedy_action((q.array() + 17.25).matrix()));
  }
}

TEST(SelectAction, FullExplorationIsUniform) {
  std::mt19937_64 rng(5);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(7);
  q[6] = 9.0;
  std::vector<int> counts(7, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[select_action(q, 1.0, rng)]++;
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 7.0, 0.02 / 7.0);
}

TEST(SelectAction, NoExplorationIsGreedy) {
  std::mt19937_64 rng(6);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(7);
  q[6] = 9.0;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(q, 0.0, rng), 6);
  q.setZero();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(q, 0.0, rng), 0);
}

TEST(SelectAction, MixtureProbability) {
  std::mt19937_64 rng(7);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(7);
  q[2] = 1.0;
  const int n = 100000;
  int greedy = 0;
  for (int i = 0; i < n; ++i) greedy += select_action(q, 0.35, rng) == 2;
  EXPECT_NEAR(static_cast<double>(greedy) / n, 0.65 + 0.35 / 7.0, 0.01);
}

TEST(TdTarget, Arithmetic) {
  EXPECT_NEAR(td_target(-0.3, -1.0, 0.95, false), -1.25, 1e-12);
  EXPECT_EQ(td_target(-0.3, -1.0, 0.0, false), -0.3);
  EXPECT_EQ(td_target(-0.3, -1.0, 0.95, true), -0.3);
}

TEST(TdTarget, BatchedMatchesSingle) {
  std::mt19937_64 rng(8);
  const auto c = small_config(rng);
  const QNetwork net(c, 9);
  std::vector<Transition> items;
  for (int i = 0; i < 6; ++i) {
    items.push_back({random_state(c, rng), i % 3, random_state(c, rng), -0.1 * i, i == 4});
  }
  std::vector<const Transition*> batch;
  for (const auto& t : items) batch.push_back(&t);
  const auto targets = td_targets(batch, net, 0.9);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double expected =
        items[i].terminal ? items[i].reward
                          : items[i].reward + 0.9 * net.forward(*items[i].next_state).maxCoeff();
    EXPECT_NEAR(targets[i], expected, 1e-12);
    EXPECT_NEAR(td_target(items[i], net, 0.9), expected, 1e-12);
  }
}

TEST(QNetwork, BatchedForwardMatchesSingle) {
  std::mt19937_64 rng(10);
  const auto c = small_config(rng);
  const QNetwork net(c, 11);
  std::vector<std::shared_ptr<StateTensor>> states;
  std::vector<const StateTensor*> ptrs;
  for (int i = 0; i < 5; ++i) {
    states.push_back(random_state(c, rng));
    ptrs.push_back(states.back().get());
  }
  const auto q = net.forward_batch(ptrs);
  ASSERT_EQ(q.rows(), static_cast<Eigen::Index>(c.actions));
  ASSERT_EQ(q.cols(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_LT((q.col(i) - net.forward(*ptrs[i])).norm(), 1e-12);
}

TEST(QNetwork, SameSeedSameParameters) {
  std::mt19937_64 rng(12);
  const auto c = small_config(rng);
  EXPECT_EQ(QNetwork(c, 1).parameters(), QNetwork(c, 1).parameters());
  EXPECT_NE(QNetwork(c, 1).parameters(), QNetwork(c, 2).parameters());
}

TEST(QNetwork, DeskScaleShape) {
  const auto c = network_config_for({19, 29, 25});
  const QNetwork net(c, 0);
  EXPECT_EQ(net.forward(StateTensor({19, 29, 25})).size(), 7);
  EXPECT_EQ(network_config_from_json(network_config_to_json(c)), c);
}

std::vector<const Transition*> pointers(const std::vector<Transition>& items) {
  std::vector<const Transition*> out;
  for (const auto& t : items) out.push_back(&t);
  return out;
}

TEST(Loss, ZeroWhenTargetsMatch) {
  std::mt19937_64 rng(13);
  const auto c = small_config(rng);
  const QNetwork net(c, 14);
  std::vector<Transition> items;
  std::vector<double> targets;
  for (int i = 0; i < 4; ++i) {
    items.push_back({random_state(c, rng), i % 2, nullptr, 0.0, true});
    targets.push_back(net.forward(*items.back().state)[i % 2]);
  }
  const auto lg = loss_and_gradient(net, pointers(items), targets);
  EXPECT_NEAR(lg.loss, 0.0, 1e-20);
  EXPECT_NEAR(lg.gradient.norm(), 0.0, 1e-12);
}

TEST(Loss, SquaredError) {
  std::mt19937_64 rng(15);
  const auto c = small_config(rng);
  const QNetwork net(c, 16);
  std::vector<Transition> items = {{random_state(c, rng), 1, nullptr, 0.0, true}};
  const double q = net.forward(*items[0].state)[1];
  EXPECT_NEAR(loss_and_gradient(net, pointers(items), {q + 2.0}).loss, 4.0, 1e-12);
}

/// Central finite differences of the summed squared TD loss.
double gradient_relative_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto c = small_config(rng);
  QNetwork net(c, seed);
  // Move off the zero-bias initialization so no unit sits exactly on a kink.
  Eigen::VectorXd start = net.parameters();
  std::normal_distribution<double> jitter(0.0, 0.1);
  for (auto& x : start) x += jitter(rng);
  net.set_parameters(start);
  std::vector<Transition> items;
  std::vector<double> targets;
  std::uniform_int_distribution<int> action(0, static_cast<int>(c.actions) - 1);
  std::normal_distribution<double> target(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    items.push_back({random_state(c, rng), action(rng), nullptr, 0.0, true});
    targets.push_back(target(rng));
  }
  const auto batch = pointers(items);
  const auto analytic = loss_and_gradient(net, batch, targets).gradient;
  Eigen::VectorXd params = net.parameters();
  Eigen::VectorXd numeric(params.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    net.set_parameters(params);
    const double up = loss_and_gradient(net, batch, targets).loss;
    params[i] = keep - h;
    net.set_parameters(params);
    const double down = loss_and_gradient(net, batch, targets).loss;
    params[i] = keep;
    numeric[i] = (up - down) / (2.0 * h);
  }
  return (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    EXPECT_LE(gradient_relative_error(seed), 1e-4) << "seed " << seed;
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Adam adam(4);
  Eigen::VectorXd p(4);
  p << 1, -2, 3, 0.5;
  const Eigen::VectorXd before = p;
  for (int i = 0; i < 10; ++i) adam.step(p, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(p, before);
}

TEST(Adam, ZeroLearningRateIsIdentity) {
  Adam adam(3, {0.0});
  Eigen::VectorXd p = Eigen::VectorXd::Ones(3);
  adam.step(p, Eigen::VectorXd::Constant(3, 5.0));
  EXPECT_EQ(p, Eigen::VectorXd::Ones(3));
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  Adam adam(2, {0.01});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd g(2);
  g << 3.0, -0.002;
  Eigen::VectorXd last = p;
  for (int i = 0; i < 500; ++i) {
    last = p;
    adam.step(p, g);
  }
  EXPECT_NEAR(last[0] - p[0], 0.01, 1e-6);
  EXPECT_NEAR(p[1] - last[1], 0.01, 1e-4);
}

TEST(Adam, StateRoundTrips) {
  Adam a(3, {0.05});
  Eigen::VectorXd pa = Eigen::VectorXd::Zero(3), g(3);
  g << 1, 2, -1;
  for (int i = 0; i < 5; ++i) a.step(pa, g);
  Adam b(3);
  b.restore(a.to_json());
  Eigen::VectorXd pb = pa;
  a.step(pa, g);
  b.step(pb, g);
  EXPECT_EQ(pa, pb);
  EXPECT_EQ(b.steps(), 6);
}

}  // namespace
}  // namespace aset::agent
