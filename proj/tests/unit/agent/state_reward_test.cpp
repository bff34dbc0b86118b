#include <gtest/gtest.h>

#include "aset/agent/replay.hpp"
#include "aset/agent/reward.hpp"
#include "aset/agent/state.hpp"

namespace aset::agent {
namespace {

Snapshot snapshot(double t, std::size_t groups) {
  Snapshot s;
  s.time = t;
  s.groups.resize(groups);
  return s;
}

TEST(EncodeState, IdleSystemIsAllZero) {
  std::deque<Snapshot> history;
  for (int t = 1; t <= 30; ++t) history.push_back(snapshot(t, 3));
  const auto state = encode_state(history, 30.0, 3, FeaturePartition{}, 25);
  EXPECT_EQ(state.shape(), (StateShape{19, 3, 25}));
  for (double x : state.data()) EXPECT_EQ(x, 0.0);
}

TEST(EncodeState, EmptyHistoryIsAllZero) {
  const auto state = encode_state({}, 0.0, 2, FeaturePartition{}, 25);
  EXPECT_EQ(state.data().size(), 19u * 2 * 25);
  for (double x : state.data()) EXPECT_EQ(x, 0.0);
}

TEST(EncodeState, OneStreamLandsInItsBinPair) {
  const FeaturePartition p;
  EXPECT_EQ(p.delay_bin(95.0), 1u);
  EXPECT_EQ(p.rate_bin(5.0), 1u);
  auto snap = snapshot(10.0, 1);
  snap.groups[0].stream_count = 1;
  snap.groups[0].load = 2.5;
  snap.groups[0].responses = 5;
  snap.groups[0].streams.push_back({95.0, 5.0});
  const auto state = encode_state({snap}, 10.0, 1, p, 25);
  const std::size_t cell = 3 + 1 * 4 + 1;
  EXPECT_EQ(state.at(cell, 0, 24), 5.0);
  EXPECT_EQ(state.at(0, 0, 24), 1.0);
  EXPECT_EQ(state.at(1, 0, 24), 5.0);
  EXPECT_EQ(state.at(2, 0, 24), 2.5);
  double total = 0.0;
  for (std::size_t f = 3; f < p.feature_count(); ++f) total += state.at(f, 0, 24);
  EXPECT_EQ(total, 5.0);
}

TEST(EncodeState, OnlyTheLastSlotsAreUsed) {
  std::deque<Snapshot> history;
  for (int t = 1; t <= 30; ++t) {
    auto s = snapshot(t, 1);
    s.groups[0].stream_count = t;
    history.push_back(s);
  }
  const auto state = encode_state(history, 30.0, 1, FeaturePartition{}, 25);
  for (std::size_t slot = 0; slot < 25; ++slot) {
    EXPECT_EQ(state.at(0, 0, slot), 6.0 + static_cast<double>(slot));
  }
}

TEST(EncodeState, GroupMismatchThrows) {
  EXPECT_THROW(encode_state({snapshot(1.0, 2)}, 1.0, 3, FeaturePartition{}, 25),
               std::invalid_argument);
}

TEST(FeaturePartition, ValidatesAndRoundTrips) {
  FeaturePartition p;
  p.delay_bins_ms = {0, 100};
  EXPECT_EQ(partition_from_json(partition_to_json(p)), p);
  EXPECT_EQ(p.feature_count(), 3u + 2 * 4);
  EXPECT_THROW(partition_from_json(nlohmann::json{{"delay_bins_ms", {5, 10}}}), ValidationError);
  EXPECT_THROW(partition_from_json(nlohmann::json{{"rate_bins_fps", {0, 10, 10}}}),
               ValidationError);
}

MetricsWindow window(double success, double fail, double reject) {
  MetricsWindow w;
  w.q_success = success;
  w.q_fail = fail;
  w.q_reject = reject;
  return w;
}

TEST(Reward, LossRatioBelowThreshold) {
  EXPECT_NEAR(compute_reward(window(0.7, 0.2, 0.1), 100.0), -0.3, 1e-12);
}

TEST(Reward, ActiveTimePenaltyVanishes) {
  const auto good = window(1.0, 0.0, 0.0);
  EXPECT_EQ(compute_reward(good, 5.0), -1.0);
  EXPECT_EQ(compute_reward(good, 1.0), -1.0);
  EXPECT_NEAR(compute_reward(good, 50.0), -0.1, 1e-12);
  const double late = compute_reward(good, 1e9);
  EXPECT_LT(late, 0.0);
  EXPECT_GT(late, -1e-7);
}

TEST(Return, DiscountedSum) {
  ReturnAccumulator acc(0.5);
  acc.add(-0.1);
  acc.add(-0.2);
  acc.add(0.0);
  EXPECT_NEAR(acc.value(), -0.2, 1e-12);
  EXPECT_EQ(acc.steps(), 3u);
}

Transition tagged(int action) {
  Transition t;
  t.action = action;
  return t;
}

TEST(ReplayBuffer, OverwritesOldestFirst) {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 12; ++i) {
    buffer.push(tagged(i));
    ASSERT_EQ(buffer.size(), std::min(i + 1, 5));
    // Contents are always the most recent min(n, capacity) items, oldest first.
    const int n = static_cast<int>(buffer.size());
    for (int k = 0; k < n; ++k) ASSERT_EQ(buffer.at(k).action, i + 1 - n + k);
  }
}

TEST(ReplayBuffer, SamplesValidIndicesUniformly) {
  ReplayBuffer buffer(10);
  for (int i = 0; i < 10; ++i) buffer.push(tagged(i));
  std::mt19937_64 rng(1);
  std::vector<int> counts(10, 0);
  for (int r = 0; r < 10000; ++r) {
    for (auto i : buffer.sample_indices(32, rng)) counts.at(i)++;
  }
  for (int c : counts) EXPECT_NEAR(c / 320000.0, 0.1, 0.005);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

}  // namespace
}  // namespace aset::agent
