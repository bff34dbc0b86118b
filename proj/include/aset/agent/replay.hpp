#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <vector>

#include "aset/agent/state.hpp"

namespace aset::agent {

struct Transition {
  // Shared so consecutive transitions reuse one observation.
  std::shared_ptr<const StateTensor> state;
  int action = 0;
  std::shared_ptr<const StateTensor> next_state;
  double reward = 0.0;
  bool terminal = false;
};

/// Fixed-capacity ring; once full, each insert overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest transition.
  const Transition& at(std::size_t i) const;
  /// Uniform draws with replacement.
  std::vector<std::size_t> sample_indices(std::size_t count, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
  std::vector<Transition> items_;
};

}  // namespace aset::agent
