#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include <json.hpp>

#include "aset/simulator.hpp"

namespace aset::agent {

/// Ascending bin boundaries for the per-worker query sums. The first
/// boundary is 0 and the last interval is open-ended.
struct FeaturePartition {
  std::vector<double> delay_bins_ms{0.0, 50.0, 150.0, 400.0};
  std::vector<double> rate_bins_fps{0.0, 5.0, 15.0, 25.0};

  void validate() const;
  std::size_t delay_bin(double delay_ms) const;
  std::size_t rate_bin(double rate) const;
  /// Stream count, responses and load, then one cell per (delay, rate) bin pair.
  std::size_t feature_count() const { return 3 + delay_bins_ms.size() * rate_bins_fps.size(); }
  friend bool operator==(const FeaturePartition&, const FeaturePartition&) = default;
};

nlohmann::json partition_to_json(const FeaturePartition& partition);
FeaturePartition partition_from_json(const nlohmann::json& doc);

struct StateShape {
  std::size_t features = 0;
  std::size_t workers = 0;
  std::size_t slots = 0;

  std::size_t size() const { return features * workers * slots; }
  friend bool operator==(const StateShape&, const StateShape&) = default;
};

/// Dense nonnegative observation. Stored worker-major so each worker row is
/// one contiguous (feature x slot) plane.
class StateTensor {
 public:
  StateTensor() = default;
  explicit StateTensor(StateShape shape) : shape_(shape), data_(shape.size(), 0.0) {}

  const StateShape& shape() const { return shape_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double& at(std::size_t feature, std::size_t worker, std::size_t slot) {
    return data_[(worker * shape_.features + feature) * shape_.slots + slot];
  }
  double at(std::size_t feature, std::size_t worker, std::size_t slot) const {
    return data_[(worker * shape_.features + feature) * shape_.slots + slot];
  }

 private:
  StateShape shape_;
  std::vector<double> data_;
};

/// Builds the observation for the window ending at `now` from per-second
/// snapshots; slot k holds the snapshot taken at now - slots + 1 + k.
/// Missing history stays zero. Throws std::invalid_argument when a snapshot
/// does not match `workers`.
StateTensor encode_state(const std::deque<Snapshot>& snapshots, double now, std::size_t workers,
                         const FeaturePartition& partition, std::size_t slots,
                         double period = 1.0);

StateTensor encode_state(const Simulation& sim, const FeaturePartition& partition);

}  // namespace aset::agent
