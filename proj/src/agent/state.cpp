#include "aset/agent/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aset/catalog.hpp"

namespace aset::agent {

namespace {

void check_bins(const std::vector<double>& bins, const char* name,
                std::vector<std::string>& errors) {
  if (bins.empty() || bins.front() != 0.0) {
    errors.push_back(std::string(name) + " must start at 0");
  }
  for (std::size_t i = 1; i < bins.size(); ++i) {
    if (!(bins[i] > bins[i - 1])) {
      errors.push_back(std::string(name) + " must be strictly increasing");
      break;
    }
  }
}

std::size_t bin_of(const std::vector<double>& bins, double x) {
  const auto it = std::upper_bound(bins.begin(), bins.end(), x);
  return it == bins.begin() ? 0 : static_cast<std::size_t>(it - bins.begin()) - 1;
}

}  // namespace

void FeaturePartition::validate() const {
  std::vector<std::string> errors;
  check_bins(delay_bins_ms, "delay bins", errors);
  check_bins(rate_bins_fps, "rate bins", errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

std::size_t FeaturePartition::delay_bin(double delay_ms) const {
  return bin_of(delay_bins_ms, delay_ms);
}

std::size_t FeaturePartition::rate_bin(double rate) const { return bin_of(rate_bins_fps, rate); }

nlohmann::json partition_to_json(const FeaturePartition& partition) {
  return {{"delay_bins_ms", partition.delay_bins_ms}, {"rate_bins_fps", partition.rate_bins_fps}};
}

FeaturePartition partition_from_json(const nlohmann::json& doc) {
  FeaturePartition p;
  try {
    if (doc.contains("delay_bins_ms")) p.delay_bins_ms = doc.at("delay_bins_ms").get<std::vector<double>>();
    if (doc.contains("rate_bins_fps")) p.rate_bins_fps = doc.at("rate_bins_fps").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("malformed partition: ") + e.what()});
  }
  p.validate();
  return p;
}

StateTensor encode_state(const std::deque<Snapshot>& snapshots, double now, std::size_t workers,
                         const FeaturePartition& partition, std::size_t slots, double period) {
  const std::size_t n_rate = partition.rate_bins_fps.size();
  StateTensor state({partition.feature_count(), workers, slots});
  for (const auto& snap : snapshots) {
    const long offset = std::lround((now - snap.time) / period);
    if (offset < 0 || offset >= static_cast<long>(slots)) continue;
    const std::size_t slot = slots - 1 - static_cast<std::size_t>(offset);
    if (snap.groups.size() != workers) {
      throw std::invalid_argument("snapshot worker count does not match the state shape");
    }
    for (std::size_t w = 0; w < workers; ++w) {
      const auto& g = snap.groups[w];
      state.at(0, w, slot) = g.stream_count;
      state.at(1, w, slot) = g.responses;
      state.at(2, w, slot) = g.load;
      for (const auto& tag : g.streams) {
        const std::size_t cell =
            3 + partition.delay_bin(tag.tolerated_delay_ms) * n_rate + partition.rate_bin(tag.rate);
        state.at(cell, w, slot) += tag.rate;
      }
    }
  }
  return state;
}

StateTensor encode_state(const Simulation& sim, const FeaturePartition& partition) {
  const auto& config = sim.config();
  const auto slots =
      static_cast<std::size_t>(std::lround(config.window_s / config.metrics_period_s));
  return encode_state(sim.snapshots(), sim.now(), sim.groups().size(), partition, slots,
                      config.metrics_period_s);
}

}  // namespace aset::agent
