#include "aset/policies.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace aset {

namespace {

constexpr std::array<std::string_view, kPolicyCount> kNames = {
    "closest", "load_balancing", "farthest", "cheaper", "rp_latency", "rp_load", "least_impedance"};

double path_score(const SystemView& view, std::size_t w) {
  const auto& p = view.path(w);
  return p.mean_delay_ms + 2.0 * p.delay_std_ms;
}

Decision make(const Stream& stream, std::size_t worker, double now) {
  return Assignment{stream.id, worker, now};
}

/// Lexicographic pick over a key tuple; lower wins.
template <typename KeyFn>
Decision pick_min(const Stream& stream, const SystemView& view, double now, KeyFn key) {
  const auto feasible = feasible_set(stream, view);
  if (feasible.empty()) return std::nullopt;
  std::size_t best = feasible.front();
  auto best_key = key(best);
  for (std::size_t w : feasible) {
    auto k = key(w);
    if (k < best_key) {
      best = w;
      best_key = k;
    }
  }
  return make(stream, best, now);
}

Decision pick_weighted(const Stream& stream, double now,
                       std::mt19937_64& rng, const std::vector<std::size_t>& feasible,
                       const std::vector<double>& weights) {
  if (feasible.empty()) return std::nullopt;
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    acc += weights[i];
    if (u < acc) return make(stream, feasible[i], now);
  }
  return make(stream, feasible.back(), now);
}

}  // namespace

std::string_view to_string(PolicyKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

PolicyKind policy_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<PolicyKind>(i);
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

int to_index(PolicyKind kind) { return static_cast<int>(kind); }

PolicyKind policy_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kPolicyCount)) {
    throw std::out_of_range("policy index out of range");
  }
  return static_cast<PolicyKind>(index);
}

FeasibilityCheck check_feasibility(const Stream& stream, const VariantSpec& variant,
                                   const ModelSpec& model, const PathStats& path,
                                   double worker_load, double uplink_rate) {
  FeasibilityCheck check;
  check.task_ok = model.task == stream.task;
  check.accuracy_ok = model.accuracy >= stream.required_accuracy;
  check.size_ok = stream.input_size > 0.0 && stream.input_size <= variant.max_input_size;
  if (!check.size_ok) return check;
  const double added = fractional_load(variant, stream.input_size) * stream.rate;
  check.load_ok = worker_load + added <= variant.base_capacity;
  check.expected_delay_ms = pessimistic_rtt(path, stream.access_delay_ms) +
                            stream.input_size / uplink_rate * 1000.0 +
                            processing_delay(variant, stream.input_size);
  check.latency_ok = check.expected_delay_ms <= stream.tolerated_delay_ms;
  return check;
}

std::vector<std::size_t> feasible_set(const Stream& stream, const SystemView& view) {
  std::vector<std::size_t> result;
  const auto& catalog = *view.catalog;
  for (std::size_t w = 0; w < view.workers.size(); ++w) {
    const auto variant_index = view.workers[w].variant;
    const auto& model = catalog.model_of(variant_index);
    if (model.task != stream.task || model.accuracy < stream.required_accuracy) continue;
    const auto check = check_feasibility(stream, catalog.variants()[variant_index], model,
                                         view.path(w), view.loads[w], view.topology->uplink_rate);
    if (check.feasible()) result.push_back(w);
  }
  return result;
}

double expected_end_to_end(const Stream& stream, const SystemView& view, std::size_t worker) {
  return 2.0 * path_score(view, worker) + processing_delay(view.variant(worker), stream.input_size);
}

Decision select_closest(const Stream& stream, const SystemView& view, double now) {
  return pick_min(stream, view, now, [&](std::size_t w) {
    return std::make_tuple(path_score(view, w), view.utilization(w), view.workers[w].id);
  });
}

Decision select_load_balancing(const Stream& stream, const SystemView& view, double now) {
  return pick_min(stream, view, now, [&](std::size_t w) {
    return std::make_tuple(view.utilization(w), view.path(w).mean_delay_ms, view.workers[w].id);
  });
}

Decision select_farthest(const Stream& stream, const SystemView& view, double now) {
  return pick_min(stream, view, now, [&](std::size_t w) {
    return std::make_tuple(-path_score(view, w), view.utilization(w), view.workers[w].id);
  });
}

Decision select_cheaper(const Stream& stream, const SystemView& view, double now) {
  return pick_min(stream, view, now, [&](std::size_t w) {
    return std::make_tuple(-expected_end_to_end(stream, view, w), view.utilization(w),
                           view.workers[w].id);
  });
}

Decision select_least_impedance(const Stream& stream, const SystemView& view, double now) {
  return pick_min(stream, view, now, [&](std::size_t w) {
    return std::make_tuple(expected_end_to_end(stream, view, w), view.utilization(w),
                           view.workers[w].id);
  });
}

Decision select_rp_latency(const Stream& stream, const SystemView& view, double now,
                           std::mt19937_64& rng) {
  const auto feasible = feasible_set(stream, view);
  std::vector<double> weights;
  weights.reserve(feasible.size());
  for (std::size_t w : feasible) weights.push_back(1.0 / expected_end_to_end(stream, view, w));
  return pick_weighted(stream, now, rng, feasible, weights);
}

Decision select_rp_load(const Stream& stream, const SystemView& view, double now,
                        std::mt19937_64& rng) {
  const auto feasible = feasible_set(stream, view);
  std::vector<double> weights;
  weights.reserve(feasible.size());
  for (std::size_t w : feasible) {
    const double load = view.loads[w] > 0.0 ? view.loads[w] : kZeroLoadEpsilon;
    weights.push_back(view.variant(w).base_capacity / load);
  }
  return pick_weighted(stream, now, rng, feasible, weights);
}

Decision apply_policy(PolicyKind kind, const Stream& stream, const SystemView& view, double now,
                      std::mt19937_64& rng) {
  switch (kind) {
    case PolicyKind::kClosest: return select_closest(stream, view, now);
    case PolicyKind::kLoadBalancing: return select_load_balancing(stream, view, now);
    case PolicyKind::kFarthest: return select_farthest(stream, view, now);
    case PolicyKind::kCheaper: return select_cheaper(stream, view, now);
    case PolicyKind::kRpLatency: return select_rp_latency(stream, view, now, rng);
    case PolicyKind::kRpLoad: return select_rp_load(stream, view, now, rng);
    case PolicyKind::kLeastImpedance: return select_least_impedance(stream, view, now);
  }
  throw std::invalid_argument("invalid policy kind");
}

}  // namespace aset
