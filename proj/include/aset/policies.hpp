#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aset/catalog.hpp"
#include "aset/topology.hpp"
#include "aset/workload.hpp"

namespace aset {

/// The static policies. The integer encoding 0-6 is the agent's action space.
enum class PolicyKind {
  kClosest = 0,
  kLoadBalancing = 1,
  kFarthest = 2,
  kCheaper = 3,
  kRpLatency = 4,
  kRpLoad = 5,
  kLeastImpedance = 6,
};

inline constexpr std::size_t kPolicyCount = 7;

inline constexpr std::array<PolicyKind, kPolicyCount> kAllPolicies = {
    PolicyKind::kClosest, PolicyKind::kLoadBalancing, PolicyKind::kFarthest,
    PolicyKind::kCheaper, PolicyKind::kRpLatency,     PolicyKind::kRpLoad,
    PolicyKind::kLeastImpedance};

std::string_view to_string(PolicyKind kind);
/// Accepts the CLI spellings; throws std::invalid_argument otherwise.
PolicyKind policy_from_string(std::string_view name);
int to_index(PolicyKind kind);
PolicyKind policy_from_index(int index);

/// Zero-load stand-in for the random-proportional-load weight C_v / L.
inline constexpr double kZeroLoadEpsilon = 1e-3;

/// Snapshot the scheduler decides on: the deployment, per-worker loads in
/// max-size queries/s, and the deciding site's path row.
struct SystemView {
  const Catalog* catalog = nullptr;
  const Topology* topology = nullptr;
  std::span<const Worker> workers;
  std::span<const double> loads;
  std::size_t site = 0;

  const VariantSpec& variant(std::size_t w) const {
    return catalog->variants()[workers[w].variant];
  }
  const PathStats& path(std::size_t w) const {
    return topology->paths[site][workers[w].cluster];
  }
  double utilization(std::size_t w) const { return loads[w] / variant(w).base_capacity; }
};

struct Assignment {
  std::size_t stream = 0;
  std::size_t worker = 0;
  double decision_time = 0.0;
};

/// Per-constraint outcome for one (stream, worker) pair; used by the
/// feasibility filter and by replay audits.
struct FeasibilityCheck {
  bool task_ok = false;
  bool size_ok = false;
  bool load_ok = false;
  bool latency_ok = false;
  bool accuracy_ok = false;
  double expected_delay_ms = 0.0;  // left side of the latency constraint

  bool feasible() const { return task_ok && size_ok && load_ok && latency_ok && accuracy_ok; }
};

FeasibilityCheck check_feasibility(const Stream& stream, const VariantSpec& variant,
                                   const ModelSpec& model, const PathStats& path,
                                   double worker_load, double uplink_rate);

/// Workers satisfying task, load, latency and accuracy constraints, in id order.
std::vector<std::size_t> feasible_set(const Stream& stream, const SystemView& view);

/// Round trip plus processing: 2 * (d + 2 sigma) + D_v(zeta).
double expected_end_to_end(const Stream& stream, const SystemView& view, std::size_t worker);

using Decision = std::optional<Assignment>;

Decision select_closest(const Stream& stream, const SystemView& view, double now);
Decision select_load_balancing(const Stream& stream, const SystemView& view, double now);
Decision select_farthest(const Stream& stream, const SystemView& view, double now);
Decision select_cheaper(const Stream& stream, const SystemView& view, double now);
Decision select_rp_latency(const Stream& stream, const SystemView& view, double now,
                           std::mt19937_64& rng);
Decision select_rp_load(const Stream& stream, const SystemView& view, double now,
                        std::mt19937_64& rng);
Decision select_least_impedance(const Stream& stream, const SystemView& view, double now);

/// Dispatches to the policy's selector; nullopt means reject.
Decision apply_policy(PolicyKind kind, const Stream& stream, const SystemView& view, double now,
                      std::mt19937_64& rng);

}  // namespace aset
