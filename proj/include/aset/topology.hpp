#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aset/catalog.hpp"

namespace aset {

enum class Layer { kAccess, kCentralOffice, kIspDc, kCloud };

std::string_view to_string(Layer layer);
Layer layer_from_string(std::string_view name);

struct ClusterSpec {
  std::string id;
  Layer layer = Layer::kAccess;
  ResourceVector capacity;
  bool unlimited = false;
};

/// One-way network delay statistics between a scheduler site and a cluster.
struct PathStats {
  double mean_delay_ms = 0.0;
  double delay_std_ms = 0.0;
};

/// Decision point at the access layer. Sites without compute (dc-cloud) have
/// no co-located cluster.
struct SchedulerSite {
  std::string id;
  std::optional<std::size_t> colocated_cluster;
};

struct Topology {
  std::string name;
  std::vector<ClusterSpec> clusters;
  std::vector<SchedulerSite> sites;
  /// paths[site][cluster]
  std::vector<std::vector<PathStats>> paths;
  double access_delay_min_ms = 0.5;
  double access_delay_max_ms = 2.0;
  double uplink_rate = 50e6;  // bytes/s per stream

  /// Throws ValidationError on an incomplete path matrix, negative stats, an
  /// unlimited non-cloud cluster, or a co-located cluster that is not the
  /// nearest one in its site's row.
  void validate() const;

  /// Transmission time of one query of the given size, in ms.
  double transmission_delay_ms(double input_size) const {
    return input_size / uplink_rate * 1000.0;
  }
};

/// A variant replica running on a cluster.
struct Worker {
  std::size_t id = 0;
  std::size_t variant = 0;
  std::size_t cluster = 0;
  int replica_index = 0;
};

/// Per-layer knobs behind the named presets. Capacities are desk-scale
/// stand-ins, expressed per cluster.
struct PresetParams {
  ResourceVector access_capacity_min{{8, 16, 2}};
  ResourceVector access_capacity_max{{16, 16, 2}};
  ResourceVector central_office_capacity{{24, 96, 12}};
  ResourceVector isp_dc_capacity{{32, 128, 16}};
  int sites_per_central_office = 2;

  double own_access_mean_min_ms = 0.5, own_access_mean_max_ms = 1.5, own_access_std_ms = 0.2;
  double peer_access_mean_min_ms = 3.0, peer_access_mean_max_ms = 5.0, peer_access_std_ms = 0.5;
  double central_office_mean_min_ms = 8.0, central_office_mean_max_ms = 10.0;
  double central_office_std_ms = 1.0;
  double isp_dc_mean_min_ms = 10.0, isp_dc_mean_max_ms = 15.0, isp_dc_std_ms = 2.0;
  double cloud_mean_min_ms = 30.0, cloud_mean_max_ms = 50.0, cloud_std_ms = 5.0;

  double access_delay_min_ms = 0.5;
  double access_delay_max_ms = 2.0;
  double uplink_rate = 50e6;
};

inline constexpr int kCloudReplicaCap = 32;

/// Builds "dc-cloud", "co-dc-cloud" or "full-edge". `scale` is the number of
/// scheduler sites (access points). Deterministic in (name, scale, seed).
Topology build_preset(std::string_view name, int scale, std::uint64_t seed,
                      const PresetParams& params = {});

const std::vector<std::string>& preset_names();

/// Normal(mean, std) truncated at zero.
double sample_network_delay(const PathStats& path, std::mt19937_64& rng);

/// Pessimistic round trip 2 * (access + mean + 2 * std), in ms.
double pessimistic_rtt(const PathStats& path, double access_delay_ms);

/// Greedy round-robin over the catalog's variants on every cluster: add one
/// replica of each variant that still fits, until none fits. Unlimited
/// clusters receive `cloud_replica_cap` replicas per variant.
std::vector<Worker> deploy_workers(const Topology& topology, const Catalog& catalog,
                                   std::uint64_t seed, int cloud_replica_cap = kCloudReplicaCap);

/// Overrides the defaults with any keys present; unknown keys are errors.
PresetParams preset_params_from_json(const nlohmann::json& doc);
nlohmann::json preset_params_to_json(const PresetParams& params);

Topology load_topology(const nlohmann::json& doc);
nlohmann::json topology_to_json(const Topology& topology);

}  // namespace aset
