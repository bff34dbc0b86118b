#include "aset/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aset {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ResourceVector uniform_capacity(std::mt19937_64& rng, const ResourceVector& lo,
                                const ResourceVector& hi) {
  std::vector<double> amounts(lo.size());
  for (std::size_t k = 0; k < lo.size(); ++k) {
    // Integral amounts (cores, GB).
    amounts[k] = std::floor(uniform(rng, lo[k], hi[k] + 1.0));
    amounts[k] = std::min(amounts[k], hi[k]);
  }
  return ResourceVector(std::move(amounts));
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::kAccess: return "access";
    case Layer::kCentralOffice: return "central_office";
    case Layer::kIspDc: return "isp_dc";
    case Layer::kCloud: return "cloud";
  }
  return "unknown";
}

Layer layer_from_string(std::string_view name) {
  if (name == "access") return Layer::kAccess;
  if (name == "central_office") return Layer::kCentralOffice;
  if (name == "isp_dc") return Layer::kIspDc;
  if (name == "cloud") return Layer::kCloud;
  throw std::invalid_argument("unknown layer '" + std::string(name) + "'");
}

void Topology::validate() const {
  std::vector<std::string> errors;
  for (const auto& c : clusters) {
    if (c.unlimited && c.layer != Layer::kCloud) {
      errors.push_back("cluster '" + c.id + "' is unlimited but not in the cloud layer");
    }
  }
  if (paths.size() != sites.size()) errors.push_back("path matrix needs one row per site");
  for (std::size_t s = 0; s < sites.size() && s < paths.size(); ++s) {
    if (paths[s].size() != clusters.size()) {
      errors.push_back("path row for site '" + sites[s].id + "' is incomplete");
      continue;
    }
    for (const auto& p : paths[s]) {
      if (!(p.mean_delay_ms >= 0.0) || !(p.delay_std_ms >= 0.0)) {
        errors.push_back("negative path statistics for site '" + sites[s].id + "'");
        break;
      }
    }
    if (const auto& own = sites[s].colocated_cluster) {
      if (*own >= clusters.size()) {
        errors.push_back("site '" + sites[s].id + "' references a missing cluster");
        continue;
      }
      const double own_delay = paths[s][*own].mean_delay_ms;
      for (const auto& p : paths[s]) {
        if (p.mean_delay_ms < own_delay) {
          errors.push_back("site '" + sites[s].id + "' is not nearest to its co-located cluster");
          break;
        }
      }
    }
  }
  if (!(uplink_rate > 0.0)) errors.push_back("uplink_rate must be positive");
  if (!(access_delay_min_ms >= 0.0) || access_delay_max_ms < access_delay_min_ms) {
    errors.push_back("access delay range is invalid");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {"dc-cloud", "co-dc-cloud", "full-edge"};
  return kNames;
}

Topology build_preset(std::string_view name, int scale, std::uint64_t seed,
                      const PresetParams& params) {
  const bool edge = name == "full-edge";
  const bool central_offices = edge || name == "co-dc-cloud";
  if (!edge && !central_offices && name != "dc-cloud") {
    throw std::invalid_argument("unknown topology preset '" + std::string(name) + "'");
  }
  if (scale < 1) throw std::invalid_argument("preset scale must be >= 1");

  std::mt19937_64 rng(seed);
  Topology topo;
  topo.name = std::string(name);
  topo.access_delay_min_ms = params.access_delay_min_ms;
  topo.access_delay_max_ms = params.access_delay_max_ms;
  topo.uplink_rate = params.uplink_rate;

  const int sites = scale;
  const int offices = (sites + params.sites_per_central_office - 1) / params.sites_per_central_office;

  // Cluster order: access, central offices, data center, cloud.
  if (edge) {
    for (int s = 0; s < sites; ++s) {
      topo.clusters.push_back({"access-" + std::to_string(s), Layer::kAccess,
                               uniform_capacity(rng, params.access_capacity_min,
                                                params.access_capacity_max),
                               false});
    }
  }
  const std::size_t first_office = topo.clusters.size();
  if (central_offices) {
    for (int o = 0; o < offices; ++o) {
      topo.clusters.push_back({"co-" + std::to_string(o), Layer::kCentralOffice,
                               params.central_office_capacity, false});
    }
  }
  topo.clusters.push_back({"isp-dc", Layer::kIspDc, params.isp_dc_capacity, false});
  topo.clusters.push_back(
      {"cloud", Layer::kCloud, ResourceVector::zeros(params.isp_dc_capacity.size()), true});

  // Per-office and per-site distances are drawn once so sites sharing an
  // office see consistent latencies.
  std::vector<double> office_delay(offices);
  for (auto& d : office_delay) {
    d = uniform(rng, params.central_office_mean_min_ms, params.central_office_mean_max_ms);
  }
  for (int s = 0; s < sites; ++s) {
    SchedulerSite site{"site-" + std::to_string(s), std::nullopt};
    if (edge) site.colocated_cluster = static_cast<std::size_t>(s);
    const int office = s / params.sites_per_central_office;

    std::vector<PathStats> row(topo.clusters.size());
    for (std::size_t c = 0; c < topo.clusters.size(); ++c) {
      const auto& cluster = topo.clusters[c];
      switch (cluster.layer) {
        case Layer::kAccess:
          if (c == static_cast<std::size_t>(s)) {
            row[c] = {uniform(rng, params.own_access_mean_min_ms, params.own_access_mean_max_ms),
                      params.own_access_std_ms};
          } else {
            row[c] = {uniform(rng, params.peer_access_mean_min_ms, params.peer_access_mean_max_ms),
                      params.peer_access_std_ms};
          }
          break;
        case Layer::kCentralOffice: {
          const int o = static_cast<int>(c - first_office);
          // Remote offices are reached through the data center.
          const double extra = o == office ? 0.0 : params.isp_dc_mean_min_ms;
          row[c] = {office_delay[o] + extra, params.central_office_std_ms};
          break;
        }
        case Layer::kIspDc:
          row[c] = {uniform(rng, params.isp_dc_mean_min_ms, params.isp_dc_mean_max_ms),
                    params.isp_dc_std_ms};
          break;
        case Layer::kCloud:
          row[c] = {uniform(rng, params.cloud_mean_min_ms, params.cloud_mean_max_ms),
                    params.cloud_std_ms};
          break;
      }
    }
    topo.paths.push_back(std::move(row));
    topo.sites.push_back(std::move(site));
  }
  topo.validate();
  return topo;
}

double sample_network_delay(const PathStats& path, std::mt19937_64& rng) {
  if (path.delay_std_ms <= 0.0) return std::max(0.0, path.mean_delay_ms);
  std::normal_distribution<double> dist(path.mean_delay_ms, path.delay_std_ms);
  // Rejection keeps the draw on [0, inf); the retry cap only matters for
  // paths whose mean sits far below zero, which validation forbids.
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double d = dist(rng);
    if (d >= 0.0) return d;
  }
  return 0.0;
}

double pessimistic_rtt(const PathStats& path, double access_delay_ms) {
  return 2.0 * (access_delay_ms + path.mean_delay_ms + 2.0 * path.delay_std_ms);
}

std::vector<Worker> deploy_workers(const Topology& topology, const Catalog& catalog,
                                   std::uint64_t /*seed*/, int cloud_replica_cap) {
  if (catalog.variants().empty()) throw std::invalid_argument("catalog has no variants");
  std::vector<Worker> workers;
  const auto& variants = catalog.variants();
  for (std::size_t c = 0; c < topology.clusters.size(); ++c) {
    const auto& cluster = topology.clusters[c];
    std::vector<int> replicas(variants.size(), 0);
    if (cluster.unlimited) {
      for (std::size_t v = 0; v < variants.size(); ++v) {
        for (int r = 0; r < cloud_replica_cap; ++r) {
          workers.push_back({workers.size(), v, c, r});
        }
      }
      continue;
    }
    ResourceVector used = ResourceVector::zeros(cluster.capacity.size());
    bool placed = true;
    while (placed) {
      placed = false;
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const auto& demand = variants[v].resource_demand;
        if (demand.is_zero()) continue;  // would never saturate
        if (!(used + demand).fits_within(cluster.capacity)) continue;
        used += demand;
        workers.push_back({workers.size(), v, c, replicas[v]++});
        placed = true;
      }
    }
  }
  return workers;
}

Topology load_topology(const nlohmann::json& doc) {
  Topology topo;
  try {
    topo.name = doc.value("name", std::string("custom"));
    for (const auto& c : doc.at("clusters")) {
      ClusterSpec spec;
      spec.id = c.at("id").get<std::string>();
      spec.layer = layer_from_string(c.at("layer").get<std::string>());
      spec.unlimited = c.value("unlimited", false);
      spec.capacity = ResourceVector(
          c.value("capacity", std::vector<double>(ResourceVector::kDefaultKinds, 0.0)));
      topo.clusters.push_back(std::move(spec));
    }
    for (const auto& s : doc.at("sites")) {
      SchedulerSite site{s.at("id").get<std::string>(), std::nullopt};
      if (s.contains("colocated_cluster") && !s.at("colocated_cluster").is_null()) {
        site.colocated_cluster = s.at("colocated_cluster").get<std::size_t>();
      }
      topo.sites.push_back(std::move(site));
    }
    for (const auto& row : doc.at("paths")) {
      std::vector<PathStats> stats;
      for (const auto& p : row) stats.push_back({p.at("mean").get<double>(), p.at("std").get<double>()});
      topo.paths.push_back(std::move(stats));
    }
    topo.uplink_rate = doc.at("uplink_rate").get<double>();
    if (doc.contains("access_delay_range")) {
      auto range = doc.at("access_delay_range").get<std::vector<double>>();
      if (range.size() != 2) throw ValidationError({"access_delay_range needs [min, max]"});
      topo.access_delay_min_ms = range[0];
      topo.access_delay_max_ms = range[1];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("malformed topology document: ") + e.what()});
  } catch (const std::invalid_argument& e) {
    throw ValidationError({e.what()});
  }
  topo.validate();
  return topo;
}

nlohmann::json topology_to_json(const Topology& topology) {
  nlohmann::json doc;
  doc["name"] = topology.name;
  doc["clusters"] = nlohmann::json::array();
  for (const auto& c : topology.clusters) {
    doc["clusters"].push_back({{"id", c.id},
                               {"layer", std::string(to_string(c.layer))},
                               {"capacity", c.capacity.amounts()},
                               {"unlimited", c.unlimited}});
  }
  doc["sites"] = nlohmann::json::array();
  for (const auto& s : topology.sites) {
    nlohmann::json site{{"id", s.id}};
    site["colocated_cluster"] =
        s.colocated_cluster ? nlohmann::json(*s.colocated_cluster) : nlohmann::json(nullptr);
    doc["sites"].push_back(std::move(site));
  }
  doc["paths"] = nlohmann::json::array();
  for (const auto& row : topology.paths) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& p : row) r.push_back({{"mean", p.mean_delay_ms}, {"std", p.delay_std_ms}});
    doc["paths"].push_back(std::move(r));
  }
  doc["uplink_rate"] = topology.uplink_rate;
  doc["access_delay_range"] = {topology.access_delay_min_ms, topology.access_delay_max_ms};
  return doc;
}

namespace {

struct ParamRefs {
  std::vector<std::pair<const char*, ResourceVector*>> vectors;
  std::vector<std::pair<const char*, double*>> numbers;
};

ParamRefs param_refs(PresetParams& p) {
  return {{{"access_capacity_min", &p.access_capacity_min},
           {"access_capacity_max", &p.access_capacity_max},
           {"central_office_capacity", &p.central_office_capacity},
           {"isp_dc_capacity", &p.isp_dc_capacity}},
          {{"own_access_mean_min_ms", &p.own_access_mean_min_ms},
           {"own_access_mean_max_ms", &p.own_access_mean_max_ms},
           {"own_access_std_ms", &p.own_access_std_ms},
           {"peer_access_mean_min_ms", &p.peer_access_mean_min_ms},
           {"peer_access_mean_max_ms", &p.peer_access_mean_max_ms},
           {"peer_access_std_ms", &p.peer_access_std_ms},
           {"central_office_mean_min_ms", &p.central_office_mean_min_ms},
           {"central_office_mean_max_ms", &p.central_office_mean_max_ms},
           {"central_office_std_ms", &p.central_office_std_ms},
           {"isp_dc_mean_min_ms", &p.isp_dc_mean_min_ms},
           {"isp_dc_mean_max_ms", &p.isp_dc_mean_max_ms},
           {"isp_dc_std_ms", &p.isp_dc_std_ms},
           {"cloud_mean_min_ms", &p.cloud_mean_min_ms},
           {"cloud_mean_max_ms", &p.cloud_mean_max_ms},
           {"cloud_std_ms", &p.cloud_std_ms},
           {"access_delay_min_ms", &p.access_delay_min_ms},
           {"access_delay_max_ms", &p.access_delay_max_ms},
           {"uplink_rate", &p.uplink_rate}}};
}

}  // namespace

PresetParams preset_params_from_json(const nlohmann::json& doc) {
  PresetParams params;
  if (doc.is_null()) return params;
  if (!doc.is_object()) throw ValidationError({"preset parameters must be an object"});
  auto refs = param_refs(params);
  std::vector<std::string> errors;
  try {
    for (const auto& [key, value] : doc.items()) {
      bool known = false;
      for (auto& [name, target] : refs.vectors) {
        if (key == name) {
          *target = ResourceVector(value.get<std::vector<double>>());
          known = true;
        }
      }
      for (auto& [name, target] : refs.numbers) {
        if (key == name) {
          *target = value.get<double>();
          known = true;
        }
      }
      if (key == "sites_per_central_office") {
        params.sites_per_central_office = value.get<int>();
        known = true;
      }
      if (!known) errors.push_back("unknown preset parameter '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    errors.push_back(std::string("malformed preset parameters: ") + e.what());
  } catch (const std::invalid_argument& e) {
    errors.push_back(e.what());
  }
  if (params.sites_per_central_office < 1) errors.push_back("sites_per_central_office must be >= 1");
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return params;
}

nlohmann::json preset_params_to_json(const PresetParams& params) {
  PresetParams copy = params;
  auto refs = param_refs(copy);
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, target] : refs.vectors) doc[name] = target->amounts();
  for (const auto& [name, target] : refs.numbers) doc[name] = *target;
  doc["sites_per_central_office"] = params.sites_per_central_office;
  return doc;
}

}  // namespace aset
