#include "aset/topology.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

namespace aset {
namespace {

Catalog single_variant_catalog(const ResourceVector& demand) {
  VariantSpec v;
  v.id = "only";
  v.model = "m";
  v.resource_demand = demand;
  v.max_input_size = 1000;
  v.base_delay_ms = 10;
  v.base_capacity = 10;
  return Catalog({{"det", ""}}, {{"m", "det", 30}}, {v});
}

Topology one_cluster(const ResourceVector& capacity) {
  Topology t;
  t.name = "one";
  t.clusters.push_back({"c0", Layer::kIspDc, capacity, false});
  t.sites.push_back({"s0", std::nullopt});
  t.paths = {{{5.0, 1.0}}};
  return t;
}

TEST(BuildPreset, DcCloudHasNoEdgeCompute) {
  const auto t = build_preset("dc-cloud", 1, 3);
  for (const auto& c : t.clusters) {
    EXPECT_TRUE(c.layer == Layer::kIspDc || c.layer == Layer::kCloud);
  }
  ASSERT_EQ(t.sites.size(), 1u);
  EXPECT_FALSE(t.sites[0].colocated_cluster.has_value());
}

TEST(BuildPreset, CoDcCloudAddsCentralOffices) {
  const auto t = build_preset("co-dc-cloud", 3, 3);
  const auto offices = std::count_if(t.clusters.begin(), t.clusters.end(), [](const auto& c) {
    return c.layer == Layer::kCentralOffice;
  });
  EXPECT_EQ(offices, 2);
  for (const auto& c : t.clusters) EXPECT_NE(c.layer, Layer::kAccess);
}

TEST(BuildPreset, FullEdgeColocatesEverySite) {
  for (int scale : {1, 2, 4}) {
    const auto t = build_preset("full-edge", scale, 11);
    ASSERT_EQ(t.sites.size(), static_cast<std::size_t>(scale));
    std::map<Layer, int> layers;
    for (const auto& c : t.clusters) layers[c.layer]++;
    EXPECT_EQ(layers.size(), 4u);
    for (std::size_t s = 0; s < t.sites.size(); ++s) {
      ASSERT_TRUE(t.sites[s].colocated_cluster.has_value());
      const auto own = *t.sites[s].colocated_cluster;
      EXPECT_EQ(t.clusters[own].layer, Layer::kAccess);
      for (const auto& p : t.paths[s]) EXPECT_LE(t.paths[s][own].mean_delay_ms, p.mean_delay_ms);
    }
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(BuildPreset, LatenciesFollowLayerOrder) {
  const auto t = build_preset("full-edge", 2, 5);
  for (std::size_t s = 0; s < t.sites.size(); ++s) {
    for (std::size_t c = 0; c < t.clusters.size(); ++c) {
      const double d = t.paths[s][c].mean_delay_ms;
      switch (t.clusters[c].layer) {
        case Layer::kAccess: EXPECT_LE(d, 5.0); break;
        case Layer::kCentralOffice: EXPECT_GE(d, 8.0); break;
        case Layer::kIspDc: EXPECT_GE(d, 10.0); EXPECT_LE(d, 15.0); break;
        case Layer::kCloud: EXPECT_GE(d, 30.0); EXPECT_LE(d, 50.0); break;
      }
    }
  }
}

TEST(BuildPreset, UnknownNameThrows) {
  EXPECT_THROW(build_preset("mesh-42", 1, 0), std::invalid_argument);
  EXPECT_THROW(build_preset("full-edge", 0, 0), std::invalid_argument);
}

TEST(BuildPreset, DeterministicInSeed) {
  const auto a = topology_to_json(build_preset("full-edge", 3, 42));
  const auto b = topology_to_json(build_preset("full-edge", 3, 42));
  const auto c = topology_to_json(build_preset("full-edge", 3, 43));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(NetworkDelay, DegenerateAndZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_network_delay({10.0, 0.0}, rng), 10.0);
    EXPECT_EQ(sample_network_delay({0.0, 0.0}, rng), 0.0);
  }
}

TEST(NetworkDelay, SampleMeanAndNonnegativity) {
  std::mt19937_64 rng(2);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = sample_network_delay({10.0, 2.0}, rng);
    ASSERT_GE(d, 0.0);
    sum += d;
  }
  EXPECT_NEAR(sum / n, 10.0, 0.1);
  for (int i = 0; i < 10000; ++i) ASSERT_GE(sample_network_delay({0.5, 2.0}, rng), 0.0);
}

TEST(PessimisticRtt, Examples) {
  EXPECT_DOUBLE_EQ(pessimistic_rtt({5.0, 1.0}, 2.0), 18.0);
  EXPECT_DOUBLE_EQ(pessimistic_rtt({0.0, 0.0}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(pessimistic_rtt({10.0, 0.0}, 0.0), 20.0);
}

TEST(DeployWorkers, ExactFitGivesOneReplica) {
  const ResourceVector demand({2, 4, 1});
  const auto workers =
      deploy_workers(one_cluster(demand), single_variant_catalog(demand), 0);
  EXPECT_EQ(workers.size(), 1u);
}

TEST(DeployWorkers, FloorOfCapacityRatio) {
  const ResourceVector demand({2, 4, 1});
  const auto workers =
      deploy_workers(one_cluster(ResourceVector({5, 10, 2.5})), single_variant_catalog(demand), 0);
  EXPECT_EQ(workers.size(), 2u);
}

TEST(DeployWorkers, ZeroCapacityGetsNothing) {
  const auto workers = deploy_workers(one_cluster(ResourceVector::zeros()),
                                      single_variant_catalog(ResourceVector({1, 1, 0})), 0);
  EXPECT_TRUE(workers.empty());
}

TEST(DeployWorkers, PresetsRespectCapacitiesAndCloudCap) {
  const Catalog catalog = default_catalog();
  for (const auto& name : preset_names()) {
    const auto t = build_preset(name, 3, 9);
    const auto workers = deploy_workers(t, catalog, 9);
    std::vector<ResourceVector> used(t.clusters.size(),
                                     ResourceVector::zeros(catalog.resource_kinds()));
    std::map<std::pair<std::size_t, std::size_t>, int> cloud_count;
    for (const auto& w : workers) {
      used[w.cluster] += catalog.variants()[w.variant].resource_demand;
      if (t.clusters[w.cluster].unlimited) cloud_count[{w.cluster, w.variant}]++;
    }
    for (std::size_t c = 0; c < t.clusters.size(); ++c) {
      if (!t.clusters[c].unlimited) EXPECT_TRUE(used[c].fits_within(t.clusters[c].capacity)) << name;
    }
    for (const auto& [key, n] : cloud_count) EXPECT_EQ(n, kCloudReplicaCap);
    for (std::size_t i = 0; i < workers.size(); ++i) EXPECT_EQ(workers[i].id, i);
  }
}

TEST(TopologyJson, RoundTrip) {
  const auto t = build_preset("co-dc-cloud", 2, 4);
  const auto again = load_topology(topology_to_json(t));
  EXPECT_EQ(topology_to_json(again), topology_to_json(t));
}

TEST(TopologyValidate, RejectsIncompletePaths) {
  auto t = build_preset("dc-cloud", 2, 1);
  t.paths[1].pop_back();
  EXPECT_THROW(t.validate(), ValidationError);
}

}  // namespace
}  // namespace aset
