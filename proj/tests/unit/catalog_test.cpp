#include "aset/catalog.hpp"

#include <gtest/gtest.h>

#include <random>

namespace aset {
namespace {

VariantSpec make_variant(double base_delay, double base_capacity, double max_size = 1000.0) {
  VariantSpec v;
  v.id = "v";
  v.model = "m";
  v.batch_size = 1;
  v.resource_demand = ResourceVector({1, 1, 0});
  v.max_input_size = max_size;
  v.base_delay_ms = base_delay;
  v.base_capacity = base_capacity;
  return v;
}

nlohmann::json small_catalog_doc() {
  return nlohmann::json::parse(R"({
    "tasks": [{"id": "det"}],
    "models": [{"id": "a", "task": "det", "accuracy": 20},
               {"id": "b", "task": "det", "accuracy": 40}],
    "variants": [
      {"id": "a-cpu", "model": "a", "batch_size": 1, "resource_demand": [2, 2, 0],
       "max_input_size": 1000, "base_delay_ms": 30, "base_capacity": 33},
      {"id": "a-gpu", "model": "a", "batch_size": 4, "resource_demand": [1, 2, 2],
       "max_input_size": 1000, "base_delay_ms": 10, "base_capacity": 100},
      {"id": "b-cpu", "model": "b", "batch_size": 1, "resource_demand": [4, 4, 0],
       "max_input_size": 1000, "base_delay_ms": 80, "base_capacity": 12}
    ]})");
}

TEST(ProcessingDelay, FullSizeEqualsBaseDelay) {
  EXPECT_DOUBLE_EQ(processing_delay(make_variant(30, 100), 1000.0), 30.0);
}

TEST(ProcessingDelay, HalfSizeUsesAffineFloor) {
  // 30 * (0.2 + 0.8 * 0.5)
  EXPECT_NEAR(processing_delay(make_variant(30, 100), 500.0), 18.0, 1e-12);
}

TEST(ProcessingDelay, RejectsOutOfRangeSizes) {
  const auto v = make_variant(30, 100);
  EXPECT_THROW(processing_delay(v, 2000.0), std::domain_error);
  EXPECT_THROW(processing_delay(v, 0.0), std::domain_error);
  EXPECT_THROW(processing_delay(v, -1.0), std::domain_error);
}

TEST(EffectiveCapacity, MatchesBaseAtFullSize) {
  EXPECT_DOUBLE_EQ(effective_capacity(make_variant(30, 100), 1000.0), 100.0);
}

TEST(EffectiveCapacity, HalfSize) {
  // 100 * 30 / 18
  EXPECT_NEAR(effective_capacity(make_variant(30, 100), 500.0), 166.66666666666666, 1e-9);
  EXPECT_THROW(effective_capacity(make_variant(30, 100), 0.0), std::domain_error);
}

TEST(FractionalLoad, IsSizeRatio) {
  const auto v = make_variant(30, 100);
  EXPECT_DOUBLE_EQ(fractional_load(v, 1000.0), 1.0);
  EXPECT_DOUBLE_EQ(fractional_load(v, 250.0), 0.25);
  EXPECT_THROW(fractional_load(v, 0.0), std::domain_error);
}

TEST(CatalogProperties, DelayMonotoneAndCapacityProductConstant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> delay(1.0, 500.0), cap(1.0, 400.0), frac(1e-6, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const auto v = make_variant(delay(rng), cap(rng), 200000.0);
    double a = frac(rng) * v.max_input_size, b = frac(rng) * v.max_input_size;
    if (a > b) std::swap(a, b);
    EXPECT_LE(processing_delay(v, a), processing_delay(v, b));
    const double product = effective_capacity(v, a) * processing_delay(v, a);
    EXPECT_NEAR(product, v.base_capacity * v.base_delay_ms,
                1e-9 * v.base_capacity * v.base_delay_ms);
    const double eta = fractional_load(v, a);
    EXPECT_GT(eta, 0.0);
    EXPECT_LE(eta, 1.0);
  }
}

TEST(ResourceVector, RejectsNegativeAndComparesComponentWise) {
  EXPECT_THROW(ResourceVector({1, -1, 0}), std::invalid_argument);
  const ResourceVector a({1, 2, 3});
  EXPECT_TRUE(a.fits_within(ResourceVector({1, 2, 3})));
  EXPECT_FALSE(a.fits_within(ResourceVector({1, 1.5, 3})));
  EXPECT_EQ(a + a, ResourceVector({2, 4, 6}));
  EXPECT_TRUE(ResourceVector::zeros().is_zero());
}

TEST(LoadCatalog, CountsModelsAndVariants) {
  auto doc = small_catalog_doc();
  doc["variants"].erase(2);
  doc["models"].erase(1);
  doc["models"].push_back({{"id", "b"}, {"task", "det"}, {"accuracy", 40}});
  doc["variants"].push_back(doc["variants"][0]);
  doc["variants"][2]["id"] = "b-any";
  doc["variants"][2]["model"] = "b";
  const Catalog c = load_catalog(doc);
  EXPECT_EQ(c.model_count(), 2u);
  EXPECT_EQ(c.variants().size(), 3u);
  EXPECT_EQ(c.models_for_task("det").size(), 2u);
  EXPECT_EQ(c.variants_for_model(*c.find_model("a")).size(), 2u);
  EXPECT_EQ(c.variants_for_model(*c.find_model("b")).size(), 1u);
  EXPECT_EQ(c.task_of(*c.find_variant("b-any")), "det");
}

TEST(LoadCatalog, ReportsEveryViolation) {
  auto doc = small_catalog_doc();
  doc["variants"][0]["model"] = "missing";
  doc["variants"][1]["base_delay_ms"] = 0;
  doc["models"][1]["task"] = "nope";
  try {
    load_catalog(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_GE(e.violations().size(), 3u);
    EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
  }
}

TEST(LoadCatalog, RoundTripsThroughJson) {
  const Catalog c = load_catalog(small_catalog_doc());
  const Catalog again = load_catalog(catalog_to_json(c));
  ASSERT_EQ(again.variants().size(), c.variants().size());
  for (std::size_t i = 0; i < c.variants().size(); ++i) {
    EXPECT_EQ(again.variants()[i].id, c.variants()[i].id);
    EXPECT_EQ(again.variants()[i].resource_demand, c.variants()[i].resource_demand);
    EXPECT_EQ(again.variants()[i].base_delay_ms, c.variants()[i].base_delay_ms);
  }
}

TEST(DefaultCatalog, HasThreeDetectorsAndSixOrMoreVariants) {
  const Catalog c = default_catalog();
  EXPECT_EQ(c.model_count(), 3u);
  EXPECT_GE(c.variants().size(), 6u);
  for (const char* id : {"mobilenet-ssd", "yolo-v3", "tinyyolo-v2"}) {
    EXPECT_TRUE(c.find_model(id).has_value()) << id;
  }
}

}  // namespace
}  // namespace aset
