#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace aset {

/// Raised when a configuration document is structurally valid but violates
/// referential or numeric constraints. what() lists every violation found.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Resource amounts in a fixed order of kinds: CPU cores, system memory (GB),
/// accelerator memory (GB). Dimension is fixed per deployment.
class ResourceVector {
 public:
  static constexpr std::size_t kDefaultKinds = 3;

  ResourceVector() = default;
  explicit ResourceVector(std::vector<double> amounts);

  static ResourceVector zeros(std::size_t kinds = kDefaultKinds);

  std::size_t size() const { return amounts_.size(); }
  double operator[](std::size_t k) const { return amounts_[k]; }
  const std::vector<double>& amounts() const { return amounts_; }

  ResourceVector& operator+=(const ResourceVector& other);
  friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) {
    a += b;
    return a;
  }

  /// Component-wise this <= limit.
  bool fits_within(const ResourceVector& limit) const;
  bool is_zero() const;

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

 private:
  std::vector<double> amounts_;
};

struct TaskKind {
  std::string id;
  std::string description;
};

struct ModelSpec {
  std::string id;
  std::string task;
  double accuracy = 0.0;  // mAP points
};

struct VariantSpec {
  std::string id;
  std::string model;
  int batch_size = 1;
  ResourceVector resource_demand;
  double max_input_size = 0.0;  // bytes
  double base_delay_ms = 0.0;   // at max_input_size
  double base_capacity = 0.0;   // queries/s at max_input_size
  double delay_jitter_ms = 0.0;
};

/// Fraction of the full-size processing delay that does not scale with input.
inline constexpr double kDelayFloor = 0.2;

/// D_v(zeta): affine in input size, equal to base_delay at max_input_size.
/// Throws std::domain_error when input_size is outside (0, max_input_size].
double processing_delay(const VariantSpec& variant, double input_size);

/// C_v(zeta) = base_capacity * base_delay / D_v(zeta).
double effective_capacity(const VariantSpec& variant, double input_size);

/// eta = input_size / max_input_size, in (0, 1].
double fractional_load(const VariantSpec& variant, double input_size);

/// Immutable registry of tasks, models and variants with lookup indexes.
class Catalog {
 public:
  Catalog(std::vector<TaskKind> tasks, std::vector<ModelSpec> models,
          std::vector<VariantSpec> variants);

  const std::vector<TaskKind>& tasks() const { return tasks_; }
  const std::vector<ModelSpec>& models() const { return models_; }
  const std::vector<VariantSpec>& variants() const { return variants_; }

  std::size_t model_count() const { return models_.size(); }
  std::size_t resource_kinds() const { return resource_kinds_; }

  std::optional<std::size_t> find_task(const std::string& id) const;
  std::optional<std::size_t> find_model(const std::string& id) const;
  std::optional<std::size_t> find_variant(const std::string& id) const;

  const ModelSpec& model_of(std::size_t variant_index) const {
    return models_[variant_model_[variant_index]];
  }
  const std::string& task_of(std::size_t variant_index) const {
    return model_of(variant_index).task;
  }
  const std::vector<std::size_t>& models_for_task(const std::string& task) const;
  const std::vector<std::size_t>& variants_for_model(std::size_t model_index) const {
    return model_variants_[model_index];
  }

 private:
  std::vector<TaskKind> tasks_;
  std::vector<ModelSpec> models_;
  std::vector<VariantSpec> variants_;
  std::size_t resource_kinds_ = ResourceVector::kDefaultKinds;

  std::unordered_map<std::string, std::size_t> task_index_;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::unordered_map<std::string, std::size_t> variant_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> task_models_;
  std::vector<std::vector<std::size_t>> model_variants_;
  std::vector<std::size_t> variant_model_;
};

/// Builds a validated catalog from a document with tasks[], models[] and
/// variants[] arrays. Throws ValidationError listing every violation.
Catalog load_catalog(const nlohmann::json& doc);
Catalog load_catalog_file(const std::filesystem::path& path);

nlohmann::json catalog_to_json(const Catalog& catalog);

/// Synthetic object-detection catalog (MobileNet-SSD, Yolo-v3, Tinyyolo-v2
/// with CPU/GPU/TPU variants). Numbers are illustrative, not measured.
nlohmann::json default_catalog_json();
Catalog default_catalog();

}  // namespace aset
