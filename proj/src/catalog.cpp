#include "aset/catalog.hpp"

#include <fstream>
#include <sstream>

namespace aset {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::ostringstream out;
  out << violations.size() << " validation error(s)";
  for (const auto& v : violations) out << "\n  - " << v;
  return out.str();
}

void check_input_size(const VariantSpec& variant, double input_size) {
  if (!(input_size > 0.0) || input_size > variant.max_input_size) {
    std::ostringstream msg;
    msg << "input size " << input_size << " outside (0, " << variant.max_input_size
        << "] for variant " << variant.id;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

ResourceVector::ResourceVector(std::vector<double> amounts) : amounts_(std::move(amounts)) {
  for (double a : amounts_) {
    if (!(a >= 0.0)) throw std::invalid_argument("resource amounts must be nonnegative");
  }
}

ResourceVector ResourceVector::zeros(std::size_t kinds) {
  return ResourceVector(std::vector<double>(kinds, 0.0));
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  if (amounts_.empty()) amounts_.assign(other.size(), 0.0);
  if (other.size() != size()) throw std::invalid_argument("resource dimension mismatch");
  for (std::size_t k = 0; k < size(); ++k) amounts_[k] += other.amounts_[k];
  return *this;
}

bool ResourceVector::fits_within(const ResourceVector& limit) const {
  if (limit.size() != size()) throw std::invalid_argument("resource dimension mismatch");
  for (std::size_t k = 0; k < size(); ++k) {
    // Tolerate accumulated rounding from repeated additions.
    if (amounts_[k] > limit.amounts_[k] + 1e-9) return false;
  }
  return true;
}

bool ResourceVector::is_zero() const {
  for (double a : amounts_) {
    if (a != 0.0) return false;
  }
  return true;
}

double processing_delay(const VariantSpec& variant, double input_size) {
  check_input_size(variant, input_size);
  const double ratio = input_size / variant.max_input_size;
  return variant.base_delay_ms * (kDelayFloor + (1.0 - kDelayFloor) * ratio);
}

double effective_capacity(const VariantSpec& variant, double input_size) {
  return variant.base_capacity * variant.base_delay_ms / processing_delay(variant, input_size);
}

double fractional_load(const VariantSpec& variant, double input_size) {
  check_input_size(variant, input_size);
  return input_size / variant.max_input_size;
}

Catalog::Catalog(std::vector<TaskKind> tasks, std::vector<ModelSpec> models,
                 std::vector<VariantSpec> variants)
    : tasks_(std::move(tasks)), models_(std::move(models)), variants_(std::move(variants)) {
  std::vector<std::string> errors;

  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!task_index_.emplace(tasks_[i].id, i).second) {
      errors.push_back("duplicate task id '" + tasks_[i].id + "'");
    }
  }
  model_variants_.resize(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const auto& m = models_[i];
    if (!model_index_.emplace(m.id, i).second) {
      errors.push_back("duplicate model id '" + m.id + "'");
    }
    if (!task_index_.contains(m.task)) {
      errors.push_back("model '" + m.id + "' references unknown task '" + m.task + "'");
    }
    if (!(m.accuracy >= 0.0)) errors.push_back("model '" + m.id + "' has negative accuracy");
    task_models_[m.task].push_back(i);
  }

  if (!variants_.empty()) resource_kinds_ = variants_.front().resource_demand.size();
  variant_model_.resize(variants_.size(), 0);
  for (std::size_t i = 0; i < variants_.size(); ++i) {
    const auto& v = variants_[i];
    const std::string where = "variant '" + v.id + "'";
    if (!variant_index_.emplace(v.id, i).second) errors.push_back("duplicate " + where);
    auto model = model_index_.find(v.model);
    if (model == model_index_.end()) {
      errors.push_back(where + " references unknown model '" + v.model + "'");
    } else {
      variant_model_[i] = model->second;
      model_variants_[model->second].push_back(i);
    }
    if (!(v.base_delay_ms > 0.0)) errors.push_back(where + " needs base_delay_ms > 0");
    if (!(v.base_capacity > 0.0)) errors.push_back(where + " needs base_capacity > 0");
    if (v.batch_size < 1) errors.push_back(where + " needs batch_size >= 1");
    if (!(v.max_input_size > 0.0)) errors.push_back(where + " needs max_input_size > 0");
    if (!(v.delay_jitter_ms >= 0.0)) errors.push_back(where + " needs delay_jitter_ms >= 0");
    if (v.resource_demand.size() != resource_kinds_) {
      errors.push_back(where + " has resource dimension " +
                       std::to_string(v.resource_demand.size()) + ", expected " +
                       std::to_string(resource_kinds_));
    }
  }

  if (!errors.empty()) throw ValidationError(std::move(errors));
}

std::optional<std::size_t> Catalog::find_task(const std::string& id) const {
  auto it = task_index_.find(id);
  if (it == task_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Catalog::find_model(const std::string& id) const {
  auto it = model_index_.find(id);
  if (it == model_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Catalog::find_variant(const std::string& id) const {
  auto it = variant_index_.find(id);
  if (it == variant_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& Catalog::models_for_task(const std::string& task) const {
  static const std::vector<std::size_t> kNone;
  auto it = task_models_.find(task);
  return it == task_models_.end() ? kNone : it->second;
}

Catalog load_catalog(const nlohmann::json& doc) {
  std::vector<std::string> errors;
  auto section = [&](const char* name) -> const nlohmann::json* {
    if (!doc.is_object() || !doc.contains(name) || !doc.at(name).is_array()) {
      errors.push_back(std::string("missing array '") + name + "'");
      return nullptr;
    }
    return &doc.at(name);
  };

  std::vector<TaskKind> tasks;
  std::vector<ModelSpec> models;
  std::vector<VariantSpec> variants;
  try {
    if (const auto* arr = section("tasks")) {
      for (const auto& t : *arr) {
        tasks.push_back({t.at("id").get<std::string>(), t.value("description", std::string{})});
      }
    }
    if (const auto* arr = section("models")) {
      for (const auto& m : *arr) {
        models.push_back({m.at("id").get<std::string>(), m.at("task").get<std::string>(),
                          m.at("accuracy").get<double>()});
      }
    }
    if (const auto* arr = section("variants")) {
      for (const auto& v : *arr) {
        VariantSpec spec;
        spec.id = v.at("id").get<std::string>();
        spec.model = v.at("model").get<std::string>();
        spec.batch_size = v.value("batch_size", 1);
        auto demand = v.at("resource_demand").get<std::vector<double>>();
        bool negative = false;
        for (double d : demand) negative = negative || !(d >= 0.0);
        if (negative) {
          errors.push_back("variant '" + spec.id + "' has negative resource demand");
          demand.assign(demand.size(), 0.0);
        }
        spec.resource_demand = ResourceVector(std::move(demand));
        spec.max_input_size = v.at("max_input_size").get<double>();
        spec.base_delay_ms = v.at("base_delay_ms").get<double>();
        spec.base_capacity = v.at("base_capacity").get<double>();
        spec.delay_jitter_ms = v.value("delay_jitter_ms", 0.0);
        variants.push_back(std::move(spec));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    errors.push_back(std::string("malformed catalog entry: ") + e.what());
  }

  if (!errors.empty()) {
    // Collect structural and semantic violations together where possible.
    try {
      Catalog(std::move(tasks), std::move(models), std::move(variants));
    } catch (const ValidationError& e) {
      errors.insert(errors.end(), e.violations().begin(), e.violations().end());
    }
    throw ValidationError(std::move(errors));
  }
  return Catalog(std::move(tasks), std::move(models), std::move(variants));
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open catalog file '" + path.string() + "'"});
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({"cannot parse catalog file '" + path.string() + "': " + e.what()});
  }
  return load_catalog(doc);
}

nlohmann::json catalog_to_json(const Catalog& catalog) {
  nlohmann::json doc;
  doc["tasks"] = nlohmann::json::array();
  for (const auto& t : catalog.tasks()) {
    doc["tasks"].push_back({{"id", t.id}, {"description", t.description}});
  }
  doc["models"] = nlohmann::json::array();
  for (const auto& m : catalog.models()) {
    doc["models"].push_back({{"id", m.id}, {"task", m.task}, {"accuracy", m.accuracy}});
  }
  doc["variants"] = nlohmann::json::array();
  for (const auto& v : catalog.variants()) {
    doc["variants"].push_back({{"id", v.id},
                               {"model", v.model},
                               {"batch_size", v.batch_size},
                               {"resource_demand", v.resource_demand.amounts()},
                               {"max_input_size", v.max_input_size},
                               {"base_delay_ms", v.base_delay_ms},
                               {"base_capacity", v.base_capacity},
                               {"delay_jitter_ms", v.delay_jitter_ms}});
  }
  return doc;
}

nlohmann::json default_catalog_json() {
  // Synthetic profiles: resource demand is {cores, memory GB, accelerator GB}.
  // Capacities follow batch_size / base_delay.
  return nlohmann::json::parse(R"({
    "tasks": [
      {"id": "object-detection", "description": "bounding boxes on video frames"}
    ],
    "models": [
      {"id": "tinyyolo-v2",   "task": "object-detection", "accuracy": 23.7},
      {"id": "mobilenet-ssd", "task": "object-detection", "accuracy": 41.0},
      {"id": "yolo-v3",       "task": "object-detection", "accuracy": 55.3}
    ],
    "variants": [
      {"id": "tinyyolo-v2-cpu", "model": "tinyyolo-v2", "batch_size": 1,
       "resource_demand": [2, 2, 0], "max_input_size": 200000,
       "base_delay_ms": 35, "base_capacity": 28.57, "delay_jitter_ms": 3},
      {"id": "tinyyolo-v2-gpu", "model": "tinyyolo-v2", "batch_size": 8,
       "resource_demand": [2, 4, 2], "max_input_size": 200000,
       "base_delay_ms": 24, "base_capacity": 333.3, "delay_jitter_ms": 2},
      {"id": "mobilenet-ssd-cpu", "model": "mobilenet-ssd", "batch_size": 1,
       "resource_demand": [2, 2, 0], "max_input_size": 200000,
       "base_delay_ms": 30, "base_capacity": 33.33, "delay_jitter_ms": 3},
      {"id": "mobilenet-ssd-tpu", "model": "mobilenet-ssd", "batch_size": 1,
       "resource_demand": [1, 1, 1], "max_input_size": 200000,
       "base_delay_ms": 12, "base_capacity": 83.33, "delay_jitter_ms": 1},
      {"id": "mobilenet-ssd-gpu", "model": "mobilenet-ssd", "batch_size": 8,
       "resource_demand": [2, 4, 2], "max_input_size": 200000,
       "base_delay_ms": 28, "base_capacity": 285.7, "delay_jitter_ms": 2},
      {"id": "yolo-v3-cpu", "model": "yolo-v3", "batch_size": 1,
       "resource_demand": [4, 4, 0], "max_input_size": 200000,
       "base_delay_ms": 220, "base_capacity": 4.545, "delay_jitter_ms": 15},
      {"id": "yolo-v3-gpu", "model": "yolo-v3", "batch_size": 4,
       "resource_demand": [2, 6, 4], "max_input_size": 200000,
       "base_delay_ms": 45, "base_capacity": 88.89, "delay_jitter_ms": 3}
    ]
  })");
}

Catalog default_catalog() { return load_catalog(default_catalog_json()); }

}  // namespace aset
