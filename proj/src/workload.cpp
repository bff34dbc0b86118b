#include "aset/workload.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "aset/catalog.hpp"

namespace aset {

namespace {

constexpr double kKB = 1000.0;
constexpr double kMinute = 60.0;

double mid(const Range& r) { return 0.5 * (r.lo + r.hi); }

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.hi <= r.lo) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

const std::vector<AppProfile>& app_table() {
  static const Range kFrames{30 * kKB, 200 * kKB};
  static const std::vector<AppProfile> kApps = {
      {"Pool", {95, 95}, {5, 5}, {5, 10}, 10, kFrames},
      {"Workout Assistant", {300, 300}, {2, 2}, {90, 90}, 10, kFrames},
      {"Ping-pong", {150, 150}, {15, 20}, {20, 40}, 15, kFrames},
      {"Face Assistant", {370, 370}, {5, 5}, {1, 5}, 30, kFrames},
      {"Lego/Draw/Sandwich", {600, 600}, {10, 15}, {60, 60}, 25, kFrames},
      {"Gaming", {20, 30}, {25, 25}, {10 * kMinute, 30 * kMinute}, 35, kFrames},
      {"Connected Cars", {150, 150}, {10, 15}, {15 * kMinute, 30 * kMinute}, 40, kFrames},
      {"Tele-Robots", {25, 35}, {10, 10}, {5 * kMinute, 5 * kMinute}, 40, kFrames},
      {"Remote-driving", {20, 30}, {20, 20}, {15 * kMinute, 30 * kMinute}, 50, kFrames},
      {"Interactive AR/VR", {30, 50}, {25, 25}, {30, 60}, 35, kFrames},
  };
  return kApps;
}

std::optional<std::size_t> find_app(std::string_view name) {
  const auto& apps = app_table();
  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (apps[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t query_count(double duration_s, double rate) {
  if (!(duration_s > 0.0) || !(rate > 0.0)) return 0;
  // k / rate < duration  <=>  k < duration * rate; the epsilon absorbs
  // representation error when the product is integral.
  const double product = duration_s * rate;
  return static_cast<std::size_t>(std::ceil(product - 1e-9 * std::max(1.0, product)));
}

std::size_t queries_between(const Stream& stream, double from, double until) {
  const double start = stream.arrival_time_s;
  const double end = stream.end_time_s();
  const double lo = std::max(from, start);
  const double hi = std::min(until, end);
  if (!(hi > lo)) return 0;
  return query_count(hi - start, stream.rate) - query_count(lo - start, stream.rate);
}

LambdaSchedule::LambdaSchedule(double constant_lambda) : steps_{{0.0, constant_lambda}} {
  if (!(constant_lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

LambdaSchedule::LambdaSchedule(std::vector<LambdaStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty() || steps_.front().start_s != 0.0) {
    throw std::invalid_argument("lambda schedule must start at t = 0");
  }
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (!(steps_[i].lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    if (i > 0 && !(steps_[i].start_s > steps_[i - 1].start_s)) {
      throw std::invalid_argument("lambda schedule times must increase");
    }
  }
}

double LambdaSchedule::at(double t) const {
  double lambda = steps_.front().lambda;
  for (const auto& step : steps_) {
    if (step.start_s > t) break;
    lambda = step.lambda;
  }
  return lambda;
}

std::vector<double> WorkloadConfig::default_app_mix() {
  std::vector<double> weights;
  for (const auto& app : app_table()) {
    weights.push_back(1.0 / std::sqrt(mid(app.duration_s) * mid(app.frame_rate)));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& w : weights) w /= total;
  return weights;
}

std::vector<double> WorkloadConfig::uniform_app_mix() {
  return std::vector<double>(app_table().size(), 1.0 / static_cast<double>(app_table().size()));
}

void validate(const WorkloadConfig& config) {
  if (config.app_mix.size() != app_table().size()) {
    throw ValidationError({"app_mix needs one weight per application"});
  }
  double total = 0.0;
  for (double w : config.app_mix) {
    if (!(w >= 0.0)) throw ValidationError({"app_mix weights must be nonnegative"});
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError({"app_mix weights must not all be zero"});
  bool any_positive = false;
  for (const auto& step : config.lambda.steps()) any_positive = any_positive || step.lambda > 0.0;
  if (!any_positive) throw ValidationError({"lambda must be positive somewhere"});
}

ClientGenerator::ClientGenerator(WorkloadConfig config, std::size_t site,
                                 double access_delay_min_ms, double access_delay_max_ms,
                                 std::uint64_t seed)
    : config_(std::move(config)),
      site_(site),
      access_min_(access_delay_min_ms),
      access_max_(access_delay_max_ms),
      rng_(seed),
      app_dist_(config_.app_mix.begin(), config_.app_mix.end()) {
  validate(config_);
}

double ClientGenerator::next_arrival(double now) {
  // Unit-rate exponential mass spent across the schedule's constant pieces.
  double mass = std::exponential_distribution<double>(1.0)(rng_);
  const auto& steps = config_.lambda.steps();
  double t = now;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double piece_end =
        i + 1 < steps.size() ? steps[i + 1].start_s : std::numeric_limits<double>::infinity();
    if (piece_end <= t) continue;
    const double rate = steps[i].lambda / kMinute;  // clients per second
    if (rate > 0.0) {
      const double needed = mass / rate;
      if (t + needed <= piece_end) return t + needed;
      mass -= (piece_end - t) * rate;
    }
    t = piece_end;
  }
  return std::numeric_limits<double>::infinity();
}

Stream ClientGenerator::spawn_stream(double now, std::size_t stream_id) {
  const std::size_t app_index = app_dist_(rng_);
  const auto& app = app_table()[app_index];
  Stream s;
  s.id = stream_id;
  s.app = app_index;
  s.site = site_;
  s.task = app.task;
  s.arrival_time_s = now;
  s.rate = draw(rng_, app.frame_rate);
  s.input_size = draw(rng_, app.frame_size);
  s.tolerated_delay_ms = draw(rng_, app.tolerated_delay_ms);
  s.required_accuracy = app.required_accuracy;
  s.duration_s = draw(rng_, app.duration_s);
  s.access_delay_ms = draw(rng_, Range{access_min_, access_max_});
  return s;
}

WorkloadConfig load_workload(const nlohmann::json& doc) {
  WorkloadConfig config;
  try {
    if (doc.contains("lambda_schedule")) {
      std::vector<LambdaStep> steps;
      for (const auto& step : doc.at("lambda_schedule")) {
        steps.push_back({step.at(0).get<double>(), step.at(1).get<double>()});
      }
      config.lambda = LambdaSchedule(std::move(steps));
    } else if (doc.contains("lambda")) {
      config.lambda = LambdaSchedule(doc.at("lambda").get<double>());
    }
    if (doc.contains("app_mix")) {
      const auto& mix = doc.at("app_mix");
      if (mix.is_string() && mix.get<std::string>() == "uniform") {
        config.app_mix = WorkloadConfig::uniform_app_mix();
      } else if (mix.is_string() && mix.get<std::string>() == "default") {
        config.app_mix = WorkloadConfig::default_app_mix();
      } else {
        config.app_mix.assign(app_table().size(), 0.0);
        std::vector<std::string> errors;
        for (const auto& [name, weight] : mix.items()) {
          auto app = find_app(name);
          if (!app) {
            errors.push_back("app_mix names unknown application '" + name + "'");
            continue;
          }
          config.app_mix[*app] = weight.get<double>();
        }
        if (!errors.empty()) throw ValidationError(std::move(errors));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("malformed workload document: ") + e.what()});
  } catch (const std::invalid_argument& e) {
    throw ValidationError({e.what()});
  }
  validate(config);
  return config;
}

nlohmann::json workload_to_json(const WorkloadConfig& config) {
  nlohmann::json doc;
  doc["lambda_schedule"] = nlohmann::json::array();
  for (const auto& step : config.lambda.steps()) {
    doc["lambda_schedule"].push_back({step.start_s, step.lambda});
  }
  nlohmann::json mix = nlohmann::json::object();
  for (std::size_t i = 0; i < app_table().size(); ++i) mix[app_table()[i].name] = config.app_mix[i];
  doc["app_mix"] = std::move(mix);
  return doc;
}

double expected_offered_load(const WorkloadConfig& config, double lambda) {
  const double total = std::accumulate(config.app_mix.begin(), config.app_mix.end(), 0.0);
  double per_client = 0.0;
  for (std::size_t i = 0; i < app_table().size(); ++i) {
    const auto& app = app_table()[i];
    per_client += config.app_mix[i] / total * mid(app.duration_s) * mid(app.frame_rate);
  }
  return lambda / kMinute * per_client;
}

}  // namespace aset
