#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace aset {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Reference application profile. Frame sizes are synthetic defaults.
struct AppProfile {
  std::string name;
  Range tolerated_delay_ms;
  Range frame_rate;   // fps
  Range duration_s;
  double required_accuracy = 0.0;  // mAP
  Range frame_size;   // bytes
  std::string task = "object-detection";
};

/// The ten reference applications, in table order.
const std::vector<AppProfile>& app_table();
std::optional<std::size_t> find_app(std::string_view name);

struct Stream {
  std::size_t id = 0;
  std::size_t app = 0;
  std::size_t site = 0;
  std::string task;
  double rate = 0.0;               // fps
  double input_size = 0.0;         // bytes
  double tolerated_delay_ms = 0.0;
  double required_accuracy = 0.0;
  double access_delay_ms = 0.0;
  double duration_s = 0.0;
  double arrival_time_s = 0.0;

  double end_time_s() const { return arrival_time_s + duration_s; }
};

/// Number of queries a stream of `duration_s` at `rate` fps emits when the
/// k-th query leaves at k / rate: ceil(duration * rate).
std::size_t query_count(double duration_s, double rate);

/// Queries emitted in [from, until) by a stream whose first query leaves at
/// `start` with spacing 1 / rate, considering only its lifetime.
std::size_t queries_between(const Stream& stream, double from, double until);

struct LambdaStep {
  double start_s = 0.0;
  double lambda = 0.0;  // clients per minute
};

/// Piecewise-constant client arrival rate. The first step starts at 0.
class LambdaSchedule {
 public:
  LambdaSchedule() = default;
  explicit LambdaSchedule(double constant_lambda);
  explicit LambdaSchedule(std::vector<LambdaStep> steps);

  double at(double t) const;
  const std::vector<LambdaStep>& steps() const { return steps_; }

 private:
  std::vector<LambdaStep> steps_{{0.0, 60.0}};
};

struct WorkloadConfig {
  LambdaSchedule lambda{60.0};
  /// Weights over app_table() rows; normalized on use.
  std::vector<double> app_mix = default_app_mix();

  /// Weights proportional to 1 / sqrt(expected queries per stream), which
  /// keeps long-lived apps from dominating the offered load.
  static std::vector<double> default_app_mix();
  static std::vector<double> uniform_app_mix();
};

void validate(const WorkloadConfig& config);

/// Poisson client arrivals and stream sampling for one scheduler site.
class ClientGenerator {
 public:
  ClientGenerator(WorkloadConfig config, std::size_t site, double access_delay_min_ms,
                  double access_delay_max_ms, std::uint64_t seed);

  /// Next arrival after `now`: exact inversion of the integrated
  /// piecewise-constant rate (exponential with mean 60 / lambda s when
  /// lambda is constant). Returns +inf if the rate stays zero forever.
  double next_arrival(double now);

  Stream spawn_stream(double now, std::size_t stream_id);

  std::mt19937_64& rng() { return rng_; }

 private:
  WorkloadConfig config_;
  std::size_t site_;
  double access_min_;
  double access_max_;
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> app_dist_;
};

/// Parses {"lambda": x} or {"lambda_schedule": [[t, lambda], ...]} plus an
/// optional "app_mix" object keyed by app name.
WorkloadConfig load_workload(const nlohmann::json& doc);
nlohmann::json workload_to_json(const WorkloadConfig& config);

/// Expected steady-state offered load (queries/s) at one site.
double expected_offered_load(const WorkloadConfig& config, double lambda);

}  // namespace aset
