#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aset/catalog.hpp"
#include "aset/policies.hpp"
#include "aset/topology.hpp"
#include "aset/workload.hpp"

namespace aset {

enum class EventKind {
  kClientArrival,
  kQueryEmit,
  kQueryArrival,  // query reaches its worker's queue
  kBatchComplete,
  kResponseDelivered,
  kStreamEnd,
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kClientArrival;
  std::size_t subject = 0;  // site, stream, query or worker depending on kind

  /// Min-heap order: earliest time first, FIFO among equal times.
  friend bool operator>(const Event& a, const Event& b) {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

enum class Outcome { kSuccess, kFailed, kRejected };

/// success iff (delivered_at - emit_time) <= tolerated delay (closed bound).
Outcome classify_response(double emit_time_s, double delivered_at_s, double tolerated_delay_ms);

struct OutcomeCounts {
  std::uint64_t success = 0;
  std::uint64_t failed = 0;
  std::uint64_t rejected = 0;

  std::uint64_t total() const { return success + failed + rejected; }
  void add(Outcome outcome, std::uint64_t n = 1);
  OutcomeCounts& operator+=(const OutcomeCounts& other);
  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

/// Outcomes bucketed by the second in which each query was (or would have
/// been) submitted.
struct MetricsBucket {
  OutcomeCounts counts;
  std::vector<OutcomeCounts> per_app;
  std::uint64_t offered = 0;
};

struct MetricsWindow {
  double start = 0.0;
  double end = 0.0;
  OutcomeCounts counts;
  double q_success = 1.0;
  double q_fail = 0.0;
  double q_reject = 0.0;
  std::vector<OutcomeCounts> per_app;
};

/// Ratios over buckets covering [t - T, t). An empty window reports
/// (q_fail, q_reject, q_success) = (0, 0, 1).
MetricsWindow windowed_metrics(const std::vector<MetricsBucket>& buckets, double t, double window,
                               double period = 1.0);
MetricsWindow metrics_from_counts(const OutcomeCounts& counts);

/// Deployed replicas of one variant on one cluster, treated as one row of
/// the agent's observation.
struct WorkerGroup {
  std::size_t variant = 0;
  std::size_t cluster = 0;
  std::vector<std::size_t> workers;
};

struct StreamTag {
  double tolerated_delay_ms = 0.0;
  double rate = 0.0;
};

struct GroupSample {
  double stream_count = 0.0;
  double responses = 0.0;  // delivered during the last period
  double load = 0.0;
  std::vector<StreamTag> streams;
};

/// Per-group observation taken at the end of each metrics period.
struct Snapshot {
  double time = 0.0;
  std::vector<GroupSample> groups;
};

struct BindRecord {
  std::uint64_t seq = 0;
  double time = 0.0;
  Stream stream;
  PolicyKind policy = PolicyKind::kClosest;
  std::optional<std::size_t> worker;
  double load_before = 0.0;
};

/// Load ledger change: +eta*rho on bind, the same amount back at stream end.
struct LedgerEvent {
  std::uint64_t seq = 0;
  double time = 0.0;
  std::size_t worker = 0;
  std::size_t stream = 0;
  double delta = 0.0;
};

/// Per-query timeline, kept only when EpisodeConfig::record_queries is set.
struct QueryRecord {
  std::size_t stream = 0;
  std::size_t worker = 0;
  double emit_time = 0.0;
  double arrival_time = 0.0;  // reached the worker's queue
  double service_start = 0.0;
  double service_end = 0.0;
  double delivered_time = 0.0;
  std::size_t batch_size = 0;
  Outcome outcome = Outcome::kSuccess;
};

struct PolicySwitch {
  double time = 0.0;
  PolicyKind policy = PolicyKind::kClosest;
  double decision_latency_ms = 0.0;
};

struct EpisodeConfig {
  std::string topology_preset = "full-edge";
  int scale = 2;
  std::uint64_t topology_seed = 1;
  PresetParams preset;
  std::optional<Topology> topology;  // overrides the preset when set
  std::shared_ptr<const Catalog> catalog;  // default catalog when null
  WorkloadConfig workload;
  double horizon_s = 300.0;
  double window_s = 25.0;
  double metrics_period_s = 1.0;
  std::optional<double> early_stop_threshold;  // theta
  int cloud_replica_cap = kCloudReplicaCap;
  std::size_t snapshot_history = 64;
  bool record_queries = false;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json episode_config_to_json(const EpisodeConfig& config);

struct MetricsRow {
  double time = 0.0;
  PolicyKind policy = PolicyKind::kClosest;
  MetricsWindow window;
  double offered_qps = 0.0;
};

struct EpisodeResult {
  std::vector<MetricsRow> series;
  std::vector<MetricsBucket> buckets;
  OutcomeCounts totals;
  std::vector<OutcomeCounts> per_app;
  std::uint64_t emitted = 0;
  std::uint64_t attributed = 0;  // would-be queries of rejected streams
  std::vector<BindRecord> binds;
  std::vector<LedgerEvent> ledger;
  std::vector<PolicySwitch> switches;
  std::vector<QueryRecord> queries;
  double end_time = 0.0;
  bool early_stopped = false;

  double success_ratio() const;
};

/// Writes the per-tick metrics table. `provenance` becomes a leading
/// "# ..." comment line.
void write_metrics_csv(std::ostream& out, const EpisodeResult& result,
                       const std::string& provenance);

class Simulation;

/// Chooses the active static policy at t = 0 and at every window boundary.
class PolicyController {
 public:
  virtual ~PolicyController() = default;
  virtual PolicyKind on_tick(const Simulation& sim) = 0;
};

class FixedPolicy final : public PolicyController {
 public:
  explicit FixedPolicy(PolicyKind kind) : kind_(kind) {}
  PolicyKind on_tick(const Simulation&) override { return kind_; }

 private:
  PolicyKind kind_;
};

/// Single-threaded, event-ordered episode. Can be driven window by window
/// (run_until) or end to end (run_episode).
class Simulation {
 public:
  explicit Simulation(EpisodeConfig config);

  const EpisodeConfig& config() const { return config_; }
  const Catalog& catalog() const { return *catalog_; }
  const Topology& topology() const { return topology_; }
  const std::vector<Worker>& workers() const { return workers_; }
  const std::vector<WorkerGroup>& groups() const { return groups_; }
  const std::vector<double>& loads() const { return loads_; }
  const std::deque<Snapshot>& snapshots() const { return snapshots_; }
  const std::vector<MetricsBucket>& buckets() const { return buckets_; }

  double now() const { return now_; }
  bool stopped() const { return stopped_; }
  PolicyKind policy() const { return policy_; }

  void set_policy(PolicyKind kind, double decision_latency_ms = 0.0);

  /// Processes every event strictly before `until` (capped at the horizon)
  /// and the metrics ticks up to it.
  void run_until(double until);

  /// Metrics over the window ending now, with outcomes known so far.
  MetricsWindow live_window() const;

  /// Ends arrivals and emissions at the current time, drains queued work so
  /// every emitted query is classified, and returns the episode record.
  EpisodeResult finish(bool early_stopped = false);

 private:
  struct StreamRuntime {
    Stream stream;
    std::optional<std::size_t> worker;
    double load_delta = 0.0;
    bool active = true;
    std::size_t emitted = 0;
  };
  struct QueryRuntime {
    std::size_t stream = 0;
    double emit_time = 0.0;
    double size = 0.0;
    std::size_t worker = 0;
    double arrival_time = 0.0;
    double service_start = 0.0;
    double service_end = 0.0;
    std::size_t batch_size = 0;
  };
  struct WorkerRuntime {
    std::deque<std::size_t> queue;
    std::vector<std::size_t> in_service;
    bool busy = false;
  };

  void schedule(double time, EventKind kind, std::size_t subject);
  void handle(const Event& event);
  void on_client_arrival(std::size_t site);
  void on_query_emit(std::size_t stream);
  void on_query_arrival(std::size_t query);
  void on_batch_complete(std::size_t worker);
  void on_response_delivered(std::size_t query);
  void on_stream_end(std::size_t stream);
  void start_batch(std::size_t worker);
  void metrics_tick(double t);
  void attribute_rejections(double from, double until);
  MetricsBucket& bucket_at(double t);
  std::size_t allocate_query();

  EpisodeConfig config_;
  std::shared_ptr<const Catalog> catalog_;
  Topology topology_;
  std::vector<Worker> workers_;
  std::vector<WorkerGroup> groups_;
  std::vector<std::size_t> worker_group_;
  std::vector<double> loads_;
  std::vector<WorkerRuntime> runtime_;
  std::vector<ClientGenerator> generators_;
  std::mt19937_64 network_rng_;
  std::mt19937_64 processing_rng_;
  std::mt19937_64 policy_rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_trace_seq_ = 0;
  double now_ = 0.0;
  double next_tick_ = 0.0;
  bool stopped_ = false;
  PolicyKind policy_ = PolicyKind::kClosest;

  std::vector<StreamRuntime> streams_;
  std::vector<std::size_t> active_bound_;     // stream ids
  std::vector<std::size_t> active_rejected_;  // stream ids
  std::vector<QueryRuntime> queries_;
  std::vector<std::size_t> free_queries_;
  std::vector<double> group_responses_;

  std::vector<MetricsBucket> buckets_;
  std::vector<PolicyKind> bucket_policy_;
  std::deque<Snapshot> snapshots_;
  EpisodeResult result_;
};

/// Runs one episode to the horizon or until the live success ratio at a
/// window boundary drops to the early-stop threshold.
EpisodeResult run_episode(const EpisodeConfig& config, PolicyController& controller);

/// SplitMix64-derived seed for an independent RNG substream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace aset
