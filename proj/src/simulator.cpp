#include "aset/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace aset {

namespace {

constexpr std::uint64_t kNetworkStream = 1;
constexpr std::uint64_t kProcessingStream = 2;
constexpr std::uint64_t kPolicyStream = 3;
constexpr std::uint64_t kSiteStreamBase = 100;

std::string column_slug(const std::string& name) {
  std::string slug;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!slug.empty() && slug.back() != '_') {
      slug += '_';
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  return slug;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Outcome classify_response(double emit_time_s, double delivered_at_s, double tolerated_delay_ms) {
  const double elapsed_ms = (delivered_at_s - emit_time_s) * 1000.0;
  // Closed bound; the slack only absorbs seconds-to-milliseconds rounding.
  return elapsed_ms <= tolerated_delay_ms + 1e-9 ? Outcome::kSuccess : Outcome::kFailed;
}

void OutcomeCounts::add(Outcome outcome, std::uint64_t n) {
  switch (outcome) {
    case Outcome::kSuccess: success += n; break;
    case Outcome::kFailed: failed += n; break;
    case Outcome::kRejected: rejected += n; break;
  }
}

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& other) {
  success += other.success;
  failed += other.failed;
  rejected += other.rejected;
  return *this;
}

MetricsWindow metrics_from_counts(const OutcomeCounts& counts) {
  MetricsWindow w;
  w.counts = counts;
  const auto n = counts.total();
  if (n == 0) return w;
  const double total = static_cast<double>(n);
  w.q_success = static_cast<double>(counts.success) / total;
  w.q_fail = static_cast<double>(counts.failed) / total;
  w.q_reject = static_cast<double>(counts.rejected) / total;
  return w;
}

MetricsWindow windowed_metrics(const std::vector<MetricsBucket>& buckets, double t, double window,
                               double period) {
  const long first = std::max(0L, std::lround((t - window) / period));
  const long last = std::max(0L, std::lround(t / period));
  OutcomeCounts counts;
  std::vector<OutcomeCounts> per_app(app_table().size());
  for (long k = first; k < last && k < static_cast<long>(buckets.size()); ++k) {
    const auto& b = buckets[static_cast<std::size_t>(k)];
    counts += b.counts;
    for (std::size_t a = 0; a < b.per_app.size() && a < per_app.size(); ++a) per_app[a] += b.per_app[a];
  }
  MetricsWindow w = metrics_from_counts(counts);
  w.start = std::max(0.0, t - window);
  w.end = t;
  w.per_app = std::move(per_app);
  return w;
}

void EpisodeConfig::validate() const {
  std::vector<std::string> errors;
  if (!(horizon_s > 0.0)) errors.push_back("horizon must be positive");
  if (!(metrics_period_s > 0.0)) errors.push_back("metrics period must be positive");
  if (!(window_s > 0.0)) errors.push_back("window must be positive");
  if (metrics_period_s > 0.0 && window_s > 0.0) {
    const double ratio = window_s / metrics_period_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
      errors.push_back("metrics period must divide the window");
    }
  }
  if (early_stop_threshold && !(*early_stop_threshold >= 0.0 && *early_stop_threshold <= 1.0)) {
    errors.push_back("early-stop threshold must lie in [0, 1]");
  }
  if (!topology && scale < 1) errors.push_back("scale must be >= 1");
  if (cloud_replica_cap < 0) errors.push_back("cloud replica cap must be >= 0");
  try {
    aset::validate(workload);
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.violations().begin(), e.violations().end());
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

nlohmann::json episode_config_to_json(const EpisodeConfig& config) {
  nlohmann::json doc;
  doc["topology"] = config.topology ? topology_to_json(*config.topology)
                                    : nlohmann::json{{"preset", config.topology_preset},
                                                     {"scale", config.scale},
                                                     {"seed", config.topology_seed},
                                                     {"params", preset_params_to_json(config.preset)}};
  doc["catalog"] = catalog_to_json(config.catalog ? *config.catalog : default_catalog());
  doc["workload"] = workload_to_json(config.workload);
  doc["horizon_s"] = config.horizon_s;
  doc["window_s"] = config.window_s;
  doc["metrics_period_s"] = config.metrics_period_s;
  doc["early_stop_threshold"] =
      config.early_stop_threshold ? nlohmann::json(*config.early_stop_threshold) : nlohmann::json();
  doc["cloud_replica_cap"] = config.cloud_replica_cap;
  doc["seed"] = config.seed;
  return doc;
}

double EpisodeResult::success_ratio() const {
  const auto n = totals.total();
  return n == 0 ? 1.0 : static_cast<double>(totals.success) / static_cast<double>(n);
}

void write_metrics_csv(std::ostream& out, const EpisodeResult& result,
                       const std::string& provenance) {
  out << "# " << provenance << '\n';
  out << "time_s,policy,q_success,q_fail,q_reject,offered_qps";
  for (const auto& app : app_table()) out << ",success_" << column_slug(app.name);
  out << '\n';
  for (const auto& row : result.series) {
    out << format_number(row.time) << ',' << to_string(row.policy) << ','
        << format_number(row.window.q_success) << ',' << format_number(row.window.q_fail) << ','
        << format_number(row.window.q_reject) << ',' << format_number(row.offered_qps);
    for (const auto& app : row.window.per_app) {
      out << ',';
      if (app.total() > 0) {
        out << format_number(static_cast<double>(app.success) / static_cast<double>(app.total()));
      }
    }
    out << '\n';
  }
}

Simulation::Simulation(EpisodeConfig config)
    : config_(std::move(config)),
      network_rng_(derive_seed(config_.seed, kNetworkStream)),
      processing_rng_(derive_seed(config_.seed, kProcessingStream)),
      policy_rng_(derive_seed(config_.seed, kPolicyStream)) {
  config_.validate();
  catalog_ = config_.catalog ? config_.catalog : std::make_shared<const Catalog>(default_catalog());
  topology_ = config_.topology ? *config_.topology
                               : build_preset(config_.topology_preset, config_.scale,
                                              config_.topology_seed, config_.preset);
  topology_.validate();
  workers_ = deploy_workers(topology_, *catalog_, config_.topology_seed, config_.cloud_replica_cap);

  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_pair;
  for (const auto& w : workers_) by_pair[{w.cluster, w.variant}].push_back(w.id);
  worker_group_.resize(workers_.size());
  for (auto& [key, members] : by_pair) {
    for (std::size_t w : members) worker_group_[w] = groups_.size();
    groups_.push_back({key.second, key.first, std::move(members)});
  }
  loads_.assign(workers_.size(), 0.0);
  runtime_.resize(workers_.size());
  group_responses_.assign(groups_.size(), 0.0);

  for (std::size_t s = 0; s < topology_.sites.size(); ++s) {
    generators_.emplace_back(config_.workload, s, topology_.access_delay_min_ms,
                             topology_.access_delay_max_ms,
                             derive_seed(config_.seed, kSiteStreamBase + s));
    const double first = generators_.back().next_arrival(0.0);
    if (first < config_.horizon_s) schedule(first, EventKind::kClientArrival, s);
  }
  next_tick_ = config_.metrics_period_s;
}

void Simulation::schedule(double time, EventKind kind, std::size_t subject) {
  events_.push(Event{time, next_seq_++, kind, subject});
}

MetricsBucket& Simulation::bucket_at(double t) {
  const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / config_.metrics_period_s)));
  if (k >= buckets_.size()) {
    const std::size_t n = k + 1;
    buckets_.resize(n);
    bucket_policy_.resize(n, policy_);
    for (auto& b : buckets_) {
      if (b.per_app.empty()) b.per_app.resize(app_table().size());
    }
  }
  return buckets_[k];
}

std::size_t Simulation::allocate_query() {
  if (!free_queries_.empty()) {
    const std::size_t q = free_queries_.back();
    free_queries_.pop_back();
    return q;
  }
  queries_.emplace_back();
  return queries_.size() - 1;
}

void Simulation::set_policy(PolicyKind kind, double decision_latency_ms) {
  policy_ = kind;
  result_.switches.push_back({now_, kind, decision_latency_ms});
}

void Simulation::run_until(double until) {
  if (stopped_) return;
  until = std::min(until, config_.horizon_s);
  while (true) {
    const double limit = std::min(until, next_tick_);
    while (!events_.empty() && events_.top().time < limit) {
      const Event e = events_.top();
      events_.pop();
      now_ = e.time;
      handle(e);
    }
    if (next_tick_ <= until) {
      now_ = next_tick_;
      metrics_tick(next_tick_);
      next_tick_ += config_.metrics_period_s;
      continue;
    }
    now_ = std::max(now_, until);
    break;
  }
}

void Simulation::handle(const Event& event) {
  switch (event.kind) {
    case EventKind::kClientArrival: on_client_arrival(event.subject); break;
    case EventKind::kQueryEmit: on_query_emit(event.subject); break;
    case EventKind::kQueryArrival: on_query_arrival(event.subject); break;
    case EventKind::kBatchComplete: on_batch_complete(event.subject); break;
    case EventKind::kResponseDelivered: on_response_delivered(event.subject); break;
    case EventKind::kStreamEnd: on_stream_end(event.subject); break;
  }
}

void Simulation::on_client_arrival(std::size_t site) {
  if (stopped_) return;
  auto& gen = generators_[site];
  Stream stream = gen.spawn_stream(now_, streams_.size());

  const SystemView view{catalog_.get(), &topology_, workers_, loads_, site};
  const Decision decision = apply_policy(policy_, stream, view, now_, policy_rng_);

  BindRecord record{next_trace_seq_++, now_, stream, policy_, std::nullopt, 0.0};
  StreamRuntime rt{stream, std::nullopt, 0.0, true, 0};
  const std::size_t id = streams_.size();
  if (decision) {
    const std::size_t w = decision->worker;
    record.worker = w;
    record.load_before = loads_[w];
    rt.worker = w;
    rt.load_delta = fractional_load(catalog_->variants()[workers_[w].variant], stream.input_size) *
                    stream.rate;
    loads_[w] += rt.load_delta;
    result_.ledger.push_back({record.seq, now_, w, id, rt.load_delta});
    active_bound_.push_back(id);
    schedule(now_, EventKind::kQueryEmit, id);
    schedule(stream.end_time_s(), EventKind::kStreamEnd, id);
  } else {
    active_rejected_.push_back(id);
  }
  result_.binds.push_back(std::move(record));
  streams_.push_back(std::move(rt));

  const double next = gen.next_arrival(now_);
  if (next < config_.horizon_s) schedule(next, EventKind::kClientArrival, site);
}

void Simulation::on_query_emit(std::size_t stream_id) {
  if (stopped_) return;
  auto& rt = streams_[stream_id];
  const Stream& s = rt.stream;
  const std::size_t q = allocate_query();
  queries_[q] = {stream_id, now_, s.input_size, *rt.worker, 0.0, 0.0, 0.0, 0};
  auto& bucket = bucket_at(now_);
  bucket.offered += 1;
  result_.emitted += 1;
  rt.emitted += 1;

  const auto& path = topology_.paths[s.site][workers_[*rt.worker].cluster];
  const double uplink_ms = s.access_delay_ms + topology_.transmission_delay_ms(s.input_size) +
                           sample_network_delay(path, network_rng_);
  schedule(now_ + uplink_ms / 1000.0, EventKind::kQueryArrival, q);

  if (rt.emitted < query_count(s.duration_s, s.rate)) {
    const double next = s.arrival_time_s + static_cast<double>(rt.emitted) / s.rate;
    if (next < config_.horizon_s) schedule(next, EventKind::kQueryEmit, stream_id);
  }
}

void Simulation::on_query_arrival(std::size_t query) {
  const std::size_t w = queries_[query].worker;
  queries_[query].arrival_time = now_;
  runtime_[w].queue.push_back(query);
  if (!runtime_[w].busy) start_batch(w);
}

void Simulation::start_batch(std::size_t w) {
  auto& rt = runtime_[w];
  const auto& variant = catalog_->variants()[workers_[w].variant];
  double largest = 0.0;
  while (!rt.queue.empty() && rt.in_service.size() < static_cast<std::size_t>(variant.batch_size)) {
    const std::size_t q = rt.queue.front();
    rt.queue.pop_front();
    largest = std::max(largest, queries_[q].size);
    rt.in_service.push_back(q);
  }
  double service_ms = processing_delay(variant, largest);
  if (variant.delay_jitter_ms > 0.0) {
    service_ms += std::normal_distribution<double>(0.0, variant.delay_jitter_ms)(processing_rng_);
  }
  service_ms = std::max(0.0, service_ms);
  for (std::size_t q : rt.in_service) {
    queries_[q].service_start = now_;
    queries_[q].service_end = now_ + service_ms / 1000.0;
    queries_[q].batch_size = rt.in_service.size();
  }
  rt.busy = true;
  schedule(now_ + service_ms / 1000.0, EventKind::kBatchComplete, w);
}

void Simulation::on_batch_complete(std::size_t w) {
  auto& rt = runtime_[w];
  for (std::size_t q : rt.in_service) {
    const Stream& s = streams_[queries_[q].stream].stream;
    const auto& path = topology_.paths[s.site][workers_[w].cluster];
    const double return_ms = sample_network_delay(path, network_rng_) + s.access_delay_ms;
    schedule(now_ + return_ms / 1000.0, EventKind::kResponseDelivered, q);
  }
  rt.in_service.clear();
  rt.busy = false;
  if (!rt.queue.empty()) start_batch(w);
}

void Simulation::on_response_delivered(std::size_t query) {
  const QueryRuntime& q = queries_[query];
  const Stream& s = streams_[q.stream].stream;
  const Outcome outcome = classify_response(q.emit_time, now_, s.tolerated_delay_ms);
  auto& bucket = bucket_at(q.emit_time);
  bucket.counts.add(outcome);
  bucket.per_app[s.app].add(outcome);
  if (!stopped_) group_responses_[worker_group_[q.worker]] += 1.0;
  if (config_.record_queries) {
    result_.queries.push_back({q.stream, q.worker, q.emit_time, q.arrival_time, q.service_start,
                               q.service_end, now_, q.batch_size, outcome});
  }
  free_queries_.push_back(query);
}

void Simulation::on_stream_end(std::size_t stream_id) {
  auto& rt = streams_[stream_id];
  if (!rt.active || !rt.worker) return;
  rt.active = false;
  loads_[*rt.worker] -= rt.load_delta;
  result_.ledger.push_back({next_trace_seq_++, now_, *rt.worker, stream_id, -rt.load_delta});
  auto it = std::find(active_bound_.begin(), active_bound_.end(), stream_id);
  if (it != active_bound_.end()) active_bound_.erase(it);
}

void Simulation::attribute_rejections(double from, double until) {
  if (!(until > from)) return;
  auto& bucket = bucket_at(from);
  std::size_t kept = 0;
  for (std::size_t id : active_rejected_) {
    const Stream& s = streams_[id].stream;
    const auto n = queries_between(s, from, until);
    if (n > 0) {
      bucket.counts.add(Outcome::kRejected, n);
      bucket.per_app[s.app].add(Outcome::kRejected, n);
      bucket.offered += n;
      result_.attributed += n;
    }
    if (s.end_time_s() > until) active_rejected_[kept++] = id;
  }
  active_rejected_.resize(kept);
}

void Simulation::metrics_tick(double t) {
  const double start = t - config_.metrics_period_s;
  attribute_rejections(start, t);
  bucket_at(start);
  bucket_policy_[static_cast<std::size_t>(std::lround(start / config_.metrics_period_s))] = policy_;

  Snapshot snap;
  snap.time = t;
  snap.groups.resize(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    snap.groups[g].responses = group_responses_[g];
    for (std::size_t w : groups_[g].workers) snap.groups[g].load += loads_[w];
  }
  for (std::size_t id : active_bound_) {
    const auto& rt = streams_[id];
    auto& sample = snap.groups[worker_group_[*rt.worker]];
    sample.stream_count += 1.0;
    sample.streams.push_back({rt.stream.tolerated_delay_ms, rt.stream.rate});
  }
  std::fill(group_responses_.begin(), group_responses_.end(), 0.0);
  snapshots_.push_back(std::move(snap));
  while (snapshots_.size() > config_.snapshot_history) snapshots_.pop_front();
}

MetricsWindow Simulation::live_window() const {
  return windowed_metrics(buckets_, now_, config_.window_s, config_.metrics_period_s);
}

EpisodeResult Simulation::finish(bool early_stopped) {
  if (stopped_) throw std::logic_error("episode already finished");
  const double stop = now_;
  const double last_tick = next_tick_ - config_.metrics_period_s;
  attribute_rejections(last_tick, stop);
  stopped_ = true;

  while (!events_.empty()) {
    const Event e = events_.top();
    events_.pop();
    now_ = std::max(now_, e.time);
    handle(e);
  }

  const double period = config_.metrics_period_s;
  const auto ticks = static_cast<std::size_t>(std::floor(stop / period + 1e-9));
  bucket_at(std::max(0.0, stop - period));
  EpisodeResult result = std::move(result_);
  result.series.reserve(ticks);
  for (std::size_t k = 1; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * period;
    MetricsRow row;
    row.time = t;
    row.policy = bucket_policy_[k - 1];
    row.window = windowed_metrics(buckets_, t, config_.window_s, period);
    row.offered_qps = static_cast<double>(buckets_[k - 1].offered) / period;
    result.series.push_back(std::move(row));
  }
  result.per_app.assign(app_table().size(), OutcomeCounts{});
  for (const auto& b : buckets_) {
    result.totals += b.counts;
    for (std::size_t a = 0; a < b.per_app.size(); ++a) result.per_app[a] += b.per_app[a];
  }
  result.buckets = buckets_;
  result.end_time = stop;
  result.early_stopped = early_stopped;
  return result;
}

EpisodeResult run_episode(const EpisodeConfig& config, PolicyController& controller) {
  Simulation sim(config);
  auto decide = [&] {
    const auto start = std::chrono::steady_clock::now();
    const PolicyKind kind = controller.on_tick(sim);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    sim.set_policy(kind, std::chrono::duration<double, std::milli>(elapsed).count());
  };
  decide();
  const double horizon = config.horizon_s;
  bool early = false;
  for (double t = config.window_s;; t += config.window_s) {
    sim.run_until(std::min(t, horizon));
    if (t >= horizon) break;
    if (config.early_stop_threshold && sim.live_window().q_success <= *config.early_stop_threshold) {
      early = true;
      break;
    }
    decide();
  }
  return sim.finish(early);
}

}  // namespace aset
