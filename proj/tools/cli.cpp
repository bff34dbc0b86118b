#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "aset/agent/checkpoint.hpp"
#include "aset/agent/controller.hpp"
#include "aset/agent/environment.hpp"

namespace aset::cli {

namespace fs = std::filesystem;

namespace {

std::string format_label(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", lambda);
  return buf;
}

LambdaSetting constant_setting(double lambda) {
  return {format_label(lambda), LambdaSchedule(lambda)};
}

nlohmann::json schedule_to_json(const LambdaSchedule& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : s.steps()) steps.push_back({step.start_s, step.lambda});
  return steps;
}

LambdaSchedule schedule_from_json(const nlohmann::json& doc) {
  std::vector<LambdaStep> steps;
  for (const auto& step : doc) steps.push_back({step.at(0).get<double>(), step.at(1).get<double>()});
  return LambdaSchedule(std::move(steps));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open '" + path.string() + "'"});
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({"'" + path.string() + "' is not valid JSON: " + e.what()});
  }
}

void apply_topology(ExperimentPlan& plan, const nlohmann::json& t, const fs::path& base_dir) {
  if (t.is_string()) {
    plan.episode.topology_preset = t.get<std::string>();
    plan.episode.topology.reset();
    return;
  }
  static const std::set<std::string> kKeys = {"preset", "scale", "seed", "params", "file"};
  std::vector<std::string> errors;
  for (const auto& [key, value] : t.items()) {
    if (!kKeys.count(key)) errors.push_back("unknown topology key '" + key + "'");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  if (t.contains("file")) {
    plan.episode.topology = load_topology(read_json(resolve(base_dir, t.at("file").get<std::string>())));
  }
  if (t.contains("preset")) {
    plan.episode.topology_preset = t.at("preset").get<std::string>();
    plan.episode.topology.reset();
  }
  if (t.contains("scale")) plan.episode.scale = t.at("scale").get<int>();
  if (t.contains("seed")) plan.episode.topology_seed = t.at("seed").get<std::uint64_t>();
  if (t.contains("params")) plan.episode.preset = preset_params_from_json(t.at("params"));
}

std::string provenance(const nlohmann::json& config, std::uint64_t seed) {
  return "config_hash=" + fnv1a_hex(config.dump()) + " seed=" + std::to_string(seed);
}

struct RunSummary {
  std::vector<double> success, fail, reject;
};

double mean(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

struct AgentBundle {
  agent::Checkpoint checkpoint;
  std::string hash;
};

AgentBundle load_agent(const fs::path& path) {
  AgentBundle bundle{agent::load_checkpoint(path), {}};
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  bundle.hash = fnv1a_hex(ss.str());
  return bundle;
}

EpisodeConfig setting_config(const ExperimentPlan& plan, const LambdaSetting& setting,
                             std::uint64_t seed) {
  EpisodeConfig c = plan.episode;
  c.workload.lambda = setting.schedule;
  c.seed = seed;
  return c;
}

/// Runs every (runner, lambda, seed) combination and writes one metrics CSV
/// per run plus the summary.
int run_grid(const ExperimentPlan& plan, const std::optional<AgentBundle>& agent_bundle,
             std::ostream& out) {
  fs::create_directories(plan.out / "runs");
  std::vector<std::string> runners;
  for (auto p : plan.policies) runners.emplace_back(to_string(p));
  if (agent_bundle) runners.emplace_back("aset");

  std::map<std::pair<std::string, std::string>, RunSummary> summary;
  const auto seeds = plan.run_seeds();
  for (const auto& setting : plan.lambdas) {
    for (const auto& name : runners) {
      for (const auto seed : seeds) {
        const EpisodeConfig config = setting_config(plan, setting, seed);
        nlohmann::json prov = {{"episode", episode_config_to_json(config)}, {"runner", name}};
        EpisodeResult result;
        if (name == "aset") {
          const auto& ckpt = agent_bundle->checkpoint;
          prov["agent"] = agent_bundle->hash;
          Simulation probe(config);
          if (probe.groups().size() != ckpt.shape.workers) {
            throw ValidationError({"checkpoint expects " + std::to_string(ckpt.shape.workers) +
                                   " worker groups but the topology has " +
                                   std::to_string(probe.groups().size())});
          }
          agent::AgentController controller(agent::network_from_checkpoint(ckpt), ckpt.partition);
          result = run_episode(config, controller);
        } else {
          FixedPolicy policy(policy_from_string(name));
          result = run_episode(config, policy);
        }
        const std::string stem = name + "_lambda" + setting.label + "_seed" + std::to_string(seed);
        std::ostringstream csv;
        write_metrics_csv(csv, result, provenance(prov, seed));
        write_file_atomic(plan.out / "runs" / (stem + ".csv"), csv.str());
        if (name == "aset") {
          std::ostringstream decisions;
          write_decisions_csv(decisions, result, provenance(prov, seed));
          write_file_atomic(plan.out / "runs" / (stem + "_decisions.csv"), decisions.str());
        }
        const double total = static_cast<double>(std::max<std::uint64_t>(1, result.totals.total()));
        auto& s = summary[{name, setting.label}];
        s.success.push_back(result.success_ratio());
        s.fail.push_back(static_cast<double>(result.totals.failed) / total);
        s.reject.push_back(static_cast<double>(result.totals.rejected) / total);
        out << stem << " success=" << fmt6(result.success_ratio()) << '\n';
      }
    }
  }

  nlohmann::json plan_doc = {{"episode", episode_config_to_json(setting_config(plan, plan.lambdas.front(), 0))},
                             {"runners", runners},
                             {"seeds", seeds}};
  for (const auto& s : plan.lambdas) plan_doc["lambdas"].push_back(schedule_to_json(s.schedule));
  if (agent_bundle) plan_doc["agent"] = agent_bundle->hash;
  std::ostringstream csv;
  std::string seed_list;
  for (auto s : seeds) seed_list += (seed_list.empty() ? "" : ",") + std::to_string(s);
  csv << "# config_hash=" << fnv1a_hex(plan_doc.dump()) << " seed=" << seed_list << '\n';
  csv << "policy,lambda,runs,mean_success,std_success,mean_fail,mean_reject\n";
  for (const auto& setting : plan.lambdas) {
    for (const auto& name : runners) {
      const auto& s = summary.at({name, setting.label});
      csv << name << ',' << setting.label << ',' << s.success.size() << ',' << fmt6(mean(s.success))
          << ',' << fmt6(stddev(s.success)) << ',' << fmt6(mean(s.fail)) << ','
          << fmt6(mean(s.reject)) << '\n';
    }
  }
  write_file_atomic(plan.out / "summary.csv", csv.str());
  return 0;
}

std::vector<EpisodeConfig> training_scenarios(const ExperimentPlan& plan) {
  const auto& hp = plan.hyperparams;
  std::vector<EpisodeConfig> scenarios;
  for (const auto& setting : plan.lambdas) {
    EpisodeConfig c = setting_config(plan, setting, 0);
    c.horizon_s = hp.horizon_s;
    c.window_s = hp.window_s;
    c.early_stop_threshold = hp.early_stop_threshold;
    scenarios.push_back(std::move(c));
  }
  return scenarios;
}

int cmd_train(const ExperimentPlan& plan, const std::optional<fs::path>& resume, std::ostream& out) {
  const auto& hp = plan.hyperparams;
  const auto scenarios = training_scenarios(plan);
  agent::SimulatorEnvironment env(scenarios, plan.partition,
                                  agent::RewardParams{hp.reward_threshold, 5.0});
  nlohmann::json env_doc = nlohmann::json::array();
  for (const auto& s : scenarios) env_doc.push_back(episode_config_to_json(s));

  std::optional<agent::Trainer> trainer;
  if (resume) {
    const auto ckpt = agent::load_checkpoint(*resume);
    if (!(ckpt.partition == plan.partition) || !(ckpt.shape == env.state_shape())) {
      throw ValidationError({"checkpoint partition or state shape does not match the plan"});
    }
    trainer.emplace(agent::trainer_from_checkpoint(ckpt, hp));
  } else {
    trainer.emplace(hp, agent::network_config_for(env.state_shape()));
  }

  fs::create_directories(plan.out);
  const fs::path curve_path = plan.out / "learning_curve.csv";
  const fs::path ckpt_path = plan.out / "agent.json";
  const std::string prov =
      "config_hash=" +
      fnv1a_hex(nlohmann::json{{"scenarios", env_doc},
                               {"hyperparams", agent::hyperparams_to_json(hp)},
                               {"partition", agent::partition_to_json(plan.partition)}}
                    .dump()) +
      " seed=" + std::to_string(hp.seed);

  // Keep earlier rows when resuming so the curve continues.
  std::ostringstream curve;
  agent::write_learning_curve_header(curve, prov);
  if (resume && fs::exists(curve_path)) {
    std::ifstream in(curve_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("episode,", 0) == 0) continue;
      if (std::stoull(line.substr(0, line.find(','))) < trainer->episodes_done()) {
        curve << line << '\n';
      }
    }
  }
  auto save = [&] {
    write_file_atomic(curve_path, curve.str());
    agent::save_checkpoint(ckpt_path,
                           agent::make_checkpoint(*trainer, plan.partition, env.state_shape(),
                                                  env_doc));
  };
  while (trainer->episodes_done() < hp.episodes) {
    const auto log = trainer->run_episode(env);
    agent::write_learning_curve_row(curve, log);
    out << "episode " << log.episode << " return=" << fmt6(log.episode_return)
        << " success=" << fmt6(log.mean_success) << " epsilon=" << fmt6(log.epsilon) << '\n';
    if (trainer->episodes_done() % 10 == 0) save();
  }
  save();
  return 0;
}

struct Flags {
  std::string config;
  std::string topology;
  int scale = 0;
  std::optional<std::uint64_t> topology_seed;
  std::string catalog;
  std::vector<double> lambdas;
  std::string schedule;
  std::vector<std::string> policies;
  std::string agent;
  std::vector<std::uint64_t> seeds;
  std::size_t repetitions = 0;
  std::size_t episodes = 0;
  double horizon = 0.0;
  std::string out;
  std::string resume;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config; its keys override flags");
  sub->add_option("--topology", f.topology, "dc-cloud, co-dc-cloud or full-edge");
  sub->add_option("--scale", f.scale, "number of scheduler sites");
  sub->add_option("--topology-seed", f.topology_seed, "seed for preset delays");
  sub->add_option("--catalog", f.catalog, "catalog JSON path");
  sub->add_option("--lambda", f.lambdas, "clients per minute; repeat for several groups");
  sub->add_option("--lambda-schedule", f.schedule, "steps as t:lambda,t:lambda,...");
  sub->add_option("--seed", f.seeds, "episode seeds");
  sub->add_option("--repetitions", f.repetitions, "runs per listed seed");
  sub->add_option("--horizon", f.horizon, "episode length in seconds");
  sub->add_option("--out", f.out, "output directory");
}

ExperimentPlan build_plan(const Flags& f, const std::string& mode) {
  ExperimentPlan plan;
  if (mode == "compare") plan.policies.assign(kAllPolicies.begin(), kAllPolicies.end());
  if (!f.topology.empty()) plan.episode.topology_preset = f.topology;
  if (f.scale != 0) plan.episode.scale = f.scale;
  if (f.topology_seed) plan.episode.topology_seed = *f.topology_seed;
  if (!f.catalog.empty()) {
    plan.episode.catalog = std::make_shared<const Catalog>(load_catalog_file(f.catalog));
  }
  for (double l : f.lambdas) plan.lambdas.push_back(constant_setting(l));
  if (!f.schedule.empty()) plan.lambdas.push_back({"schedule", parse_lambda_schedule(f.schedule)});
  if (!f.policies.empty()) {
    plan.policies.clear();
    for (const auto& p : f.policies) plan.policies.push_back(policy_from_string(p));
  }
  if (!f.agent.empty()) plan.agent = f.agent;
  if (!f.seeds.empty()) plan.seeds = f.seeds;
  if (f.repetitions != 0) plan.repetitions = f.repetitions;
  if (f.episodes != 0) plan.hyperparams.episodes = f.episodes;
  if (f.horizon > 0.0) {
    plan.episode.horizon_s = f.horizon;
    plan.hyperparams.horizon_s = f.horizon;
  }
  if (!f.out.empty()) plan.out = f.out;
  if (!f.config.empty()) {
    const fs::path path(f.config);
    apply_config(plan, read_json(path), path.parent_path());
  }
  if (plan.lambdas.empty()) {
    const auto& steps = plan.episode.workload.lambda.steps();
    plan.lambdas.push_back(steps.size() == 1 ? constant_setting(steps.front().lambda)
                                             : LambdaSetting{"schedule", plan.episode.workload.lambda});
  }
  plan.validate();
  if (mode == "compare" && plan.policies.empty() && !plan.agent) {
    throw ValidationError({"compare needs at least one policy or an agent"});
  }
  return plan;
}

}  // namespace

std::vector<std::uint64_t> ExperimentPlan::run_seeds() const {
  std::vector<std::uint64_t> out;
  for (auto s : seeds) {
    out.push_back(s);
    for (std::size_t r = 1; r < repetitions; ++r) out.push_back(derive_seed(s, 1000 + r));
  }
  return out;
}

void ExperimentPlan::validate() const {
  std::vector<std::string> errors;
  if (repetitions < 1) errors.push_back("repetitions must be >= 1");
  if (seeds.empty()) errors.push_back("plan needs at least one seed");
  if (lambdas.empty()) errors.push_back("plan needs a lambda or a schedule");
  const auto& names = preset_names();
  if (!episode.topology &&
      std::find(names.begin(), names.end(), episode.topology_preset) == names.end()) {
    errors.push_back("unknown topology preset '" + episode.topology_preset + "'");
  }
  try {
    episode.validate();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.violations().begin(), e.violations().end());
  }
  try {
    hyperparams.validate();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.violations().begin(), e.violations().end());
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

void apply_config(ExperimentPlan& plan, const nlohmann::json& doc, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {
      "topology", "catalog",  "workload",         "lambdas",  "lambda_schedule",
      "policies", "agent",    "seeds",            "repetitions", "horizon_s",
      "window_s", "metrics_period_s", "early_stop_threshold", "cloud_replica_cap",
      "hyperparams", "partition", "episodes",     "out"};
  if (!doc.is_object()) throw ValidationError({"config must be a JSON object"});
  std::vector<std::string> errors;
  for (const auto& [key, value] : doc.items()) {
    if (!kKeys.count(key)) errors.push_back("unknown config key '" + key + "'");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  try {
    if (doc.contains("topology")) apply_topology(plan, doc.at("topology"), base_dir);
    if (doc.contains("catalog")) {
      plan.episode.catalog = std::make_shared<const Catalog>(
          load_catalog_file(resolve(base_dir, doc.at("catalog").get<std::string>())));
    }
    if (doc.contains("workload")) {
      plan.episode.workload = load_workload(doc.at("workload"));
      const auto& w = doc.at("workload");
      if (w.contains("lambda") || w.contains("lambda_schedule")) plan.lambdas.clear();
    }
    if (doc.contains("lambdas")) {
      plan.lambdas.clear();
      for (const auto& l : doc.at("lambdas")) plan.lambdas.push_back(constant_setting(l.get<double>()));
    }
    if (doc.contains("lambda_schedule")) {
      if (!doc.contains("lambdas")) plan.lambdas.clear();
      plan.lambdas.push_back({"schedule", schedule_from_json(doc.at("lambda_schedule"))});
    }
    if (doc.contains("policies")) {
      plan.policies.clear();
      const auto& p = doc.at("policies");
      if (p.is_string() && p.get<std::string>() == "all") {
        plan.policies.assign(kAllPolicies.begin(), kAllPolicies.end());
      } else {
        for (const auto& name : p) plan.policies.push_back(policy_from_string(name.get<std::string>()));
      }
    }
    if (doc.contains("agent")) plan.agent = resolve(base_dir, doc.at("agent").get<std::string>());
    if (doc.contains("seeds")) plan.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    if (doc.contains("repetitions")) plan.repetitions = doc.at("repetitions").get<std::size_t>();
    if (doc.contains("horizon_s")) {
      plan.episode.horizon_s = doc.at("horizon_s").get<double>();
      plan.hyperparams.horizon_s = plan.episode.horizon_s;
    }
    if (doc.contains("window_s")) {
      plan.episode.window_s = doc.at("window_s").get<double>();
      plan.hyperparams.window_s = plan.episode.window_s;
    }
    if (doc.contains("metrics_period_s")) {
      plan.episode.metrics_period_s = doc.at("metrics_period_s").get<double>();
    }
    if (doc.contains("early_stop_threshold")) {
      const auto& v = doc.at("early_stop_threshold");
      plan.episode.early_stop_threshold =
          v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    if (doc.contains("cloud_replica_cap")) {
      plan.episode.cloud_replica_cap = doc.at("cloud_replica_cap").get<int>();
    }
    if (doc.contains("hyperparams")) {
      // Start from what the flags and earlier keys already set.
      nlohmann::json merged = agent::hyperparams_to_json(plan.hyperparams);
      merged.update(doc.at("hyperparams"));
      plan.hyperparams = agent::hyperparams_from_json(merged);
    }
    if (doc.contains("episodes")) plan.hyperparams.episodes = doc.at("episodes").get<std::size_t>();
    if (doc.contains("partition")) plan.partition = agent::partition_from_json(doc.at("partition"));
    if (doc.contains("out")) plan.out = resolve(base_dir, doc.at("out").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("malformed config: ") + e.what()});
  } catch (const std::invalid_argument& e) {
    throw ValidationError({e.what()});
  }
}

LambdaSchedule parse_lambda_schedule(const std::string& text) {
  std::vector<LambdaStep> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("schedule step '" + item + "' is not t:lambda");
    }
    try {
      steps.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw std::invalid_argument("schedule step '" + item + "' is not numeric");
    }
  }
  return LambdaSchedule(std::move(steps));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << contents;
    if (!f.flush()) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

void write_decisions_csv(std::ostream& out, const EpisodeResult& result,
                         const std::string& provenance) {
  out << "# " << provenance << '\n' << "time_s,policy,decision_latency_ms\n";
  for (const auto& s : result.switches) {
    out << fmt6(s.time) << ',' << to_string(s.policy) << ',' << fmt6(s.decision_latency_ms) << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive scheduling of inference streams on edge-cloud topologies", "aset"};
  app.require_subcommand(1);
  Flags f;

  auto* compare = app.add_subcommand("compare", "run static policies (and optionally an agent)");
  add_common(compare, f);
  compare->add_option("--policy", f.policies, "policies to run (default: all seven)");
  compare->add_option("--agent", f.agent, "also run this checkpoint greedily");

  auto* train = app.add_subcommand("train", "train the agent");
  add_common(train, f);
  train->add_option("--episodes", f.episodes, "total training episodes");
  train->add_option("--resume", f.resume, "continue from a checkpoint");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  add_common(eval, f);
  eval->add_option("--agent", f.agent, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (compare->parsed()) {
      const auto plan = build_plan(f, "compare");
      std::optional<AgentBundle> bundle;
      if (plan.agent) bundle = load_agent(*plan.agent);
      return run_grid(plan, bundle, out);
    }
    if (train->parsed()) {
      const auto plan = build_plan(f, "train");
      std::optional<fs::path> resume;
      if (!f.resume.empty()) resume = f.resume;
      return cmd_train(plan, resume, out);
    }
    auto plan = build_plan(f, "eval");
    plan.policies.clear();
    return run_grid(plan, load_agent(*plan.agent), out);
  } catch (const ValidationError& e) {
    err << "error: invalid configuration\n";
    for (const auto& v : e.violations()) err << "  - " << v << '\n';
    return 2;
  } catch (const agent::CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aset::cli
