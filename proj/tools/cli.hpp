#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aset/agent/state.hpp"
#include "aset/agent/trainer.hpp"
#include "aset/simulator.hpp"

namespace aset::cli {

/// One workload variant of a plan: a constant rate or a step schedule.
struct LambdaSetting {
  std::string label;  // "20", "schedule"
  LambdaSchedule schedule;
};

struct ExperimentPlan {
  EpisodeConfig episode;
  std::vector<LambdaSetting> lambdas;
  std::vector<PolicyKind> policies;
  std::optional<std::filesystem::path> agent;
  std::vector<std::uint64_t> seeds{0};
  std::size_t repetitions = 1;  // extra seeds derived from each listed seed
  agent::Hyperparams hyperparams;
  agent::FeaturePartition partition;
  std::filesystem::path out = "out";

  /// Seeds actually run: each listed seed, then repetitions-1 derived ones.
  std::vector<std::uint64_t> run_seeds() const;
  void validate() const;
};

/// Applies a config document on top of `plan`. Relative paths resolve
/// against `base_dir`. Throws ValidationError listing every problem.
void apply_config(ExperimentPlan& plan, const nlohmann::json& doc,
                  const std::filesystem::path& base_dir);

/// "0:20,150:60,300:100" -> steps.
LambdaSchedule parse_lambda_schedule(const std::string& text);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Per-tick policy switches with measured decision latency.
void write_decisions_csv(std::ostream& out, const EpisodeResult& result,
                         const std::string& provenance);

/// Entry point shared by the binary and the tests. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aset::cli
