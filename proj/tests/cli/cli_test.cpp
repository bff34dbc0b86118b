#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace aset::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aset_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "aset");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path write_config(const std::string& name, const nlohmann::json& doc) {
    const auto p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, CompareWritesOneFilePerRunAndSummary) {
  const auto out = dir_ / "cmp";
  ASSERT_EQ(invoke({"compare", "--lambda", "20", "--seed", "0", "1", "2", "--horizon", "30",
                    "--out", out.string()}),
            0)
      << err_.str();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(out / "runs")) {
    EXPECT_EQ(e.path().extension(), ".csv");
    ++files;
  }
  EXPECT_EQ(files, 21u);
  EXPECT_TRUE(fs::exists(out / "runs" / "closest_lambda20_seed1.csv"));
  const auto summary = lines(out / "summary.csv");
  ASSERT_EQ(summary.size(), 2u + 7u);
  EXPECT_EQ(summary[0].rfind("# config_hash=", 0), 0u);
  EXPECT_EQ(summary[1], "policy,lambda,runs,mean_success,std_success,mean_fail,mean_reject");
  EXPECT_EQ(summary[2].rfind("closest,20,3,", 0), 0u);
  const auto run = lines(out / "runs" / "rp_load_lambda20_seed2.csv");
  ASSERT_GE(run.size(), 2u);
  EXPECT_NE(run[0].find(" seed=2"), std::string::npos);
}

TEST_F(CliTest, CompareIsByteDeterministic) {
  const std::vector<std::string> common = {"compare", "--policy", "rp_latency", "--lambda", "20",
                                           "--seed", "4", "--horizon", "40"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", (dir_ / "a").string()});
  b.insert(b.end(), {"--out", (dir_ / "b").string()});
  ASSERT_EQ(invoke(a), 0) << err_.str();
  ASSERT_EQ(invoke(b), 0) << err_.str();
  const std::string name = "runs/rp_latency_lambda20_seed4.csv";
  EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.csv"), slurp(dir_ / "b" / "summary.csv"));
}

TEST_F(CliTest, ScheduleAndMultipleLambdasGetTheirOwnLabels) {
  const auto out = dir_ / "sched";
  ASSERT_EQ(invoke({"compare", "--policy", "closest", "--lambda", "20", "--lambda", "60",
                    "--lambda-schedule", "0:20,10:60", "--horizon", "20", "--out", out.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(out / "runs" / "closest_lambda20_seed0.csv"));
  EXPECT_TRUE(fs::exists(out / "runs" / "closest_lambda60_seed0.csv"));
  EXPECT_TRUE(fs::exists(out / "runs" / "closest_lambdaschedule_seed0.csv"));
  EXPECT_EQ(lines(out / "summary.csv").size(), 2u + 3u);
}

TEST_F(CliTest, RepetitionsDeriveExtraSeeds) {
  ExperimentPlan plan;
  plan.seeds = {5, 9};
  plan.repetitions = 3;
  const auto seeds = plan.run_seeds();
  ASSERT_EQ(seeds.size(), 6u);
  EXPECT_EQ(seeds[0], 5u);
  EXPECT_EQ(seeds[3], 9u);
  EXPECT_NE(seeds[1], seeds[2]);
}

TEST_F(CliTest, MissingCatalogFails) {
  EXPECT_NE(invoke({"compare", "--catalog", (dir_ / "nope.json").string(), "--out",
                    (dir_ / "x").string()}),
            0);
  EXPECT_NE(err_.str().find("error"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "x" / "summary.csv"));
}

TEST_F(CliTest, BadInputsFailWithNonzeroStatus) {
  EXPECT_NE(invoke({"compare", "--policy", "fastest"}), 0);
  EXPECT_NE(invoke({"compare", "--topology", "mesh"}), 0);
  EXPECT_NE(invoke({"compare", "--lambda-schedule", "0-20"}), 0);
  EXPECT_NE(invoke({"compare", "--lambda", "-3"}), 0);
  EXPECT_NE(invoke({"frobnicate"}), 0);
  EXPECT_NE(invoke({"eval"}), 0);  // --agent is required
  const auto cfg = write_config("bad.json", {{"horizon", 10}});
  EXPECT_NE(invoke({"compare", "--config", cfg.string()}), 0);
  EXPECT_NE(err_.str().find("unknown config key 'horizon'"), std::string::npos);
}

TEST_F(CliTest, ConfigOverridesFlags) {
  ExperimentPlan plan;
  plan.episode.horizon_s = 100;
  apply_config(plan,
               {{"horizon_s", 50},
                {"topology", {{"preset", "dc-cloud"}, {"params", {{"own_access_std_ms", 2.0}}}}},
                {"lambdas", {20, 60}},
                {"policies", "all"},
                {"hyperparams", {{"gamma", 0.5}}}},
               {});
  EXPECT_EQ(plan.episode.horizon_s, 50);
  EXPECT_EQ(plan.hyperparams.horizon_s, 50);
  EXPECT_EQ(plan.episode.topology_preset, "dc-cloud");
  EXPECT_EQ(plan.lambdas.size(), 2u);
  EXPECT_EQ(plan.lambdas[1].label, "60");
  EXPECT_EQ(plan.policies.size(), 7u);
  EXPECT_EQ(plan.hyperparams.gamma, 0.5);
  EXPECT_THROW(apply_config(plan, {{"topology", {{"shape", "x"}}}}, {}), ValidationError);
}

TEST_F(CliTest, ParseLambdaSchedule) {
  const auto s = parse_lambda_schedule("0:20,150:60,300:100");
  ASSERT_EQ(s.steps().size(), 3u);
  EXPECT_EQ(s.at(149.9), 20);
  EXPECT_EQ(s.at(150), 60);
  EXPECT_EQ(s.at(1000), 100);
  EXPECT_THROW(parse_lambda_schedule("0:20,x:1"), std::invalid_argument);
}

TEST_F(CliTest, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST_F(CliTest, AtomicWriteReplacesContents) {
  const auto p = dir_ / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(slurp(p), "two");
  EXPECT_FALSE(fs::exists(dir_ / "f.txt.tmp"));
}

class CliTrainTest : public CliTest {
 protected:
  fs::path toy_config() {
    return write_config("toy.json",
                        {{"lambdas", {20}},
                         {"hyperparams",
                          {{"horizon_s", 50.0},
                           {"window_s", 25.0},
                           {"gradient_steps", 2},
                           {"batch_size", 2},
                           {"buffer_size", 64},
                           {"seed_pool", 2}}}});
  }
};

TEST_F(CliTrainTest, TrainWritesCurveAndCheckpointThenResumes) {
  const auto out = dir_ / "train";
  const auto cfg = toy_config();
  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--episodes", "10", "--out", out.string()}),
            0)
      << err_.str();
  auto curve = lines(out / "learning_curve.csv");
  ASSERT_EQ(curve.size(), 2u + 10u);
  EXPECT_EQ(curve[1].rfind("episode,", 0), 0u);
  EXPECT_EQ(curve[2].rfind("0,", 0), 0u);
  EXPECT_EQ(curve[11].rfind("9,", 0), 0u);
  ASSERT_TRUE(fs::exists(out / "agent.json"));

  ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--episodes", "13", "--resume",
                    (out / "agent.json").string(), "--out", out.string()}),
            0)
      << err_.str();
  curve = lines(out / "learning_curve.csv");
  ASSERT_EQ(curve.size(), 2u + 13u);
  EXPECT_EQ(curve[12].rfind("10,", 0), 0u);
  EXPECT_EQ(curve[14].rfind("12,", 0), 0u);

  const auto eval_out = dir_ / "eval";
  ASSERT_EQ(invoke({"eval", "--agent", (out / "agent.json").string(), "--lambda", "20",
                    "--horizon", "50", "--out", eval_out.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(eval_out / "runs" / "aset_lambda20_seed0.csv"));
  const auto decisions = lines(eval_out / "runs" / "aset_lambda20_seed0_decisions.csv");
  ASSERT_EQ(decisions.size(), 2u + 2u);  // ticks at 0 and 25
  EXPECT_EQ(decisions[1], "time_s,policy,decision_latency_ms");
  const auto summary = lines(eval_out / "summary.csv");
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[2].rfind("aset,20,1,", 0), 0u);
}

TEST_F(CliTrainTest, CorruptCheckpointIsRejected) {
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\"format\": \"aset-checkpoint\", \"version\": 1, \"par";
  EXPECT_NE(invoke({"train", "--config", toy_config().string(), "--resume", bad.string(), "--out",
                    (dir_ / "o").string()}),
            0);
  EXPECT_NE(invoke({"eval", "--agent", bad.string(), "--out", (dir_ / "o").string()}), 0);
  EXPECT_NE(invoke({"eval", "--agent", (dir_ / "missing.json").string()}), 0);
}

TEST_F(CliTrainTest, AgentMustMatchTopology) {
  const auto out = dir_ / "t";
  ASSERT_EQ(invoke({"train", "--config", toy_config().string(), "--episodes", "1", "--out",
                    out.string()}),
            0)
      << err_.str();
  EXPECT_NE(invoke({"eval", "--agent", (out / "agent.json").string(), "--topology", "dc-cloud",
                    "--out", (dir_ / "e").string()}),
            0);
}

}  // namespace
}  // namespace aset::cli
