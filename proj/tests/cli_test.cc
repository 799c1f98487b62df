// Copyright 2026 The tree_motion Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the command line tool as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int exit_code = -1;
  std::string out;
};

Result RunCli(const std::string& args, const std::string& env = "") {
  const std::string command =
      env + " " + TREE_MOTION_CLI + " " + args + " 2>/dev/null";
  Result result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.out.append(buffer, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tree_motion_cli_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  void WriteArmFixture() {
    ASSERT_EQ(RunCli("fixture redundant_arm --dir " + dir_.string()).exit_code, 0);
  }

  std::string ArmInputs() const {
    return "--tree " + P("redundant_arm_tree.json") + " --demos " +
           P("redundant_arm_demos.csv");
  }

  fs::path dir_;
};

constexpr char kTwoLinkTree[] = R"({
  "nodes": [{"id": 0, "dim": 2}, {"id": 1, "dim": 2}, {"id": 2, "dim": 2}],
  "edges": [
    {"parent": 0, "child": 1, "name": "fk",
     "map": {"kind": "planar_arm_fk", "lengths": [1, 1]}},
    {"parent": 0, "child": 2, "map": {"kind": "identity"}}
  ],
  "leaves": [
    {"node": 1, "policy": {"kind": "attractor", "goal": [1, 1]}},
    {"node": 2, "policy": {"kind": "damper", "gain": 0.5}}
  ]
})";

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(RunCli("").exit_code, 1);
  EXPECT_EQ(RunCli("frobnicate").exit_code, 1);
  EXPECT_EQ(RunCli("check").exit_code, 1);
  EXPECT_EQ(RunCli("check --tree " + P("missing.json")).exit_code, 1);
  EXPECT_EQ(RunCli("--help").exit_code, 0);
}

TEST_F(CliTest, CheckPassesOnValidTree) {
  WriteFile(P("tree.json"), kTwoLinkTree);
  const Result r = RunCli("check --tree " + P("tree.json"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  const json report = json::parse(r.out);
  EXPECT_EQ(report["status"], "pass");
  EXPECT_EQ(report["points"].size(), 10u);
}

TEST_F(CliTest, CheckNamesMismatchedEdge) {
  json tree = json::parse(kTwoLinkTree);
  tree["nodes"][1]["dim"] = 3;
  WriteFile(P("tree.json"), tree.dump());
  const Result r = RunCli("check --tree " + P("tree.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(json::parse(r.out)["error"].get<std::string>().find("fk"),
            std::string::npos)
      << r.out;
}

TEST_F(CliTest, CheckReportsSingularRootMetric) {
  json tree = json::parse(kTwoLinkTree);
  tree["edges"].erase(1);
  tree["nodes"].erase(2);
  tree["leaves"].erase(1);
  WriteFile(P("tree.json"), tree.dump());
  const Result r = RunCli("check --tree " + P("tree.json"));
  EXPECT_EQ(r.exit_code, 3);
  const json report = json::parse(r.out);
  EXPECT_EQ(report["failures"][0]["kind"], "singular_root_metric");
}

TEST_F(CliTest, EvalPrintsPolicy) {
  WriteFile(P("tree.json"), kTwoLinkTree);
  const Result r = RunCli("eval --tree " + P("tree.json") + " --q 0.1,0.2");
  ASSERT_EQ(r.exit_code, 0);
  const json out = json::parse(r.out);
  EXPECT_EQ(out["pi"].size(), 2u);
  EXPECT_EQ(RunCli("eval --tree " + P("tree.json") + " --q 0.1").exit_code, 2);
}

TEST_F(CliTest, RolloutWritesTrajectoryAndSummary) {
  WriteFile(P("tree.json"), kTwoLinkTree);
  const Result r = RunCli("rollout --tree " + P("tree.json") +
                       " --q0 0.3,0.5 --out " + P("traj.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json summary = json::parse(ReadFile(P("traj.csv.summary.json")));
  EXPECT_EQ(summary["status"], "converged");
  std::ifstream traj(P("traj.csv"));
  std::string header;
  std::getline(traj, header);
  EXPECT_EQ(header, "t,q0,q1,qd0,qd1,phi");
  double previous = 1e300;
  std::string line;
  while (std::getline(traj, line)) {
    const double phi = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LE(phi, previous + 1e-12);
    previous = phi;
  }
}

TEST_F(CliTest, RolloutAtEquilibriumTakesNoSteps) {
  json tree = json::parse(kTwoLinkTree);
  tree["leaves"][0]["policy"]["goal"] = {2, 0};
  WriteFile(P("tree.json"), tree.dump());
  const Result r = RunCli("rollout --tree " + P("tree.json") + " --q0 0,0 --out " +
                       P("traj.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["steps"], 0);
}

TEST_F(CliTest, RolloutInsideObstacleFails) {
  const json tree = json::parse(R"({
    "nodes": [{"id": 0, "dim": 2}, {"id": 1, "dim": 1}, {"id": 2, "dim": 2}],
    "edges": [
      {"parent": 0, "child": 1,
       "map": {"kind": "distance_to_point", "center": [1, 1]}},
      {"parent": 0, "child": 2, "map": {"kind": "identity"}}
    ],
    "leaves": [
      {"node": 1, "policy": {"kind": "barrier", "margin": 0.5}},
      {"node": 2, "policy": {"kind": "damper"}}
    ]
  })");
  WriteFile(P("tree.json"), tree.dump());
  const Result r = RunCli("rollout --tree " + P("tree.json") + " --q0 1,1 --out " +
                       P("traj.csv"));
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(json::parse(r.out)["status"], "error");
}

TEST_F(CliTest, ZeroIterationsKeepInitialParams) {
  WriteArmFixture();
  ASSERT_EQ(RunCli("train " + ArmInputs() + " --iterations 0 --out " +
                P("zero.json"))
                .exit_code,
            0);
  ASSERT_EQ(RunCli("train " + ArmInputs() + " --iterations 0 --out " +
                P("zero_again.json") + " --loss joint")
                .exit_code,
            0);
  const json a = json::parse(ReadFile(P("zero.json")));
  const json b = json::parse(ReadFile(P("zero_again.json")));
  EXPECT_EQ(a["values"], b["values"]);
  // Evaluating the untrained params is the same as evaluating no params.
  const Result with = RunCli("eval " + ArmInputs() + " --params " + P("zero.json") +
                          " --q 0.1,0.5,0.4");
  const Result without = RunCli("eval " + ArmInputs() + " --q 0.1,0.5,0.4");
  EXPECT_EQ(json::parse(with.out)["pi"], json::parse(without.out)["pi"]);
}

TEST_F(CliTest, TrainingIsDeterministicAcrossThreadCounts) {
  WriteArmFixture();
  const std::string args = "train " + ArmInputs() + " --config " +
                           P("redundant_arm_train.json") + " --iterations 5";
  ASSERT_EQ(RunCli(args + " --out " + P("a.json"), "TREE_MOTION_THREADS=1").exit_code,
            0);
  ASSERT_EQ(RunCli(args + " --out " + P("b.json"), "TREE_MOTION_THREADS=4").exit_code,
            0);
  EXPECT_EQ(ReadFile(P("a.json")), ReadFile(P("b.json")));
  EXPECT_TRUE(fs::exists(P("history.csv")));
}

TEST_F(CliTest, SubtaskTrainingReducesLossTenfold) {
  WriteArmFixture();
  const Result r = RunCli("train " + ArmInputs() + " --config " +
                       P("redundant_arm_train.json") + " --out " +
                       P("params.json") + " --history " + P("history.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json summary = json::parse(r.out);
  EXPECT_LE(summary["final_loss"].get<double>() * 10.0,
            summary["initial_loss"].get<double>());
  const std::string history = ReadFile(P("history.csv"));
  EXPECT_EQ(history.rfind("iteration,loss\n", 0), 0u);

  // The trained parameters load back and pass the gradient check.
  const Result grad = RunCli("gradcheck " + ArmInputs() + " --params " +
                          P("params.json") + " --max-coords 40");
  EXPECT_EQ(grad.exit_code, 0) << grad.out;
}

TEST_F(CliTest, DivergentTrainingWritesPartialParams) {
  WriteArmFixture();
  const Result r = RunCli("train " + ArmInputs() + " --alpha 1e6 --iterations 50 "
                       "--out " + P("params.json"));
  EXPECT_EQ(r.exit_code, 3) << r.out;
  EXPECT_EQ(json::parse(r.out)["status"], "aborted");
  EXPECT_TRUE(fs::exists(P("params.json.partial")));
  EXPECT_FALSE(fs::exists(P("params.json")));
}

TEST_F(CliTest, GradcheckDetectsCorruptedGradient) {
  WriteArmFixture();
  const std::string args =
      "gradcheck " + ArmInputs() + " --max-coords 30";
  const Result good = RunCli(args);
  EXPECT_EQ(good.exit_code, 0) << good.out;
  const Result bad = RunCli(args + " --corrupt-gradient");
  EXPECT_EQ(bad.exit_code, 3) << bad.out;
  EXPECT_EQ(json::parse(bad.out)["status"], "fail");
}

TEST_F(CliTest, GradcheckFrozenTreePassesTrivially) {
  WriteArmFixture();
  json tree = json::parse(ReadFile(P("redundant_arm_tree.json")));
  tree["leaves"][0]["policy"]["learnable"] = false;
  tree["edges"][1]["map"]["learnable"] = false;
  WriteFile(P("frozen.json"), tree.dump());
  const Result r = RunCli("gradcheck --tree " + P("frozen.json") + " --demos " +
                       P("redundant_arm_demos.csv") + " --loss joint");
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["checked"], 0);
}

TEST_F(CliTest, DemoDimensionMismatchIsValidationError) {
  WriteFile(P("tree.json"), kTwoLinkTree);
  WriteFile(P("demos.csv"), "t,q0,q1,q2,qd0,qd1,qd2\n0,0,0,0,1,1,1\n");
  const Result r = RunCli("train --tree " + P("tree.json") + " --demos " +
                       P("demos.csv") + " --out " + P("p.json"));
  EXPECT_EQ(r.exit_code, 2) << r.out;
}

}  // namespace
