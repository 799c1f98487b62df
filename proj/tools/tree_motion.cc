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

// Command line front end: check, train, rollout, gradcheck, eval, fixture.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "tree_motion/demos.h"
#include "tree_motion/errors.h"
#include "tree_motion/fixtures.h"
#include "tree_motion/gradients.h"
#include "tree_motion/learning.h"
#include "tree_motion/losses.h"
#include "tree_motion/rollout.h"
#include "tree_motion/spec_io.h"
#include "tree_motion/verification.h"

namespace tree_motion {
namespace {

using nlohmann::json;

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd ToEigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

void PrintJson(const json& j) { std::cout << j.dump(2) << std::endl; }

void WriteJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct Inputs {
  std::string tree;
  std::string params;
  std::string demos;
};

struct Session {
  LoadedTree loaded;
  std::optional<DemoSet> demos;
};

Session Load(const Inputs& in) {
  std::optional<DemoSet> demos;
  if (!in.demos.empty()) demos = ReadDemoCsvFile(in.demos);
  LoadOptions options;
  if (demos) options.demos = &*demos;
  std::optional<ParamsFile> params;
  if (!in.params.empty()) {
    params = ReadParamsFile(in.params);
    options.length_scales = params->length_scales;
  }
  LoadedTree loaded = LoadTreeFile(in.tree, options);
  if (params) AssignParams(params->params, loaded.params);
  if (demos && demos->dim() != loaded.tree.root_dim()) {
    throw StructuralError("demonstrations have dimension " +
                          std::to_string(demos->dim()) +
                          ", tree root has " +
                          std::to_string(loaded.tree.root_dim()));
  }
  return Session{std::move(loaded), std::move(demos)};
}

void AddInputs(CLI::App* cmd, Inputs& in, bool need_demos) {
  cmd->add_option("--tree", in.tree, "Tree specification (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--params", in.params,
                  "Parameter file (JSON); defaults to the initial parameters")
      ->check(CLI::ExistingFile);
  auto* demos = cmd->add_option("--demos", in.demos,
                                "Demonstrations (CSV: t,q0..,qd0..)")
                    ->check(CLI::ExistingFile);
  if (need_demos) demos->required();
}

// Runs a command body and maps library exceptions onto exit codes, printing
// a JSON error report.
template <typename Fn>
int Guarded(const std::string& command, Fn&& fn) {
  try {
    return fn();
  } catch (const StructuralError& e) {
    PrintJson({{"command", command}, {"status", "invalid"},
               {"error", e.what()}});
    return kExitValidation;
  } catch (const SingularMetricError& e) {
    PrintJson({{"command", command}, {"status", "singular"},
               {"error", e.what()}, {"min_eigenvalue", e.min_eigenvalue()}});
    return kExitNumeric;
  } catch (const NumericError& e) {
    PrintJson({{"command", command}, {"status", "numeric"},
               {"error", e.what()}});
    return kExitNumeric;
  }
}

int RunCheck(const Inputs& in, const CheckOptions& options,
             const std::string& report_path) {
  return Guarded("check", [&] {
    Session s = Load(in);
    VerificationReport report =
        CheckTree(s.loaded.tree, s.loaded.params.values(), options);
    report.json["command"] = "check";
    PrintJson(report.json);
    if (!report_path.empty()) WriteJsonFile(report_path, report.json);
    return report.exit_code;
  });
}

struct TrainArgs {
  std::string config;
  std::string out = "params.json";
  std::string history;
  std::optional<std::string> loss;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<double> alpha;
};

int RunTrain(const Inputs& in, const TrainArgs& args) {
  return Guarded("train", [&] {
    Session s = Load(in);
    const TransformTree& tree = s.loaded.tree;
    json config_json = json::object();
    if (!args.config.empty()) config_json = ReadJsonFile(args.config);
    if (args.loss) config_json["loss"]["kind"] = *args.loss;
    TrainConfig config = ParseTrainConfig(config_json, tree);
    if (args.seed) config.options.seed = *args.seed;
    if (args.iterations) config.options.iterations = *args.iterations;
    if (args.alpha) config.options.alpha = *args.alpha;

    const TrainResult result =
        Train(tree, s.loaded.params, *s.demos, config.loss, config.options);

    std::string history_path = args.history;
    if (history_path.empty()) {
      history_path =
          (std::filesystem::path(args.out).parent_path() / "history.csv")
              .string();
    }
    std::ofstream history(history_path);
    if (!history) throw StructuralError("cannot write " + history_path);
    history << "iteration,loss\n";
    for (size_t i = 0; i < result.history.size(); ++i) {
      history << i << "," << FormatNumber(result.history[i]) << "\n";
    }

    const bool aborted = result.status == TrainStatus::kAborted;
    const std::string params_path = aborted ? args.out + ".partial" : args.out;
    WriteParamsFile(params_path, result.params, s.loaded.length_scales);
    json summary = {
        {"command", "train"},
        {"status", aborted ? "aborted" : "completed"},
        {"loss_kind", LossKindName(config.loss.kind)},
        {"iterations", config.options.iterations},
        {"alpha", result.alpha},
        {"params", params_path},
        {"history", history_path}};
    if (!result.history.empty()) {
      summary["initial_loss"] = result.history.front();
      summary["final_loss"] = result.history.back();
    }
    if (aborted) summary["error"] = result.message;
    PrintJson(summary);
    return aborted ? kExitNumeric : kExitOk;
  });
}

struct RolloutArgs {
  std::vector<double> q0;
  RolloutOptions options;
  std::string out = "trajectory.csv";
  std::string summary;
};

int RunRollout(const Inputs& in, const RolloutArgs& args) {
  return Guarded("rollout", [&] {
    Session s = Load(in);
    const RolloutResult result = Integrate(
        s.loaded.tree, s.loaded.params.values(), ToEigen(args.q0),
        args.options);
    std::ofstream out(args.out);
    if (!out) throw StructuralError("cannot write " + args.out);
    const bool has_phi = !result.potential_trace.empty();
    WriteTrajectoryCsv(out, result.trajectory,
                       has_phi ? &result.potential_trace : nullptr);

    json summary = {{"command", "rollout"},
                    {"status", RolloutStatusName(result.status)},
                    {"steps", result.steps},
                    {"dt", args.options.dt},
                    {"terminal_grad_norm", result.terminal_grad_norm},
                    {"max_descent_rate", result.max_descent_rate},
                    {"trajectory", args.out}};
    if (!result.trajectory.empty()) {
      summary["final_q"] = ToStd(result.trajectory.back().q);
    }
    if (has_phi) {
      const LyapunovReport lyap = LyapunovCheck(result, args.options.dt);
      summary["phi_initial"] = result.potential_trace.front();
      summary["phi_final"] = result.potential_trace.back();
      summary["lyapunov_max_violation"] = lyap.max_violation;
      summary["lyapunov_slack"] = lyap.slack;
    }
    if (!result.message.empty()) summary["error"] = result.message;
    const std::string summary_path =
        args.summary.empty() ? args.out + ".summary.json" : args.summary;
    WriteJsonFile(summary_path, summary);
    PrintJson(summary);
    return result.status == RolloutStatus::kConverged ? kExitOk
                                                      : kExitNumeric;
  });
}

struct GradCheckArgs {
  std::string config;
  std::optional<std::string> loss;
  GradCheckOptions options;
};

int RunGradCheck(const Inputs& in, const GradCheckArgs& args) {
  return Guarded("gradcheck", [&] {
    Session s = Load(in);
    json config_json = json::object();
    if (!args.config.empty()) config_json = ReadJsonFile(args.config);
    if (args.loss) config_json["loss"]["kind"] = *args.loss;
    const TrainConfig config = ParseTrainConfig(config_json, s.loaded.tree);
    VerificationReport report = GradCheck(
        s.loaded.tree, s.loaded.params.values(), s.loaded.params.TrainableMask(),
        *s.demos, config.loss, args.options);
    report.json["command"] = "gradcheck";
    report.json["loss_kind"] = LossKindName(config.loss.kind);
    PrintJson(report.json);
    return report.exit_code;
  });
}

int RunEval(const Inputs& in, const std::vector<double>& q) {
  return Guarded("eval", [&] {
    Session s = Load(in);
    const Eigen::VectorXd config = ToEigen(q);
    if (config.size() != s.loaded.tree.root_dim()) {
      throw StructuralError("q has dimension " +
                            std::to_string(config.size()) + ", tree root has " +
                            std::to_string(s.loaded.tree.root_dim()));
    }
    const RootSolution sol =
        SolveAtRoot(s.loaded.tree, config, s.loaded.params.values());
    json out = {{"command", "eval"},
                {"q", q},
                {"pi", ToStd(sol.velocity)},
                {"force", ToStd(sol.force)}};
    json metric = json::array();
    for (int r = 0; r < sol.metric.rows(); ++r) {
      metric.push_back(ToStd(sol.metric.row(r).transpose()));
    }
    out["metric"] = std::move(metric);
    PrintJson(out);
    return kExitOk;
  });
}

int RunFixture(const std::string& name, const std::string& dir,
               std::uint64_t seed) {
  return Guarded("fixture", [&] {
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);
    json written = json::array();
    if (name == "reaching") {
      WriteJsonFile((root / "reaching_tree.json").string(), ReachingTreeSpec());
      written.push_back((root / "reaching_tree.json").string());
    } else if (name == "redundant_arm") {
      RedundantDemoOptions options;
      options.seed = seed;
      const DemoSet demos = RedundantArmDemos(options);
      const std::string demo_path = (root / "redundant_arm_demos.csv").string();
      std::ofstream out(demo_path);
      if (!out) throw StructuralError("cannot write " + demo_path);
      WriteDemoCsv(out, demos);
      WriteJsonFile((root / "redundant_arm_tree.json").string(),
                    RedundantArmTreeSpec());
      WriteJsonFile((root / "redundant_arm_train.json").string(),
                    RedundantArmTrainConfig(kRedundantArmIterations, seed));
      written = {demo_path, (root / "redundant_arm_tree.json").string(),
                 (root / "redundant_arm_train.json").string()};
    } else {
      throw StructuralError("unknown fixture '" + name +
                            "'; available: reaching, redundant_arm");
    }
    PrintJson({{"command", "fixture"}, {"written", written}});
    return kExitOk;
  });
}

int Main(int argc, char** argv) {
  CLI::App app{"Transform-tree motion policies: composition, learning from "
               "demonstration and rollout."};
  app.require_subcommand(1);

  Inputs inputs;

  CheckOptions check_options;
  std::string check_report;
  auto* check = app.add_subcommand(
      "check", "Validate a tree and compare the tree solver against a flat "
               "least-squares solve and finite-difference Jacobians");
  AddInputs(check, inputs, false);
  check->add_option("--points", check_options.points,
                    "Number of test configurations (the first is the origin)")
      ->check(CLI::PositiveNumber);
  check->add_option("--radius", check_options.radius,
                    "Half-width of the sampling box around the origin");
  check->add_option("--seed", check_options.seed, "Sampling seed");
  check->add_option("--report", check_report, "Also write the JSON report here");

  TrainArgs train_args;
  auto* train = app.add_subcommand(
      "train", "Fit learnable parameters to demonstrations by gradient descent");
  AddInputs(train, inputs, true);
  train->add_option("--config", train_args.config,
                    "Training config (JSON: loss, alpha, iterations, seed)")
      ->check(CLI::ExistingFile);
  train->add_option("--out", train_args.out, "Output parameter file")
      ->capture_default_str();
  train->add_option("--history", train_args.history,
                    "Loss history CSV (default: history.csv next to --out)");
  train->add_option("--loss", train_args.loss, "Loss to minimize")
      ->check(CLI::IsMember({"subtask", "joint", "independent"}));
  train->add_option("--seed", train_args.seed, "Seed (overrides the config)");
  train->add_option("--iterations", train_args.iterations,
                    "Iterations (overrides the config)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--alpha", train_args.alpha,
                    "Step size (overrides the config; default: line search)")
      ->check(CLI::PositiveNumber);

  RolloutArgs rollout_args;
  std::uint64_t rollout_seed = 0;
  auto* rollout = app.add_subcommand(
      "rollout", "Integrate qdot = pi(q) with RK4 and monitor the potential");
  AddInputs(rollout, inputs, false);
  rollout->add_option("--q0", rollout_args.q0, "Initial configuration")
      ->required()
      ->delimiter(',');
  rollout->add_option("--dt", rollout_args.options.dt, "Step size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rollout->add_option("--max-steps", rollout_args.options.max_steps,
                      "Step limit")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  rollout->add_option("--grad-tol", rollout_args.options.grad_tol,
                      "Stop when the root force norm falls below this")
      ->capture_default_str();
  rollout->add_option("--out", rollout_args.out, "Trajectory CSV")
      ->capture_default_str();
  rollout->add_option("--summary", rollout_args.summary,
                      "Summary JSON (default: <out>.summary.json)");
  rollout->add_option("--seed", rollout_seed,
                      "Accepted for uniformity; rollouts are deterministic");

  GradCheckArgs grad_args;
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Compare the analytic loss gradient with central finite "
                   "differences");
  AddInputs(gradcheck, inputs, true);
  gradcheck->add_option("--config", grad_args.config, "Training config (JSON)")
      ->check(CLI::ExistingFile);
  gradcheck->add_option("--loss", grad_args.loss, "Loss to check")
      ->check(CLI::IsMember({"subtask", "joint", "independent"}));
  gradcheck->add_option("--max-coords", grad_args.options.max_coordinates,
                        "Check at most this many parameters (0 = all)")
      ->capture_default_str();
  gradcheck->add_option("--seed", grad_args.options.seed,
                        "Seed for choosing the checked parameters");
  gradcheck->add_flag("--corrupt-gradient", grad_args.options.corrupt)
      ->group("");

  std::vector<double> eval_q;
  auto* eval = app.add_subcommand("eval", "Print pi(q) and the root force "
                                          "and metric");
  AddInputs(eval, inputs, false);
  eval->add_option("--q", eval_q, "Configuration")->required()->delimiter(',');

  std::string fixture_name, fixture_dir = ".";
  std::uint64_t fixture_seed = 0;
  auto* fixture = app.add_subcommand(
      "fixture", "Write a built-in example tree (and demonstrations)");
  fixture->add_option("name", fixture_name, "reaching | redundant_arm")
      ->required();
  fixture->add_option("--dir", fixture_dir, "Output directory")
      ->capture_default_str();
  fixture->add_option("--seed", fixture_seed, "Demonstration seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*check) return RunCheck(inputs, check_options, check_report);
  if (*train) return RunTrain(inputs, train_args);
  if (*rollout) return RunRollout(inputs, rollout_args);
  if (*gradcheck) return RunGradCheck(inputs, grad_args);
  if (*eval) return RunEval(inputs, eval_q);
  if (*fixture) return RunFixture(fixture_name, fixture_dir, fixture_seed);
  return kExitUsage;
}

}  // namespace
}  // namespace tree_motion

int main(int argc, char** argv) { return tree_motion::Main(argc, argv); }
