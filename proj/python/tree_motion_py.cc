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

// Python bindings for loading trees, evaluating policies, training and
// verification.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tree_motion/demos.h"
#include "tree_motion/errors.h"
#include "tree_motion/fixtures.h"
#include "tree_motion/flat_solver.h"
#include "tree_motion/learning.h"
#include "tree_motion/losses.h"
#include "tree_motion/rollout.h"
#include "tree_motion/spec_io.h"
#include "tree_motion/transform_tree.h"
#include "tree_motion/verification.h"

namespace py = pybind11;
using nlohmann::json;

namespace tree_motion {
namespace {

// Tuples of (t, q, qdot) with shapes (n,), (n, d), (n, d).
using TrajectoryArrays =
    std::tuple<Eigen::VectorXd, Eigen::MatrixXd, Eigen::MatrixXd>;

py::object ToPython(const json& value) {
  return py::module_::import("json").attr("loads")(value.dump());
}

json FromPython(const py::object& value) {
  return json::parse(
      py::module_::import("json").attr("dumps")(value).cast<std::string>());
}

TrajectoryArrays ToArrays(const Trajectory& trajectory) {
  const int n = static_cast<int>(trajectory.size());
  const int d = n > 0 ? static_cast<int>(trajectory[0].q.size()) : 0;
  Eigen::VectorXd t(n);
  Eigen::MatrixXd q(n, d), qdot(n, d);
  for (int i = 0; i < n; ++i) {
    t(i) = trajectory[i].t;
    q.row(i) = trajectory[i].q.transpose();
    qdot.row(i) = trajectory[i].qdot.transpose();
  }
  return {t, q, qdot};
}

DemoSet DemosFromArrays(const std::vector<TrajectoryArrays>& arrays) {
  DemoSet demos;
  for (const auto& [t, q, qdot] : arrays) {
    if (q.rows() != t.size() || qdot.rows() != t.size() ||
        qdot.cols() != q.cols()) {
      throw StructuralError("trajectory arrays have inconsistent shapes");
    }
    Trajectory trajectory(t.size());
    for (int i = 0; i < t.size(); ++i) {
      trajectory[i].t = t(i);
      trajectory[i].q = q.row(i).transpose();
      trajectory[i].qdot = qdot.row(i).transpose();
    }
    demos.trajectories.push_back(std::move(trajectory));
  }
  demos.Validate();
  return demos;
}

// A loaded tree together with its current parameters.
class Model {
 public:
  explicit Model(LoadedTree loaded) : loaded_(std::move(loaded)) {}

  static Model FromJson(const py::object& spec, const DemoSet* demos) {
    LoadOptions options;
    options.demos = demos;
    return Model(LoadTree(FromPython(spec), options));
  }

  static Model FromFile(const std::string& path, const DemoSet* demos,
                        const std::optional<std::string>& params_path) {
    LoadOptions options;
    options.demos = demos;
    std::optional<ParamsFile> params;
    if (params_path) {
      params = ReadParamsFile(*params_path);
      options.length_scales = params->length_scales;
    }
    Model model(LoadTreeFile(path, options));
    if (params) AssignParams(params->params, model.loaded_.params);
    return model;
  }

  const TransformTree& tree() const { return loaded_.tree; }
  ParamVector& params() { return loaded_.params; }

  Eigen::VectorXd CheckedConfig(const Eigen::VectorXd& q) const {
    if (q.size() != tree().root_dim()) {
      throw StructuralError("q has dimension " + std::to_string(q.size()) +
                            ", tree root has " +
                            std::to_string(tree().root_dim()));
    }
    return q;
  }

  void CheckDemos(const DemoSet& demos) const {
    demos.Validate();
    if (demos.dim() != tree().root_dim()) {
      throw StructuralError("demonstrations have dimension " +
                            std::to_string(demos.dim()) + ", tree root has " +
                            std::to_string(tree().root_dim()));
    }
  }

  TrainConfig Config(const py::object& config,
                     const std::optional<std::string>& loss) const {
    json config_json = config.is_none() ? json::object() : FromPython(config);
    if (loss) config_json["loss"]["kind"] = *loss;
    return ParseTrainConfig(config_json, tree());
  }

  void SaveParams(const std::string& path) const {
    WriteParamsFile(path, loaded_.params, loaded_.length_scales);
  }

  void LoadParams(const std::string& path) {
    AssignParams(ReadParamsFile(path).params, loaded_.params);
  }

  const std::map<std::string, double>& length_scales() const {
    return loaded_.length_scales;
  }

 private:
  LoadedTree loaded_;
};

void DefineModule(py::module_& m) {
  m.doc() = "Transform-tree motion policies";

  auto structural = py::register_exception<StructuralError>(
      m, "StructuralError", PyExc_ValueError);
  auto numeric = py::register_exception<NumericError>(m, "NumericError",
                                                      PyExc_ArithmeticError);
  py::register_exception<SingularMetricError>(m, "SingularMetricError",
                                              numeric.ptr());
  py::register_exception<DomainError>(m, "DomainError", numeric.ptr());
  (void)structural;

  py::class_<DemoSet>(m, "DemoSet")
      .def(py::init(&DemosFromArrays), py::arg("trajectories"),
           "Builds demonstrations from a list of (t, q, qdot) arrays.")
      .def_static("from_csv", &ReadDemoCsvFile, py::arg("path"))
      .def("to_csv",
           [](const DemoSet& demos, const std::string& path) {
             std::ofstream out(path);
             if (!out) throw StructuralError("cannot write " + path);
             WriteDemoCsv(out, demos);
           },
           py::arg("path"))
      .def("trajectories",
           [](const DemoSet& demos) {
             std::vector<TrajectoryArrays> arrays;
             for (const auto& t : demos.trajectories) {
               arrays.push_back(ToArrays(t));
             }
             return arrays;
           })
      .def_property_readonly("dim", &DemoSet::dim)
      .def_property_readonly("num_samples", &DemoSet::num_samples)
      .def("__len__",
           [](const DemoSet& demos) { return demos.trajectories.size(); });

  py::class_<Model>(m, "Model")
      .def_static("from_json", &Model::FromJson, py::arg("spec"),
                  py::arg("demos") = nullptr)
      .def_static("from_file", &Model::FromFile, py::arg("path"),
                  py::arg("demos") = nullptr, py::arg("params") = py::none())
      .def_property_readonly("root_dim",
                             [](const Model& m) { return m.tree().root_dim(); })
      .def_property_readonly(
          "num_nodes", [](const Model& m) { return m.tree().num_nodes(); })
      .def_property_readonly(
          "leaves",
          [](const Model& m) {
            std::vector<std::string> labels;
            for (int i = 0; i < m.tree().num_leaves(); ++i) {
              labels.push_back(m.tree().LeafLabel(i));
            }
            return labels;
          })
      .def_property(
          "params", [](Model& m) { return m.params().values(); },
          [](Model& m, const Eigen::VectorXd& values) {
            m.params().SetValues(values);
          })
      .def_property_readonly(
          "trainable_mask", [](Model& m) { return m.params().TrainableMask(); })
      .def_property_readonly(
          "param_names",
          [](Model& m) {
            std::vector<std::string> names;
            for (const auto& e : m.params().registry()) names.push_back(e.name);
            return names;
          })
      .def_property_readonly("length_scales", &Model::length_scales)
      .def("save_params", &Model::SaveParams, py::arg("path"))
      .def("load_params", &Model::LoadParams, py::arg("path"))
      .def(
          "policy",
          [](Model& m, const Eigen::VectorXd& q, double regularization) {
            return EvaluatePolicy(m.tree(), m.CheckedConfig(q),
                                  m.params().values(), regularization);
          },
          py::arg("q"), py::arg("regularization") = 0.0)
      .def(
          "flat_policy",
          [](Model& m, const Eigen::VectorXd& q, double regularization) {
            return FlatSolve(m.tree(), m.CheckedConfig(q),
                             m.params().values(), regularization);
          },
          py::arg("q"), py::arg("regularization") = 0.0)
      .def(
          "solve",
          [](Model& m, const Eigen::VectorXd& q, double regularization) {
            const RootSolution sol =
                SolveAtRoot(m.tree(), m.CheckedConfig(q), m.params().values(),
                            regularization);
            py::dict out;
            out["pi"] = sol.velocity;
            out["force"] = sol.force;
            out["metric"] = sol.metric;
            return out;
          },
          py::arg("q"), py::arg("regularization") = 0.0)
      .def(
          "potential",
          [](Model& m, const Eigen::VectorXd& q) {
            const TreeStates states = ForwardPass(
                m.tree(), m.CheckedConfig(q), m.params().values());
            return RootPotential(m.tree(), states, m.params().values());
          },
          py::arg("q"))
      .def(
          "loss",
          [](Model& m, const DemoSet& demos, const py::object& config,
             const std::optional<std::string>& loss) {
            m.CheckDemos(demos);
            const TrainConfig c = m.Config(config, loss);
            ValidateLossSpec(c.loss, m.tree());
            return EvaluateLoss(m.tree(), m.params().values(), demos, c.loss);
          },
          py::arg("demos"), py::arg("config") = py::none(),
          py::arg("loss") = py::none())
      .def(
          "train",
          [](Model& m, const DemoSet& demos, const py::object& config,
             const std::optional<std::string>& loss,
             const std::optional<int> iterations,
             const std::optional<double> alpha,
             const std::optional<std::uint64_t> seed) {
            m.CheckDemos(demos);
            TrainConfig c = m.Config(config, loss);
            if (iterations) c.options.iterations = *iterations;
            if (alpha) c.options.alpha = *alpha;
            if (seed) c.options.seed = *seed;
            TrainResult result;
            {
              py::gil_scoped_release release;
              result = Train(m.tree(), m.params(), demos, c.loss, c.options);
            }
            m.params().SetValues(result.params.values());
            py::dict out;
            out["status"] = result.status == TrainStatus::kAborted
                                ? "aborted"
                                : "completed";
            out["history"] = result.history;
            out["alpha"] = result.alpha;
            out["loss_kind"] = LossKindName(c.loss.kind);
            out["message"] = result.message;
            return out;
          },
          py::arg("demos"), py::arg("config") = py::none(),
          py::arg("loss") = py::none(), py::arg("iterations") = py::none(),
          py::arg("alpha") = py::none(), py::arg("seed") = py::none(),
          "Trains in place and returns a summary with the loss history.")
      .def(
          "rollout",
          [](Model& m, const Eigen::VectorXd& q0, double dt, int max_steps,
             double grad_tol, double regularization) {
            RolloutOptions options;
            options.dt = dt;
            options.max_steps = max_steps;
            options.grad_tol = grad_tol;
            options.regularization = regularization;
            RolloutResult result;
            {
              py::gil_scoped_release release;
              result = Integrate(m.tree(), m.params().values(),
                                 m.CheckedConfig(q0), options);
            }
            auto [t, q, qdot] = ToArrays(result.trajectory);
            py::dict out;
            out["status"] = RolloutStatusName(result.status);
            out["steps"] = result.steps;
            out["t"] = t;
            out["q"] = q;
            out["qdot"] = qdot;
            out["phi"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                result.potential_trace.data(),
                static_cast<Eigen::Index>(result.potential_trace.size())));
            out["terminal_grad_norm"] = result.terminal_grad_norm;
            out["max_descent_rate"] = result.max_descent_rate;
            out["message"] = result.message;
            if (!result.potential_trace.empty()) {
              const LyapunovReport lyap = LyapunovCheck(result, dt);
              out["lyapunov_max_violation"] = lyap.max_violation;
              out["lyapunov_passed"] = lyap.passed;
            }
            return out;
          },
          py::arg("q0"), py::arg("dt") = 1e-3, py::arg("max_steps") = 1000000,
          py::arg("grad_tol") = 1e-6, py::arg("regularization") = 0.0)
      .def(
          "check",
          [](Model& m, int points, std::uint64_t seed, double radius) {
            CheckOptions options;
            options.points = points;
            options.seed = seed;
            options.radius = radius;
            VerificationReport report =
                CheckTree(m.tree(), m.params().values(), options);
            report.json["exit_code"] = report.exit_code;
            return ToPython(report.json);
          },
          py::arg("points") = 10, py::arg("seed") = 0, py::arg("radius") = 1.0)
      .def(
          "gradcheck",
          [](Model& m, const DemoSet& demos, const py::object& config,
             const std::optional<std::string>& loss, int max_coordinates,
             std::uint64_t seed, bool corrupt) {
            m.CheckDemos(demos);
            const TrainConfig c = m.Config(config, loss);
            GradCheckOptions options;
            options.max_coordinates = max_coordinates;
            options.seed = seed;
            options.corrupt = corrupt;
            VerificationReport report =
                GradCheck(m.tree(), m.params().values(),
                          m.params().TrainableMask(), demos, c.loss, options);
            report.json["exit_code"] = report.exit_code;
            return ToPython(report.json);
          },
          py::arg("demos"), py::arg("config") = py::none(),
          py::arg("loss") = py::none(), py::arg("max_coordinates") = 0,
          py::arg("seed") = 0, py::arg("corrupt") = false);

  m.def("reaching_tree_spec", [] { return ToPython(ReachingTreeSpec()); });
  m.def("reaching_initial_state", &ReachingInitialState, py::arg("seed"));
  m.def("redundant_arm_tree_spec",
        [] { return ToPython(RedundantArmTreeSpec()); });
  m.def(
      "redundant_arm_train_config",
      [](int iterations, std::uint64_t seed) {
        return ToPython(RedundantArmTrainConfig(iterations, seed));
      },
      py::arg("iterations") = kRedundantArmIterations, py::arg("seed") = 0);
  m.def(
      "redundant_arm_demos",
      [](std::uint64_t seed) {
        RedundantDemoOptions options;
        options.seed = seed;
        return RedundantArmDemos(options);
      },
      py::arg("seed") = 0);
}

}  // namespace
}  // namespace tree_motion

PYBIND11_MODULE(_core, m) { tree_motion::DefineModule(m); }
