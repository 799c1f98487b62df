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

#ifndef TREE_MOTION_SPEC_IO_H_
#define TREE_MOTION_SPEC_IO_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tree_motion/demos.h"
#include "tree_motion/learning.h"
#include "tree_motion/losses.h"
#include "tree_motion/param_vector.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

// Kinds accepted in tree specification files.
const std::vector<std::string>& RegisteredMapKinds();
const std::vector<std::string>& RegisteredPolicyKinds();
const std::vector<std::string>& RegisteredMetricKinds();
const std::vector<std::string>& RegisteredPotentialKinds();

struct LoadOptions {
  // Used to resolve "length_scale": "auto" on diffeomorphism edges.
  const DemoSet* demos = nullptr;
  // Length scales by parameter component name; these win over the spec.
  std::map<std::string, double> length_scales;
};

struct LoadedTree {
  TransformTree tree;
  ParamVector params;
  // Resolved length scale of every diffeomorphism, by component name.
  std::map<std::string, double> length_scales;
};

// Builds a tree and its initial parameters from a JSON specification.
// Throws StructuralError with the offending edge or leaf in the message.
LoadedTree LoadTree(const nlohmann::json& spec,
                    const LoadOptions& options = {});
LoadedTree LoadTreeFile(const std::string& path,
                        const LoadOptions& options = {});

nlohmann::json ReadJsonFile(const std::string& path);

// Parameter files carry the registry, the values and any resolved
// hyperparameters needed to rebuild the same tree.
struct ParamsFile {
  ParamVector params;
  std::map<std::string, double> length_scales;
};

nlohmann::json ParamsToJson(const ParamVector& params,
                            const std::map<std::string, double>& scales);
ParamsFile ParamsFromJson(const nlohmann::json& json);
void WriteParamsFile(const std::string& path, const ParamVector& params,
                     const std::map<std::string, double>& scales);
ParamsFile ReadParamsFile(const std::string& path);

// Replaces values of `target` after checking the layouts agree.
void AssignParams(const ParamVector& source, ParamVector& target);

struct TrainConfig {
  LossSpec loss;
  TrainOptions options;
};

// {"loss": {"kind": ..., "lambda": [...]}, "alpha", "iterations", "seed",
//  "minibatch", "momentum"}; missing fields keep their defaults.
TrainConfig ParseTrainConfig(const nlohmann::json& json,
                             const TransformTree& tree);

}  // namespace tree_motion

#endif  // TREE_MOTION_SPEC_IO_H_
