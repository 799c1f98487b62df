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

#ifndef TREE_MOTION_LEARNING_H_
#define TREE_MOTION_LEARNING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/demos.h"
#include "tree_motion/losses.h"
#include "tree_motion/param_vector.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

struct TrainOptions {
  // Step size. When unset, a backtracking line search on the first iteration
  // picks it and it stays fixed afterwards.
  std::optional<double> alpha;
  int iterations = 100;
  std::uint64_t seed = 0;
  // 0 = full batch.
  int minibatch = 0;
  // Heavy-ball momentum; 0 is plain gradient descent.
  double momentum = 0.0;
  // Line-search starting step and sufficient-decrease constant.
  double initial_alpha = 1.0;
  double armijo = 0.5;
};

enum class TrainStatus { kCompleted, kAborted };

struct TrainResult {
  ParamVector params;
  // Loss before each update, plus the loss of the returned parameters.
  std::vector<double> history;
  double alpha = 0.0;
  TrainStatus status = TrainStatus::kCompleted;
  std::string message;
};

// Gradient descent theta <- theta - alpha grad L on the trainable entries of
// `params`. A non-finite loss aborts the run and returns the last parameters
// whose loss was finite. kIndependentBaseline dispatches to
// TrainIndependentBaseline.
TrainResult Train(const TransformTree& tree, const ParamVector& params,
                  const DemoSet& demos, const LossSpec& loss,
                  const TrainOptions& options);

// Trains every learnable group (see BaselineGroups) on its own, imitating the
// demonstrations mapped into that group's subtask space with no coupling to
// the rest of the tree. Each group gets `options.iterations` iterations; the
// history concatenates the groups' histories.
TrainResult TrainIndependentBaseline(const TransformTree& tree,
                                     const ParamVector& params,
                                     const DemoSet& demos,
                                     const TrainOptions& options);

}  // namespace tree_motion

#endif  // TREE_MOTION_LEARNING_H_
