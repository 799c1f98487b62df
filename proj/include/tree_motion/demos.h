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

#ifndef TREE_MOTION_DEMOS_H_
#define TREE_MOTION_DEMOS_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tree_motion {

struct Sample {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
};

using Trajectory = std::vector<Sample>;

// Demonstrations in configuration space. All samples share one dimension and
// timestamps increase strictly within each trajectory.
struct DemoSet {
  std::vector<Trajectory> trajectories;

  int dim() const;
  int num_samples() const;
  // Throws StructuralError if the invariants do not hold.
  void Validate() const;
  // Flattened (trajectory, time) order.
  std::vector<const Sample*> Flatten() const;
};

// Fills qdot by central differences over timestamps (one-sided at the ends).
void EstimateVelocities(Trajectory& trajectory);

// CSV with header `t,q0..q{d-1}[,qd0..qd{d-1}]` and an optional leading `traj`
// column. Without `traj`, a new trajectory starts wherever t stops increasing.
// Missing qd columns are estimated with EstimateVelocities. Other columns
// (e.g. `phi`) are ignored.
DemoSet ReadDemoCsv(std::istream& in);
DemoSet ReadDemoCsvFile(const std::string& path);

// Writes one trajectory; `phi`, when given, adds a trailing column.
void WriteTrajectoryCsv(std::ostream& out, const Trajectory& trajectory,
                        const std::vector<double>* phi = nullptr);
// Writes all trajectories with a leading `traj` column.
void WriteDemoCsv(std::ostream& out, const DemoSet& demos);

// Shortest decimal text that parses back to the same double.
std::string FormatNumber(double value);

}  // namespace tree_motion

#endif  // TREE_MOTION_DEMOS_H_
