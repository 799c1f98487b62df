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

#ifndef TREE_MOTION_PARAM_VECTOR_H_
#define TREE_MOTION_PARAM_VECTOR_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tree_motion {

// A contiguous range of the flat parameter vector owned by one component.
struct ParamSlice {
  int offset = 0;
  int length = 0;

  bool empty() const { return length == 0; }
  int end() const { return offset + length; }
};

struct ParamEntry {
  std::string name;
  int offset = 0;
  int length = 0;
  bool trainable = true;
};

// Flat vector of all parameters in a tree plus a registry naming the slice of
// every parameterized component. Frozen components keep their values here too;
// the `trainable` flag decides whether training may update them.
class ParamVector {
 public:
  ParamVector() = default;

  // Appends `initial` as a new component and returns its slice.
  ParamSlice Register(std::string name, const Eigen::VectorXd& initial,
                      bool trainable);

  int size() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& mutable_values() { return values_; }
  const std::vector<ParamEntry>& registry() const { return registry_; }

  // Replaces all values; the size must match.
  void SetValues(const Eigen::VectorXd& values);

  // 1 for every coordinate of a trainable component, 0 otherwise.
  Eigen::VectorXd TrainableMask() const;
  int TrainableCount() const;

  // Index into registry() of the component with this name, or -1.
  int Find(const std::string& name) const;

  // True if both vectors have the same component names, lengths, offsets and
  // trainable flags.
  bool SameLayout(const ParamVector& other) const;

 private:
  Eigen::VectorXd values_;
  std::vector<ParamEntry> registry_;
};

}  // namespace tree_motion

#endif  // TREE_MOTION_PARAM_VECTOR_H_
