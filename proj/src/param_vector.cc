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

#include "tree_motion/param_vector.h"

#include <utility>

#include "tree_motion/errors.h"

namespace tree_motion {

ParamSlice ParamVector::Register(std::string name,
                                 const Eigen::VectorXd& initial,
                                 bool trainable) {
  if (Find(name) >= 0) {
    throw StructuralError("duplicate parameter component '" + name + "'");
  }
  ParamSlice slice{size(), static_cast<int>(initial.size())};
  Eigen::VectorXd grown(slice.end());
  grown.head(slice.offset) = values_;
  grown.tail(slice.length) = initial;
  values_ = std::move(grown);
  registry_.push_back({std::move(name), slice.offset, slice.length, trainable});
  return slice;
}

void ParamVector::SetValues(const Eigen::VectorXd& values) {
  if (values.size() != values_.size()) {
    throw StructuralError("parameter vector has " +
                          std::to_string(values.size()) + " values, expected " +
                          std::to_string(values_.size()));
  }
  values_ = values;
}

Eigen::VectorXd ParamVector::TrainableMask() const {
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(size());
  for (const ParamEntry& entry : registry_) {
    if (entry.trainable) mask.segment(entry.offset, entry.length).setOnes();
  }
  return mask;
}

int ParamVector::TrainableCount() const {
  int count = 0;
  for (const ParamEntry& entry : registry_) {
    if (entry.trainable) count += entry.length;
  }
  return count;
}

int ParamVector::Find(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(registry_.size()); ++i) {
    if (registry_[i].name == name) return i;
  }
  return -1;
}

bool ParamVector::SameLayout(const ParamVector& other) const {
  if (registry_.size() != other.registry_.size()) return false;
  for (size_t i = 0; i < registry_.size(); ++i) {
    const ParamEntry& a = registry_[i];
    const ParamEntry& b = other.registry_[i];
    if (a.name != b.name || a.offset != b.offset || a.length != b.length ||
        a.trainable != b.trainable) {
      return false;
    }
  }
  return true;
}

}  // namespace tree_motion
