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

#ifndef TREE_MOTION_ERRORS_H_
#define TREE_MOTION_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tree_motion {

// Malformed tree, mismatched dimensions, or an invalid file/config. Maps to
// CLI exit code 2.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, singular metrics, or inputs outside a map's domain.
// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root metric is not positive definite and no regularization was requested.
class SingularMetricError : public NumericError {
 public:
  SingularMetricError(const std::string& what, double min_eigenvalue)
      : NumericError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Evaluation at a point where a map or potential is undefined (distance map at
// its center, barrier at or past its boundary).
class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace tree_motion

#endif  // TREE_MOTION_ERRORS_H_
