# Copyright 2026 The tree_motion Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Transform-tree motion policies with end-to-end learning."""

from tree_motion._core import (
    DemoSet,
    DomainError,
    Model,
    NumericError,
    SingularMetricError,
    StructuralError,
    reaching_initial_state,
    reaching_tree_spec,
    redundant_arm_demos,
    redundant_arm_train_config,
    redundant_arm_tree_spec,
)

__all__ = [
    "DemoSet",
    "DomainError",
    "Model",
    "NumericError",
    "SingularMetricError",
    "StructuralError",
    "reaching_initial_state",
    "reaching_tree_spec",
    "redundant_arm_demos",
    "redundant_arm_train_config",
    "redundant_arm_tree_spec",
]
