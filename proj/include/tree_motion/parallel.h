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

#ifndef TREE_MOTION_PARALLEL_H_
#define TREE_MOTION_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace tree_motion {

// Worker count: hardware concurrency, capped by TREE_MOTION_THREADS when set.
int MaxThreads();

// Runs fn(i) for i in [0, n) on up to MaxThreads() threads. Each index runs
// exactly once; callers write results to per-index slots and reduce in index
// order, so results do not depend on the thread count. The first exception
// thrown by any fn is rethrown after all workers join.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tree_motion

#endif  // TREE_MOTION_PARALLEL_H_
