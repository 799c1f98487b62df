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

#include "tree_motion/demos.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "tests/support/random_trees.h"
#include "tree_motion/errors.h"

namespace tree_motion {
namespace {

TEST(DemoCsvTest, RoundTripsWithTrajectoryColumn) {
  const DemoSet demos = testing::RandomDemos(3, 3, 4, 7);
  std::stringstream buffer;
  WriteDemoCsv(buffer, demos);
  const DemoSet back = ReadDemoCsv(buffer);
  ASSERT_EQ(back.trajectories.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    ASSERT_EQ(back.trajectories[i].size(), 4u);
    for (size_t t = 0; t < 4; ++t) {
      const Sample& a = demos.trajectories[i][t];
      const Sample& b = back.trajectories[i][t];
      EXPECT_EQ(a.t, b.t);
      EXPECT_EQ(a.q, b.q);
      EXPECT_EQ(a.qdot, b.qdot);
    }
  }
}

TEST(DemoCsvTest, SplitsTrajectoriesWhereTimeRestarts) {
  std::istringstream in(
      "t,q0,qd0\n0,1,0.5\n0.1,2,0.5\n0,3,0.5\n0.1,4,0.5\n0.2,5,0.5\n");
  const DemoSet demos = ReadDemoCsv(in);
  ASSERT_EQ(demos.trajectories.size(), 2u);
  EXPECT_EQ(demos.trajectories[0].size(), 2u);
  EXPECT_EQ(demos.trajectories[1].size(), 3u);
  EXPECT_EQ(demos.num_samples(), 5);
  EXPECT_EQ(demos.dim(), 1);
}

TEST(DemoCsvTest, EstimatesMissingVelocities) {
  std::istringstream in("t,q0,q1,phi\n0,0,1,9\n0.5,1,1,9\n1.0,4,1,9\n");
  const DemoSet demos = ReadDemoCsv(in);
  const Trajectory& traj = demos.trajectories[0];
  EXPECT_DOUBLE_EQ(traj[0].qdot[0], 2.0);
  EXPECT_DOUBLE_EQ(traj[1].qdot[0], 4.0);
  EXPECT_DOUBLE_EQ(traj[2].qdot[0], 6.0);
  EXPECT_DOUBLE_EQ(traj[1].qdot[1], 0.0);
}

TEST(DemoCsvTest, RejectsMalformedInput) {
  std::istringstream no_time("q0,qd0\n1,2\n");
  EXPECT_THROW(ReadDemoCsv(no_time), StructuralError);
  std::istringstream ragged("t,q0,qd0\n0,1\n");
  EXPECT_THROW(ReadDemoCsv(ragged), StructuralError);
  std::istringstream partial("t,q0,q1,qd0\n0,1,2,3\n");
  EXPECT_THROW(ReadDemoCsv(partial), StructuralError);
  std::istringstream text("t,q0,qd0\n0,abc,1\n");
  EXPECT_THROW(ReadDemoCsv(text), StructuralError);
  std::istringstream empty("");
  EXPECT_THROW(ReadDemoCsv(empty), StructuralError);
}

TEST(DemoSetTest, ValidateChecksTimestampsAndDimensions) {
  DemoSet demos = testing::RandomDemos(2, 1, 3, 0);
  EXPECT_NO_THROW(demos.Validate());
  demos.trajectories[0][2].t = demos.trajectories[0][1].t;
  EXPECT_THROW(demos.Validate(), StructuralError);
  demos = testing::RandomDemos(2, 1, 3, 0);
  demos.trajectories[0][1].qdot = Eigen::Vector3d::Zero();
  EXPECT_THROW(demos.Validate(), StructuralError);
  demos = testing::RandomDemos(2, 1, 3, 0);
  demos.trajectories[0][1].q[0] = NAN;
  EXPECT_THROW(demos.Validate(), StructuralError);
}

TEST(TrajectoryCsvTest, WritesPotentialColumn) {
  const DemoSet demos = testing::RandomDemos(2, 1, 2, 3);
  const std::vector<double> phi = {2.5, 1.0};
  std::stringstream out;
  WriteTrajectoryCsv(out, demos.trajectories[0], &phi);
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "t,q0,q1,qd0,qd1,phi");
  std::string row;
  std::getline(out, row);
  EXPECT_EQ(row.substr(row.rfind(',') + 1), "2.5");
}

TEST(FormatNumberTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(-2.0), "-2");
  for (double x : {1.0 / 3.0, 1e-300, 6.02214076e23, -0.0}) {
    EXPECT_EQ(std::stod(FormatNumber(x)), x);
  }
}

}  // namespace
}  // namespace tree_motion
