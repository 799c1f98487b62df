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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tree_motion/errors.h"

namespace tree_motion {
namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos
                         ? std::string()
                         : field.substr(begin, end - begin + 1));
  }
  return fields;
}

double ParseNumber(const std::string& text, int line) {
  try {
    size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw StructuralError("demo csv line " + std::to_string(line) +
                          ": cannot parse number '" + text + "'");
  }
}

void WriteHeader(std::ostream& out, int dim, bool with_traj, bool with_phi) {
  if (with_traj) out << "traj,";
  out << "t";
  for (int i = 0; i < dim; ++i) out << ",q" << i;
  for (int i = 0; i < dim; ++i) out << ",qd" << i;
  if (with_phi) out << ",phi";
  out << "\n";
}

void WriteRow(std::ostream& out, const Sample& s) {
  out << FormatNumber(s.t);
  for (int i = 0; i < s.q.size(); ++i) out << "," << FormatNumber(s.q[i]);
  for (int i = 0; i < s.qdot.size(); ++i) out << "," << FormatNumber(s.qdot[i]);
}

}  // namespace

int DemoSet::dim() const {
  for (const Trajectory& traj : trajectories) {
    if (!traj.empty()) return static_cast<int>(traj.front().q.size());
  }
  return 0;
}

int DemoSet::num_samples() const {
  int count = 0;
  for (const Trajectory& traj : trajectories) {
    count += static_cast<int>(traj.size());
  }
  return count;
}

void DemoSet::Validate() const {
  const int d = dim();
  for (size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& traj = trajectories[i];
    for (size_t t = 0; t < traj.size(); ++t) {
      if (traj[t].q.size() != d || traj[t].qdot.size() != d) {
        throw StructuralError("trajectory " + std::to_string(i) +
                              " has inconsistent dimensions at sample " +
                              std::to_string(t));
      }
      if (t > 0 && !(traj[t].t > traj[t - 1].t)) {
        throw StructuralError("trajectory " + std::to_string(i) +
                              " timestamps are not strictly increasing at "
                              "sample " +
                              std::to_string(t));
      }
      if (!traj[t].q.allFinite() || !traj[t].qdot.allFinite()) {
        throw StructuralError("trajectory " + std::to_string(i) +
                              " has non-finite values");
      }
    }
  }
}

std::vector<const Sample*> DemoSet::Flatten() const {
  std::vector<const Sample*> out;
  for (const Trajectory& traj : trajectories) {
    for (const Sample& s : traj) out.push_back(&s);
  }
  return out;
}

void EstimateVelocities(Trajectory& traj) {
  const size_t n = traj.size();
  if (n < 2) {
    for (Sample& s : traj) s.qdot = Eigen::VectorXd::Zero(s.q.size());
    return;
  }
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i == 0 ? 0 : i - 1;
    const size_t hi = i + 1 == n ? n - 1 : i + 1;
    traj[i].qdot = (traj[hi].q - traj[lo].q) / (traj[hi].t - traj[lo].t);
  }
}

DemoSet ReadDemoCsv(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = SplitCsv(line);
  }
  if (header.empty()) throw StructuralError("demo csv is empty");

  std::map<std::string, int> column;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    column[header[i]] = i;
  }
  if (!column.count("t")) throw StructuralError("demo csv has no 't' column");
  int dim = 0;
  while (column.count("q" + std::to_string(dim))) ++dim;
  if (dim == 0) throw StructuralError("demo csv has no q0 column");
  int qd_count = 0;
  while (column.count("qd" + std::to_string(qd_count))) ++qd_count;
  if (qd_count != 0 && qd_count != dim) {
    throw StructuralError("demo csv has " + std::to_string(qd_count) +
                          " qd columns for " + std::to_string(dim) +
                          " q columns");
  }
  const bool has_traj = column.count("traj") > 0;

  DemoSet demos;
  double last_id = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = SplitCsv(line);
    if (fields.size() != header.size()) {
      throw StructuralError("demo csv line " + std::to_string(line_no) +
                            " has " + std::to_string(fields.size()) +
                            " fields, expected " +
                            std::to_string(header.size()));
    }
    Sample s;
    s.t = ParseNumber(fields[column["t"]], line_no);
    s.q.resize(dim);
    for (int i = 0; i < dim; ++i) {
      s.q[i] = ParseNumber(fields[column["q" + std::to_string(i)]], line_no);
    }
    if (qd_count > 0) {
      s.qdot.resize(dim);
      for (int i = 0; i < dim; ++i) {
        s.qdot[i] =
            ParseNumber(fields[column["qd" + std::to_string(i)]], line_no);
      }
    }
    bool start_new = demos.trajectories.empty();
    if (has_traj) {
      const double id = ParseNumber(fields[column["traj"]], line_no);
      start_new = start_new || id != last_id;
      last_id = id;
    } else if (!start_new) {
      start_new = !(s.t > demos.trajectories.back().back().t);
    }
    if (start_new) demos.trajectories.emplace_back();
    demos.trajectories.back().push_back(std::move(s));
  }
  if (qd_count == 0) {
    for (Trajectory& traj : demos.trajectories) EstimateVelocities(traj);
  }
  demos.Validate();
  return demos;
}

DemoSet ReadDemoCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open demo file '" + path + "'");
  return ReadDemoCsv(in);
}

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj,
                        const std::vector<double>* phi) {
  const int dim = traj.empty() ? 0 : static_cast<int>(traj.front().q.size());
  WriteHeader(out, dim, false, phi != nullptr);
  for (size_t i = 0; i < traj.size(); ++i) {
    WriteRow(out, traj[i]);
    if (phi != nullptr) out << "," << FormatNumber((*phi)[i]);
    out << "\n";
  }
}

void WriteDemoCsv(std::ostream& out, const DemoSet& demos) {
  WriteHeader(out, demos.dim(), true, false);
  for (size_t i = 0; i < demos.trajectories.size(); ++i) {
    for (const Sample& s : demos.trajectories[i]) {
      out << i << ",";
      WriteRow(out, s);
      out << "\n";
    }
  }
}

std::string FormatNumber(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace tree_motion
