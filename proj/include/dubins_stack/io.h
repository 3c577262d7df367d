// Copyright 2026 The dubins_stack Authors
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

#ifndef DUBINS_STACK_IO_H_
#define DUBINS_STACK_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dubins_stack/scenario.h"

namespace dubins_stack {

inline constexpr std::string_view kLibraryVersion = "0.3.0";

inline constexpr std::string_view kTrajectoryCsvHeader =
    "k,t,x_i,x_j,x_c,x_s,y_i,y_j,y_c,y_s,est_i,est_j,est_c,est_s,u_v,u_phi,"
    "target_idx,stage_cost";

// One header line plus one row per record; reals use 17 significant digits
// so parsing the text back reproduces every value exactly.
std::string SerializeTrajectory(const TrajectoryLog& log);
std::string SerializeTrajectory(const std::vector<StepRecord>& records);

// Inverse of SerializeTrajectory. Throws ContractViolation on a malformed
// header or row.
std::vector<StepRecord> ParseTrajectoryCsv(std::string_view text);

nlohmann::json ConfigToJson(const ScenarioConfig& config);
// Throws ContractViolation (wrapping the JSON error) on missing fields.
ScenarioConfig ConfigFromJson(const nlohmann::json& j);

nlohmann::json MetricsToJson(const TrajectoryLog& log);

// Minimal static plot writer: polylines and point markers in world
// coordinates, scaled to fit.
class SvgPlot {
 public:
  SvgPlot(std::string title, int width = 640, int height = 480);

  void AddPolyline(std::string label, std::vector<Vector> points,
                   std::string color);
  void AddMarkers(std::string label, std::vector<Vector> points,
                  std::string color);

  std::string Render() const;

 private:
  struct Series {
    std::string label;
    std::vector<Vector> points;
    std::string color;
    bool markers;
  };

  std::string title_;
  int width_;
  int height_;
  std::vector<Series> series_;
};

}  // namespace dubins_stack

#endif  // DUBINS_STACK_IO_H_
