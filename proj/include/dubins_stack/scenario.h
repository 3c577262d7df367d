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

// Closed-loop Dubins car experiments on the figure-eight course.
//
// Each control step k:
//   1. observe      y[k] = x[k] + q * n,  n ~ N(0, I)
//   2. estimate     filter(belief[k-1], y[k], u[k-1])   (or use y[k] raw)
//   3. control      u[k] = first MPC input toward the active target
//   4. advance      x[k+1] = f(x[k], u[k]) + process noise
//   5. the active target advances once |pos(x[k+1]) - pos(target)| <= tol,
//      or after max_steps_per_target steps (flagged as a timeout).
//
// With the chspline reference the targets are dense path samples. The
// controller then aims `lookahead` samples past the active one, and a sample
// also counts as reached once the car crosses the line through it normal to
// the path.

#ifndef DUBINS_STACK_SCENARIO_H_
#define DUBINS_STACK_SCENARIO_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dubins_stack/control.h"
#include "dubins_stack/dynamics.h"
#include "dubins_stack/interpolation.h"

namespace dubins_stack {

enum class FilterKind { kNone, kEkf, kUkf, kPf };
enum class SplineMode { kOff, kChspline };

std::string ToString(FilterKind kind);
std::string ToString(SplineMode mode);
// Throw ContractViolation on unknown names.
FilterKind ParseFilterKind(const std::string& name);
SplineMode ParseSplineMode(const std::string& name);

struct NoisePolicy {
  double observation_scale = 0.02;  // q
  double process_scale = 0.0;
  std::uint64_t seed = 0;
};

struct ScenarioConfig {
  FilterKind filter = FilterKind::kNone;
  SplineMode spline = SplineMode::kOff;
  QuadraticCost cost;
  double dt = 0.1;
  double tolerance = 0.1;  // meters
  int max_steps_per_target = 200;
  NoisePolicy noise;
  Vector initial_state;  // [i, j, cos, sin]
  Vector initial_shift;  // added to the initial position (2-vector)
  double spline_interval = 0.2;
  // With a spline, the controller aims this many samples past the active one.
  int lookahead = 2;
  int particles = 1000;
  MpcOptions mpc;
};

// Tracking cost used by the closed-loop experiments.
QuadraticCost DefaultTrackingCost(int horizon = 10);
// Defaults for every field; starts at the first waypoint.
ScenarioConfig DefaultScenarioConfig();

// Throws ContractViolation when any field is out of range.
void ValidateConfig(const ScenarioConfig& config);

// 17 Dubins states on two unit circles centred at (+1, 0) and (-1, 0) that
// touch at the origin: origin, seven points counter-clockwise around the
// right circle, origin, seven points clockwise around the left circle,
// origin. Headings are tangent to the direction of travel.
std::vector<Vector> MakeInfinityWaypoints();

// Targets the controller chases: the waypoints themselves, or a chspline
// densification of their positions with headings from the path tangent.
std::vector<Vector> TrackingTargets(const ScenarioConfig& config);

// Finely sampled chspline through the waypoint positions, used to measure
// cross-track error.
DensePath ReferencePath(double interval = 0.01);

struct StepRecord {
  int k = 0;
  double t = 0.0;
  Vector x_true;
  Vector y_noisy;
  Vector estimate;
  Vector u;
  int target_index = 0;
  double stage_cost = 0.0;
};

struct Metrics {
  double estimate_rmse = 0.0;
  double observation_rmse = 0.0;
  double cross_track_rmse = 0.0;
  double cross_track_max = 0.0;
  int total_steps = 0;
};

struct TrajectoryLog {
  std::vector<StepRecord> records;
  std::vector<int> arrival_steps;   // step index at which each target was left
  std::vector<bool> timed_out;      // per target
  std::vector<Vector> targets;
  Vector final_state;
  Metrics metrics;

  bool any_timeout() const;
  int targets_reached() const;
};

// A solver or filter failure inside the loop, tagged with its step.
class ScenarioStepError : public std::runtime_error {
 public:
  ScenarioStepError(int step, const std::string& what);
  int step() const { return step_; }

 private:
  int step_;
};

// Runs the closed loop. Deterministic for a fixed config (including seed).
TrajectoryLog RunClosedLoop(const ScenarioConfig& config);

// Position-only RMSEs and cross-track error (distance to the nearest
// reference sample). Throws ContractViolation on an empty reference.
Metrics ComputeMetrics(const TrajectoryLog& log, const DensePath& reference);

// Distance from each record's true position to the nearest reference sample.
std::vector<double> CrossTrackErrors(const TrajectoryLog& log,
                                     const DensePath& reference);

}  // namespace dubins_stack

#endif  // DUBINS_STACK_SCENARIO_H_
