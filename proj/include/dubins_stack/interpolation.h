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

#ifndef DUBINS_STACK_INTERPOLATION_H_
#define DUBINS_STACK_INTERPOLATION_H_

#include <optional>
#include <vector>

#include "dubins_stack/dynamics.h"

namespace dubins_stack {

struct WaypointSequence {
  std::vector<Vector> points;
  // Optional per-point tangents (same count and dimension as `points`).
  std::optional<std::vector<Vector>> tangents;
};

// Samples of a spline at uniformly spaced knot parameters.
struct DensePath {
  std::vector<Vector> points;
  std::vector<double> params;
};

// Piecewise cubic Hermite curve with one unit of knot parameter per segment:
// segment k spans s in [k, k+1] between points k and k+1.
class CubicHermiteSpline {
 public:
  // Catmull-Rom tangents m_k = (p_{k+1} - p_{k-1}) / 2 unless the sequence
  // carries its own; one-sided differences at the two ends.
  explicit CubicHermiteSpline(const WaypointSequence& waypoints);

  Vector Evaluate(double s) const;
  Vector Derivative(double s) const;

  // Last knot parameter, n - 1.
  double end() const { return static_cast<double>(points_.size() - 1); }
  const std::vector<Vector>& tangents() const { return tangents_; }

 private:
  std::vector<Vector> points_;
  std::vector<Vector> tangents_;
};

// Uniform (unclamped) cubic B-spline over control points; segment k
// blends points k..k+3 and the parameter runs over [0, n - 3].
class UniformCubicBSpline {
 public:
  explicit UniformCubicBSpline(const WaypointSequence& control_points);

  Vector Evaluate(double s) const;
  double end() const { return static_cast<double>(points_.size() - 3); }

 private:
  std::vector<Vector> points_;
};

// Knot parameters 0, interval, 2*interval, ... below `end`, then `end`.
std::vector<double> UniformParameters(double end, double interval);

// Interpolating cubic Hermite spline sampled every `interval` in knot
// parameter (0 < interval <= 1). Passes through every waypoint.
// Throws ContractViolation for fewer than two waypoints or a bad interval.
DensePath Chspline(const WaypointSequence& waypoints, double interval);

// Approximating uniform cubic B-spline sampled every `interval`.
// Throws ContractViolation for fewer than four control points.
DensePath Bspline(const WaypointSequence& waypoints, double interval);

// Chspline over each sequence. Errors carry the failing batch index.
std::vector<DensePath> ChsplineBatch(
    const std::vector<WaypointSequence>& batches, double interval);

}  // namespace dubins_stack

#endif  // DUBINS_STACK_INTERPOLATION_H_
