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

#include "dubins_stack/interpolation.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dubins_stack/errors.h"

namespace dubins_stack {
namespace {

// Two samples closer than this (in knot parameter) are merged at the end.
constexpr double kEndSnap = 1e-9;

void CheckPoints(const std::vector<Vector>& points, size_t minimum,
                 const char* what) {
  if (points.size() < minimum) {
    std::ostringstream msg;
    msg << what << " needs at least " << minimum << " points, got "
        << points.size();
    throw ContractViolation(msg.str());
  }
  const long dim = points.front().size();
  for (const Vector& p : points) CheckDimension("waypoint", dim, p.size());
}

void CheckInterval(double interval) {
  if (!(interval > 0.0 && interval <= 1.0)) {
    std::ostringstream msg;
    msg << "interval must be in (0, 1], got " << interval;
    throw ContractViolation(msg.str());
  }
}

// Splits s into a segment index in [0, segments) and a local parameter.
std::pair<size_t, double> Locate(double s, size_t segments) {
  const double clamped = std::clamp(s, 0.0, static_cast<double>(segments));
  const size_t seg =
      std::min(static_cast<size_t>(std::floor(clamped)), segments - 1);
  return {seg, clamped - static_cast<double>(seg)};
}

}  // namespace

CubicHermiteSpline::CubicHermiteSpline(const WaypointSequence& waypoints)
    : points_(waypoints.points) {
  CheckPoints(points_, 2, "chspline");
  const size_t n = points_.size();
  if (waypoints.tangents) {
    CheckDimension("tangent count", static_cast<long>(n),
                   static_cast<long>(waypoints.tangents->size()));
    for (const Vector& t : *waypoints.tangents) {
      CheckDimension("tangent", points_.front().size(), t.size());
    }
    tangents_ = *waypoints.tangents;
    return;
  }
  tangents_.resize(n);
  tangents_.front() = points_[1] - points_[0];
  tangents_.back() = points_[n - 1] - points_[n - 2];
  for (size_t k = 1; k + 1 < n; ++k) {
    tangents_[k] = 0.5 * (points_[k + 1] - points_[k - 1]);
  }
}

Vector CubicHermiteSpline::Evaluate(double s) const {
  const auto [k, t] = Locate(s, points_.size() - 1);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * points_[k] + h10 * tangents_[k] + h01 * points_[k + 1] +
         h11 * tangents_[k + 1];
}

Vector CubicHermiteSpline::Derivative(double s) const {
  const auto [k, t] = Locate(s, points_.size() - 1);
  const double t2 = t * t;
  const double d00 = 6 * t2 - 6 * t;
  const double d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t;
  const double d11 = 3 * t2 - 2 * t;
  return d00 * points_[k] + d10 * tangents_[k] + d01 * points_[k + 1] +
         d11 * tangents_[k + 1];
}

UniformCubicBSpline::UniformCubicBSpline(const WaypointSequence& control_points)
    : points_(control_points.points) {
  if (points_.size() < 4) {
    std::ostringstream msg;
    msg << "bspline is cubic and needs at least 4 control points, got "
        << points_.size();
    throw ContractViolation(msg.str());
  }
  CheckPoints(points_, 4, "bspline");
}

Vector UniformCubicBSpline::Evaluate(double s) const {
  const auto [k, t] = Locate(s, points_.size() - 3);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double u = 1.0 - t;
  const double b0 = u * u * u / 6.0;
  const double b1 = (3 * t3 - 6 * t2 + 4) / 6.0;
  const double b2 = (-3 * t3 + 3 * t2 + 3 * t + 1) / 6.0;
  const double b3 = t3 / 6.0;
  return b0 * points_[k] + b1 * points_[k + 1] + b2 * points_[k + 2] +
         b3 * points_[k + 3];
}

std::vector<double> UniformParameters(double end, double interval) {
  CheckInterval(interval);
  std::vector<double> params;
  for (long i = 0;; ++i) {
    const double s = static_cast<double>(i) * interval;
    if (s >= end - kEndSnap) break;
    params.push_back(s);
  }
  params.push_back(end);
  return params;
}

DensePath Chspline(const WaypointSequence& waypoints, double interval) {
  CheckInterval(interval);
  const CubicHermiteSpline spline(waypoints);
  DensePath path;
  path.params = UniformParameters(spline.end(), interval);
  path.points.reserve(path.params.size());
  for (double s : path.params) path.points.push_back(spline.Evaluate(s));
  return path;
}

DensePath Bspline(const WaypointSequence& waypoints, double interval) {
  CheckInterval(interval);
  const UniformCubicBSpline spline(waypoints);
  DensePath path;
  path.params = UniformParameters(spline.end(), interval);
  path.points.reserve(path.params.size());
  for (double s : path.params) path.points.push_back(spline.Evaluate(s));
  return path;
}

std::vector<DensePath> ChsplineBatch(
    const std::vector<WaypointSequence>& batches, double interval) {
  std::vector<DensePath> out;
  out.reserve(batches.size());
  for (size_t b = 0; b < batches.size(); ++b) {
    try {
      out.push_back(Chspline(batches[b], interval));
    } catch (const ContractViolation& e) {
      std::ostringstream msg;
      msg << "batch " << b << ": " << e.what();
      throw ContractViolation(msg.str());
    }
  }
  return out;
}

}  // namespace dubins_stack
