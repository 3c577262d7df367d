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

#include "dubins_stack/scenario.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dubins_stack/errors.h"
#include "dubins_stack/estimation.h"

namespace dubins_stack {
namespace {

// Floor on q when deriving filter covariances, so a noise-free run with a
// filter enabled still has an invertible innovation covariance.
constexpr double kMinFilterNoise = 1e-3;

enum class Stream : std::uint32_t { kObservation = 1, kProcess = 2, kParticles = 3 };

RandomStream MakeStream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return RandomStream(seq);
}

Vector GaussianVector(long size, double scale, RandomStream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (long i = 0; i < size; ++i) v[i] = scale * normal(rng);
  return v;
}

Vector DubinsState(double i, double j, double heading) {
  Vector x(4);
  x << i, j, std::cos(heading), std::sin(heading);
  return x;
}

double PositionDistance(const Vector& a, const Vector& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// True once `x` lies beyond the line through `target` normal to its heading.
bool PassedGate(const Vector& x, const Vector& target) {
  return (x[0] - target[0]) * target[2] + (x[1] - target[1]) * target[3] >= 0.0;
}

WaypointSequence WaypointPositions() {
  WaypointSequence seq;
  for (const Vector& w : MakeInfinityWaypoints()) {
    seq.points.push_back(w.head(2));
  }
  return seq;
}

// Filter state carried across steps.
struct FilterState {
  GaussianBelief gaussian;
  ParticleBelief particles;
  Vector estimate;
};

}  // namespace

std::string ToString(FilterKind kind) {
  switch (kind) {
    case FilterKind::kNone:
      return "none";
    case FilterKind::kEkf:
      return "ekf";
    case FilterKind::kUkf:
      return "ukf";
    case FilterKind::kPf:
      return "pf";
  }
  return "none";
}

std::string ToString(SplineMode mode) {
  return mode == SplineMode::kChspline ? "chspline" : "off";
}

FilterKind ParseFilterKind(const std::string& name) {
  if (name == "none") return FilterKind::kNone;
  if (name == "ekf") return FilterKind::kEkf;
  if (name == "ukf") return FilterKind::kUkf;
  if (name == "pf") return FilterKind::kPf;
  throw ContractViolation("unknown filter '" + name +
                          "' (expected none, ekf, ukf or pf)");
}

SplineMode ParseSplineMode(const std::string& name) {
  if (name == "off") return SplineMode::kOff;
  if (name == "chspline") return SplineMode::kChspline;
  throw ContractViolation("unknown spline mode '" + name +
                          "' (expected off or chspline)");
}

QuadraticCost DefaultTrackingCost(int horizon) {
  Vector diag(6);
  diag << 10.0, 10.0, 1.0, 1.0, 1.0, 0.1;
  return MakeConstantCost(diag.asDiagonal().toDenseMatrix(), Vector::Zero(6),
                          horizon);
}

ScenarioConfig DefaultScenarioConfig() {
  ScenarioConfig config;
  config.cost = DefaultTrackingCost();
  config.initial_state = MakeInfinityWaypoints().front();
  config.initial_shift = Vector::Zero(2);
  return config;
}

void ValidateConfig(const ScenarioConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw ContractViolation("dt must be positive");
  }
  if (!(config.tolerance > 0.0)) {
    throw ContractViolation("tolerance must be positive");
  }
  if (config.max_steps_per_target < 1) {
    throw ContractViolation("max steps per target must be >= 1");
  }
  if (!(config.noise.observation_scale >= 0.0) ||
      !std::isfinite(config.noise.observation_scale)) {
    throw ContractViolation("observation noise scale must be >= 0");
  }
  if (!(config.noise.process_scale >= 0.0) ||
      !std::isfinite(config.noise.process_scale)) {
    throw ContractViolation("process noise scale must be >= 0");
  }
  if (config.particles < 1) {
    throw ContractViolation("particle count must be >= 1");
  }
  CheckDimension("initial state", DubinsCar::kStateDim,
                 config.initial_state.size());
  CheckDimension("initial shift", 2, config.initial_shift.size());
  if (config.spline == SplineMode::kChspline &&
      !(config.spline_interval > 0.0 && config.spline_interval <= 1.0)) {
    throw ContractViolation("spline interval must be in (0, 1]");
  }
  ValidateCost(config.cost, DubinsCar::kStateDim, DubinsCar::kInputDim);
}

std::vector<Vector> MakeInfinityWaypoints() {
  constexpr double kStep = std::numbers::pi / 4.0;
  std::vector<Vector> out;
  out.reserve(17);
  // At the origin both circles are tangent to the j axis; travel is -j.
  const Vector center_state = DubinsState(0.0, 0.0, -std::numbers::pi / 2);
  out.push_back(center_state);
  // Right circle, counter-clockwise from angle pi.
  for (int m = 1; m <= 7; ++m) {
    const double a = std::numbers::pi + m * kStep;
    Vector x(4);
    x << 1.0 + std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
    out.push_back(x);
  }
  out.push_back(center_state);
  // Left circle, clockwise from angle 0.
  for (int m = 1; m <= 7; ++m) {
    const double a = -m * kStep;
    Vector x(4);
    x << -1.0 + std::cos(a), std::sin(a), std::sin(a), -std::cos(a);
    out.push_back(x);
  }
  out.push_back(center_state);
  return out;
}

std::vector<Vector> TrackingTargets(const ScenarioConfig& config) {
  std::vector<Vector> waypoints = MakeInfinityWaypoints();
  if (config.spline == SplineMode::kOff) return waypoints;

  const CubicHermiteSpline spline(WaypointPositions());
  const std::vector<double> params =
      UniformParameters(spline.end(), config.spline_interval);
  std::vector<Vector> targets;
  targets.reserve(params.size());
  for (double s : params) {
    const Vector p = spline.Evaluate(s);
    const Vector d = spline.Derivative(s);
    const double norm = d.norm();
    Vector x(4);
    if (norm > 0.0) {
      x << p[0], p[1], d[0] / norm, d[1] / norm;
    } else {
      x << p[0], p[1], 1.0, 0.0;
    }
    targets.push_back(x);
  }
  return targets;
}

DensePath ReferencePath(double interval) {
  return Chspline(WaypointPositions(), interval);
}

bool TrajectoryLog::any_timeout() const {
  return std::any_of(timed_out.begin(), timed_out.end(),
                     [](bool t) { return t; });
}

int TrajectoryLog::targets_reached() const {
  return static_cast<int>(arrival_steps.size()) -
         static_cast<int>(std::count(timed_out.begin(), timed_out.end(), true));
}

ScenarioStepError::ScenarioStepError(int step, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + ": " + what),
      step_(step) {}

TrajectoryLog RunClosedLoop(const ScenarioConfig& config) {
  ValidateConfig(config);
  const DubinsCar car(config.dt);
  const double q = config.noise.observation_scale;
  const double filter_q = std::max(q, kMinFilterNoise);
  const Matrix identity = Matrix::Identity(4, 4);
  const NoiseCovariances filter_noise{
      (0.5 * filter_q) * (0.5 * filter_q) * identity,
      filter_q * filter_q * identity};
  const Matrix initial_covariance = 0.01 * identity;

  RandomStream observation_rng = MakeStream(config.noise.seed, Stream::kObservation);
  RandomStream process_rng = MakeStream(config.noise.seed, Stream::kProcess);
  RandomStream particle_rng = MakeStream(config.noise.seed, Stream::kParticles);

  TrajectoryLog log;
  log.targets = TrackingTargets(config);

  Vector x = config.initial_state;
  x.head(2) += config.initial_shift;
  car.Normalize(x);

  FilterState filter;
  Vector previous_u;
  int target = 0;
  int steps_on_target = 0;
  const int num_targets = static_cast<int>(log.targets.size());

  for (int k = 0; target < num_targets; ++k) {
    const double t = k * config.dt;
    try {
      const Vector y = car.Observation(x, Vector::Zero(2), t) +
                       GaussianVector(4, q, observation_rng);

      Vector estimate;
      if (config.filter == FilterKind::kNone) {
        estimate = y;
      } else if (k == 0) {
        Vector mean = y;
        car.Normalize(mean);
        filter.gaussian = {mean, initial_covariance};
        if (config.filter == FilterKind::kPf) {
          filter.particles = SampleParticles(filter.gaussian, config.particles,
                                             particle_rng, &car);
        }
        estimate = mean;
      } else {
        const double t_prev = (k - 1) * config.dt;
        switch (config.filter) {
          case FilterKind::kEkf:
            filter.gaussian = EkfStep(car, filter.gaussian, y, previous_u,
                                      filter_noise, t_prev);
            estimate = filter.gaussian.mean;
            break;
          case FilterKind::kUkf:
            filter.gaussian = UkfStep(car, filter.gaussian, y, previous_u,
                                      filter_noise, t_prev);
            estimate = filter.gaussian.mean;
            break;
          case FilterKind::kPf:
            filter.particles = PfStep(car, filter.particles, y, previous_u,
                                      filter_noise, t_prev, particle_rng);
            estimate = EstimateMean(car, filter.particles);
            break;
          case FilterKind::kNone:
            break;
        }
      }

      const Vector& goal = log.targets[static_cast<size_t>(target)];
      // Along a dense spline the controller chases a sample a few places
      // ahead so it does not brake at every one.
      const int aim_index =
          config.spline == SplineMode::kChspline
              ? std::min(target + config.lookahead, num_targets - 1)
              : target;
      const Vector& aim = log.targets[static_cast<size_t>(aim_index)];
      const Vector u =
          RecedingHorizonStep(car, config.cost, config.dt, estimate, aim,
                              config.mpc);

      StepRecord record;
      record.k = k;
      record.t = t;
      record.x_true = x;
      record.y_noisy = y;
      record.estimate = estimate;
      record.u = u;
      record.target_index = target;
      record.stage_cost = StageCost(config.cost, 0, estimate - aim, u);
      log.records.push_back(std::move(record));

      x = car.StateTransition(x, u, t);
      if (config.noise.process_scale > 0.0) {
        x += GaussianVector(4, config.noise.process_scale, process_rng);
        car.Normalize(x);
      }
      previous_u = u;

      ++steps_on_target;
      // Dense spline samples are guidance points: crossing one's gate counts.
      const bool arrived =
          PositionDistance(x, goal) <= config.tolerance ||
          (config.spline == SplineMode::kChspline && PassedGate(x, goal));
      if (arrived || steps_on_target >= config.max_steps_per_target) {
        if (!arrived) {
          spdlog::warn("target {} timed out after {} steps", target,
                       steps_on_target);
        }
        log.arrival_steps.push_back(k + 1);
        log.timed_out.push_back(!arrived);
        ++target;
        steps_on_target = 0;
      }
    } catch (const ContractViolation& e) {
      throw ScenarioStepError(k, e.what());
    } catch (const NumericalError& e) {
      throw ScenarioStepError(k, e.what());
    }
  }

  log.final_state = x;
  log.metrics = ComputeMetrics(log, ReferencePath());
  spdlog::debug("closed loop finished: {} steps, {} targets reached",
                log.records.size(), log.targets_reached());
  return log;
}

std::vector<double> CrossTrackErrors(const TrajectoryLog& log,
                                     const DensePath& reference) {
  if (reference.points.empty()) {
    throw ContractViolation("reference path is empty");
  }
  std::vector<double> errors;
  errors.reserve(log.records.size());
  for (const StepRecord& r : log.records) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& p : reference.points) {
      best = std::min(best, std::hypot(r.x_true[0] - p[0], r.x_true[1] - p[1]));
    }
    errors.push_back(best);
  }
  return errors;
}

Metrics ComputeMetrics(const TrajectoryLog& log, const DensePath& reference) {
  const std::vector<double> cross_track = CrossTrackErrors(log, reference);
  Metrics m;
  m.total_steps = static_cast<int>(log.records.size());
  if (log.records.empty()) return m;

  double est_sq = 0.0;
  double obs_sq = 0.0;
  double ct_sq = 0.0;
  for (size_t i = 0; i < log.records.size(); ++i) {
    const StepRecord& r = log.records[i];
    const double de = PositionDistance(r.estimate, r.x_true);
    const double dy = PositionDistance(r.y_noisy, r.x_true);
    est_sq += de * de;
    obs_sq += dy * dy;
    ct_sq += cross_track[i] * cross_track[i];
    m.cross_track_max = std::max(m.cross_track_max, cross_track[i]);
  }
  const double count = static_cast<double>(log.records.size());
  m.estimate_rmse = std::sqrt(est_sq / count);
  m.observation_rmse = std::sqrt(obs_sq / count);
  m.cross_track_rmse = std::sqrt(ct_sq / count);
  return m;
}

}  // namespace dubins_stack
