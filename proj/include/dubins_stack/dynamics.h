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

// Discrete-time dynamic systems:
//
//   x[k+1] = f(x[k], u[k], t[k])      (state transition)
//   y[k]   = g(x[k], u[k], t[k])      (observation)
//
// Noise is never part of a model; callers add it outside (see scenario.h).

#ifndef DUBINS_STACK_DYNAMICS_H_
#define DUBINS_STACK_DYNAMICS_H_

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dubins_stack {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// First-order affine model of a system around a reference point (x0, u0, t0):
//
//   f(x, u) ~= A x + B u + c1
//   g(x, u) ~= C x + D u + c2
//
// The residuals are defined so that both identities are exact at the
// reference point.
struct LinearizedSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Vector c1;
  Vector c2;
};

// Abstract interface. Implementations are immutable after construction; both
// maps must be pure.
class System {
 public:
  virtual ~System() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int observation_dim() const = 0;

  // Step size in seconds.
  virtual double dt() const = 0;

  virtual Vector StateTransition(const Vector& x, const Vector& u,
                                 double t) const = 0;
  virtual Vector Observation(const Vector& x, const Vector& u,
                             double t) const = 0;

  // Central finite-difference linearization by default. Linear systems
  // override this to return their matrices verbatim.
  virtual LinearizedSystem Linearize(const Vector& x0, const Vector& u0,
                                     double t0) const;

  // Projects a state estimate back onto the model's state manifold. Identity
  // for Euclidean systems; the Dubins car renormalizes its heading pair.
  virtual void Normalize(Vector& /*x*/) const {}
};

// Advances `system` one step. Returns (f(x,u,t), g(x,u,t)).
// Throws ContractViolation when the dimensions of `x` or `u` are wrong.
std::pair<Vector, Vector> Step(const System& system, const Vector& x,
                               const Vector& u, double t);

// Free-function form of System::Linearize with dimension checks.
LinearizedSystem Linearize(const System& system, const Vector& x0,
                           const Vector& u0, double t0);

// Finite-difference linearization of an arbitrary system. Each coordinate z_i
// of (x, u) is probed at z_i +/- h_i with h_i = cbrt(eps) * max(1, |z_i|).
// Throws NumericalDomainError if f or g is non-finite at any probe.
LinearizedSystem LinearizeNumerically(const System& system, const Vector& x0,
                                      const Vector& u0, double t0);

// x' = A x + B u + c1, y = C x + D u + c2 with constant matrices.
class LtiSystem : public System {
 public:
  // c1/c2 default to zero when left empty.
  LtiSystem(Matrix A, Matrix B, Matrix C, Matrix D, double dt = 0.1,
            Vector c1 = {}, Vector c2 = {});

  int state_dim() const override { return static_cast<int>(model_.A.rows()); }
  int input_dim() const override { return static_cast<int>(model_.B.cols()); }
  int observation_dim() const override {
    return static_cast<int>(model_.C.rows());
  }
  double dt() const override { return dt_; }

  Vector StateTransition(const Vector& x, const Vector& u,
                         double t) const override;
  Vector Observation(const Vector& x, const Vector& u,
                     double t) const override;
  LinearizedSystem Linearize(const Vector& x0, const Vector& u0,
                             double t0) const override;

  const LinearizedSystem& matrices() const { return model_; }

 private:
  LinearizedSystem model_;
  double dt_;
};

// Linear time-varying system: one LinearizedSystem per step index
// k = round(t / dt). Times past the end reuse the final matrices.
class LtvSystem : public System {
 public:
  LtvSystem(std::vector<LinearizedSystem> steps, double dt = 0.1);

  int state_dim() const override;
  int input_dim() const override;
  int observation_dim() const override;
  double dt() const override { return dt_; }

  Vector StateTransition(const Vector& x, const Vector& u,
                         double t) const override;
  Vector Observation(const Vector& x, const Vector& u,
                     double t) const override;
  LinearizedSystem Linearize(const Vector& x0, const Vector& u0,
                             double t0) const override;

 private:
  const LinearizedSystem& At(double t) const;

  std::vector<LinearizedSystem> steps_;
  double dt_;
};

// Planar Dubins car with state [i, j, cos(theta), sin(theta)] and input
// [v, phi] (forward speed in m/s, turn rate in rad/s). The position update
// uses the heading from *before* the turn:
//
//   theta' = atan2(s, c) + phi * dt
//   i'     = i + v * c * dt
//   j'     = j + v * s * dt
//   (c', s') = (cos theta', sin theta')
//
// The observation is the full state.
class DubinsCar : public System {
 public:
  static constexpr int kStateDim = 4;
  static constexpr int kInputDim = 2;

  explicit DubinsCar(double dt = 0.1);

  int state_dim() const override { return kStateDim; }
  int input_dim() const override { return kInputDim; }
  int observation_dim() const override { return kStateDim; }
  double dt() const override { return dt_; }

  Vector StateTransition(const Vector& x, const Vector& u,
                         double t) const override;
  Vector Observation(const Vector& x, const Vector& u,
                     double t) const override;

  // Rescales (cos, sin) to unit length. Leaves a zero pair untouched.
  void Normalize(Vector& x) const override;

 private:
  double dt_;
};

// The Dubins transition as a free function of the step size.
Vector DubinsStateTransition(const Vector& x, const Vector& u, double dt);

}  // namespace dubins_stack

#endif  // DUBINS_STACK_DYNAMICS_H_
