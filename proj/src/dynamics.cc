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

#include "dubins_stack/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dubins_stack/errors.h"

namespace dubins_stack {

void CheckDimension(const std::string& what, long expected, long actual) {
  if (expected != actual) {
    std::ostringstream msg;
    msg << what << ": expected length " << expected << ", got " << actual;
    throw ContractViolation(msg.str());
  }
}

namespace {

void CheckStateInput(const System& system, const Vector& x, const Vector& u) {
  CheckDimension("state", system.state_dim(), x.size());
  CheckDimension("input", system.input_dim(), u.size());
}

void CheckFinite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericalDomainError(std::string(what) +
                               " is non-finite at a linearization probe");
  }
}

}  // namespace

std::pair<Vector, Vector> Step(const System& system, const Vector& x,
                               const Vector& u, double t) {
  CheckStateInput(system, x, u);
  return {system.StateTransition(x, u, t), system.Observation(x, u, t)};
}

LinearizedSystem System::Linearize(const Vector& x0, const Vector& u0,
                                   double t0) const {
  return LinearizeNumerically(*this, x0, u0, t0);
}

LinearizedSystem Linearize(const System& system, const Vector& x0,
                           const Vector& u0, double t0) {
  CheckStateInput(system, x0, u0);
  return system.Linearize(x0, u0, t0);
}

LinearizedSystem LinearizeNumerically(const System& system, const Vector& x0,
                                      const Vector& u0, double t0) {
  const int n = system.state_dim();
  const int c = system.input_dim();
  const int m = system.observation_dim();
  const double step_scale = std::cbrt(std::numeric_limits<double>::epsilon());

  const Vector f0 = system.StateTransition(x0, u0, t0);
  const Vector g0 = system.Observation(x0, u0, t0);
  CheckFinite(f0, "state transition");
  CheckFinite(g0, "observation");

  Vector z(n + c);
  z << x0, u0;
  Matrix jf(n, n + c);
  Matrix jg(m, n + c);
  for (int i = 0; i < n + c; ++i) {
    const double h = step_scale * std::max(1.0, std::abs(z[i]));
    Vector zp = z;
    Vector zm = z;
    zp[i] += h;
    zm[i] -= h;
    // Use the representable step so the quotient is not biased by rounding.
    const double span = zp[i] - zm[i];
    const Vector xp = zp.head(n), up = zp.tail(c);
    const Vector xm = zm.head(n), um = zm.tail(c);
    const Vector fp = system.StateTransition(xp, up, t0);
    const Vector fm = system.StateTransition(xm, um, t0);
    const Vector gp = system.Observation(xp, up, t0);
    const Vector gm = system.Observation(xm, um, t0);
    CheckFinite(fp, "state transition");
    CheckFinite(fm, "state transition");
    CheckFinite(gp, "observation");
    CheckFinite(gm, "observation");
    jf.col(i) = (fp - fm) / span;
    jg.col(i) = (gp - gm) / span;
  }

  LinearizedSystem lin;
  lin.A = jf.leftCols(n);
  lin.B = jf.rightCols(c);
  lin.C = jg.leftCols(n);
  lin.D = jg.rightCols(c);
  lin.c1 = f0 - lin.A * x0 - lin.B * u0;
  lin.c2 = g0 - lin.C * x0 - lin.D * u0;
  return lin;
}

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix C, Matrix D, double dt,
                     Vector c1, Vector c2)
    : dt_(dt) {
  const long n = A.rows();
  CheckDimension("A columns", n, A.cols());
  CheckDimension("B rows", n, B.rows());
  CheckDimension("C columns", n, C.cols());
  CheckDimension("D rows", C.rows(), D.rows());
  CheckDimension("D columns", B.cols(), D.cols());
  if (c1.size() == 0) c1 = Vector::Zero(n);
  if (c2.size() == 0) c2 = Vector::Zero(C.rows());
  CheckDimension("c1", n, c1.size());
  CheckDimension("c2", C.rows(), c2.size());
  model_ = {std::move(A), std::move(B), std::move(C),
            std::move(D), std::move(c1), std::move(c2)};
}

Vector LtiSystem::StateTransition(const Vector& x, const Vector& u,
                                  double /*t*/) const {
  return model_.A * x + model_.B * u + model_.c1;
}

Vector LtiSystem::Observation(const Vector& x, const Vector& u,
                              double /*t*/) const {
  return model_.C * x + model_.D * u + model_.c2;
}

LinearizedSystem LtiSystem::Linearize(const Vector& /*x0*/,
                                      const Vector& /*u0*/,
                                      double /*t0*/) const {
  return model_;
}

LtvSystem::LtvSystem(std::vector<LinearizedSystem> steps, double dt)
    : steps_(std::move(steps)), dt_(dt) {
  if (steps_.empty()) {
    throw ContractViolation("LtvSystem needs at least one step");
  }
  if (!(dt_ > 0.0)) throw ContractViolation("LtvSystem dt must be positive");
  const auto& first = steps_.front();
  for (const auto& s : steps_) {
    CheckDimension("LTV A rows", first.A.rows(), s.A.rows());
    CheckDimension("LTV A columns", first.A.rows(), s.A.cols());
    CheckDimension("LTV B columns", first.B.cols(), s.B.cols());
    CheckDimension("LTV C rows", first.C.rows(), s.C.rows());
    CheckDimension("LTV c1", first.A.rows(), s.c1.size());
    CheckDimension("LTV c2", first.C.rows(), s.c2.size());
  }
}

int LtvSystem::state_dim() const {
  return static_cast<int>(steps_.front().A.rows());
}
int LtvSystem::input_dim() const {
  return static_cast<int>(steps_.front().B.cols());
}
int LtvSystem::observation_dim() const {
  return static_cast<int>(steps_.front().C.rows());
}

const LinearizedSystem& LtvSystem::At(double t) const {
  const long k = std::lround(t / dt_);
  const long last = static_cast<long>(steps_.size()) - 1;
  return steps_[static_cast<size_t>(std::clamp(k, 0L, last))];
}

Vector LtvSystem::StateTransition(const Vector& x, const Vector& u,
                                  double t) const {
  const auto& s = At(t);
  return s.A * x + s.B * u + s.c1;
}

Vector LtvSystem::Observation(const Vector& x, const Vector& u,
                              double t) const {
  const auto& s = At(t);
  return s.C * x + s.D * u + s.c2;
}

LinearizedSystem LtvSystem::Linearize(const Vector& /*x0*/,
                                      const Vector& /*u0*/, double t0) const {
  return At(t0);
}

DubinsCar::DubinsCar(double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ContractViolation("DubinsCar dt must be positive and finite");
  }
}

Vector DubinsStateTransition(const Vector& x, const Vector& u, double dt) {
  CheckDimension("Dubins state", DubinsCar::kStateDim, x.size());
  CheckDimension("Dubins input", DubinsCar::kInputDim, u.size());
  const double v = u[0];
  const double phi = u[1];
  const double c = x[2];
  const double s = x[3];
  const double theta = std::atan2(s, c) + phi * dt;

  Vector next(4);
  next << x[0] + v * c * dt, x[1] + v * s * dt, std::cos(theta),
      std::sin(theta);
  return next;
}

Vector DubinsCar::StateTransition(const Vector& x, const Vector& u,
                                  double /*t*/) const {
  return DubinsStateTransition(x, u, dt_);
}

Vector DubinsCar::Observation(const Vector& x, const Vector& /*u*/,
                              double /*t*/) const {
  return x;
}

void DubinsCar::Normalize(Vector& x) const {
  const double norm = std::hypot(x[2], x[3]);
  if (norm > 0.0) {
    x[2] /= norm;
    x[3] /= norm;
  }
}

}  // namespace dubins_stack
