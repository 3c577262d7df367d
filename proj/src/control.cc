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

#include "dubins_stack/control.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dubins_stack/errors.h"

namespace dubins_stack {
namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kPsdTolerance = 1e-9;

const LinearizedSystem& SystemAt(const std::vector<LinearizedSystem>& systems,
                                 int k) {
  return systems.size() == 1 ? systems.front()
                             : systems[static_cast<size_t>(k)];
}

double MinEigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

const Matrix& QuadraticCost::Weight(int k) const {
  return weights.size() == 1 ? weights.front()
                             : weights.at(static_cast<size_t>(k));
}

const Vector& QuadraticCost::Linear(int k) const {
  return linear.size() == 1 ? linear.front()
                            : linear.at(static_cast<size_t>(k));
}

Matrix QuadraticCost::TerminalWeight(int state_dim) const {
  if (terminal_weight) return *terminal_weight;
  return Weight(horizon - 1).topLeftCorner(state_dim, state_dim);
}

Vector QuadraticCost::TerminalLinear(int state_dim) const {
  if (terminal_linear) return *terminal_linear;
  return Linear(horizon - 1).head(state_dim);
}

QuadraticCost MakeConstantCost(Matrix weight, Vector linear, int horizon) {
  QuadraticCost cost;
  cost.weights = {std::move(weight)};
  cost.linear = {std::move(linear)};
  cost.horizon = horizon;
  return cost;
}

void ValidateCost(const QuadraticCost& cost, int state_dim, int input_dim) {
  if (cost.horizon < 1) throw ContractViolation("horizon must be >= 1");
  const auto broadcastable = [&](size_t size, const char* what) {
    if (size != 1 && size != static_cast<size_t>(cost.horizon)) {
      std::ostringstream msg;
      msg << what << ": expected 1 or " << cost.horizon << " entries, got "
          << size;
      throw ContractViolation(msg.str());
    }
  };
  broadcastable(cost.weights.size(), "cost weights");
  broadcastable(cost.linear.size(), "cost linear terms");

  const int z = state_dim + input_dim;
  for (const Matrix& w : cost.weights) {
    CheckDimension("cost weight rows", z, w.rows());
    CheckDimension("cost weight columns", z, w.cols());
    if (!w.allFinite() ||
        (w - w.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      throw ContractViolation("cost weight must be finite and symmetric");
    }
    if (MinEigenvalue(w.topLeftCorner(state_dim, state_dim)) <
        -kPsdTolerance) {
      throw ContractViolation("state block of the cost weight is not PSD");
    }
    Eigen::LLT<Matrix> llt(w.bottomRightCorner(input_dim, input_dim));
    if (llt.info() != Eigen::Success) {
      throw SolvabilityError(
          "input block of the cost weight is not positive definite");
    }
  }
  for (const Vector& p : cost.linear) {
    CheckDimension("cost linear term", z, p.size());
  }
  if (cost.terminal_weight) {
    CheckDimension("terminal weight rows", state_dim,
                   cost.terminal_weight->rows());
    CheckDimension("terminal weight columns", state_dim,
                   cost.terminal_weight->cols());
  }
  if (cost.terminal_linear) {
    CheckDimension("terminal linear term", state_dim,
                   cost.terminal_linear->size());
  }
}

double StageCost(const QuadraticCost& cost, int k, const Vector& x,
                 const Vector& u) {
  Vector z(x.size() + u.size());
  z << x, u;
  return 0.5 * z.dot(cost.Weight(k) * z) + cost.Linear(k).dot(z);
}

double TerminalCost(const QuadraticCost& cost, const Vector& x) {
  const int n = static_cast<int>(x.size());
  return 0.5 * x.dot(cost.TerminalWeight(n) * x) +
         cost.TerminalLinear(n).dot(x);
}

double TrajectoryCost(const QuadraticCost& cost,
                      const std::vector<Vector>& states,
                      const std::vector<Vector>& inputs) {
  double total = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    total += StageCost(cost, static_cast<int>(k), states[k], inputs[k]);
  }
  return total + TerminalCost(cost, states.back());
}

ControlSolution LqrSolve(const std::vector<LinearizedSystem>& systems,
                         const QuadraticCost& cost, const Vector& x0) {
  const int horizon = cost.horizon;
  if (systems.empty()) throw ContractViolation("no linear systems given");
  if (systems.size() != 1 && systems.size() != static_cast<size_t>(horizon)) {
    std::ostringstream msg;
    msg << "linear systems: expected 1 or " << horizon << " entries, got "
        << systems.size();
    throw ContractViolation(msg.str());
  }
  const int n = static_cast<int>(systems.front().A.rows());
  const int c = static_cast<int>(systems.front().B.cols());
  CheckDimension("initial state", n, x0.size());
  for (const auto& s : systems) {
    CheckDimension("A rows", n, s.A.rows());
    CheckDimension("A columns", n, s.A.cols());
    CheckDimension("B rows", n, s.B.rows());
    CheckDimension("B columns", c, s.B.cols());
    CheckDimension("c1", n, s.c1.size());
  }
  ValidateCost(cost, n, c);

  // Value function V_k(x) = 1/2 x^T P x + s^T x + const.
  Matrix value_hessian = cost.TerminalWeight(n);
  Vector value_gradient = cost.TerminalLinear(n);
  std::vector<Matrix> feedback(static_cast<size_t>(horizon));
  std::vector<Vector> feedforward(static_cast<size_t>(horizon));

  for (int k = horizon - 1; k >= 0; --k) {
    const LinearizedSystem& sys = SystemAt(systems, k);
    const Matrix& w = cost.Weight(k);
    const Vector& p = cost.Linear(k);

    const Matrix pa = value_hessian * sys.A;
    const Matrix pb = value_hessian * sys.B;
    const Vector carry = value_hessian * sys.c1 + value_gradient;

    const Matrix q_xx = w.topLeftCorner(n, n) + sys.A.transpose() * pa;
    const Matrix q_uu = w.bottomRightCorner(c, c) + sys.B.transpose() * pb;
    const Matrix q_ux = w.bottomLeftCorner(c, n) + sys.B.transpose() * pa;
    const Vector q_x = p.head(n) + sys.A.transpose() * carry;
    const Vector q_u = p.tail(c) + sys.B.transpose() * carry;

    Eigen::LLT<Matrix> llt(0.5 * (q_uu + q_uu.transpose()));
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "input Hessian is not positive definite at step " << k;
      throw SolvabilityError(msg.str());
    }
    Matrix gain = -llt.solve(q_ux);
    Vector offset = -llt.solve(q_u);

    value_hessian = q_xx + q_ux.transpose() * gain;
    value_hessian = 0.5 * (value_hessian + value_hessian.transpose());
    value_gradient = q_x + q_ux.transpose() * offset;
    if (!value_hessian.allFinite() || !value_gradient.allFinite() ||
        !gain.allFinite() || !offset.allFinite()) {
      std::ostringstream msg;
      msg << "Riccati recursion diverged at step " << k;
      throw DivergenceError(msg.str());
    }
    feedback[static_cast<size_t>(k)] = std::move(gain);
    feedforward[static_cast<size_t>(k)] = std::move(offset);
  }

  ControlSolution solution;
  solution.states.reserve(static_cast<size_t>(horizon) + 1);
  solution.inputs.reserve(static_cast<size_t>(horizon));
  solution.states.push_back(x0);
  for (int k = 0; k < horizon; ++k) {
    const auto idx = static_cast<size_t>(k);
    const LinearizedSystem& sys = SystemAt(systems, k);
    const Vector& x = solution.states.back();
    Vector u = feedback[idx] * x + feedforward[idx];
    Vector next = sys.A * x + sys.B * u + sys.c1;
    solution.inputs.push_back(std::move(u));
    solution.states.push_back(std::move(next));
  }
  solution.cost = TrajectoryCost(cost, solution.states, solution.inputs);
  return solution;
}

namespace {

struct Rollout {
  std::vector<Vector> states;
  double cost = 0.0;
};

Rollout RollOut(const System& system, const QuadraticCost& cost, double dt,
                const Vector& x0, const Vector& target,
                const std::vector<Vector>& inputs) {
  Rollout r;
  r.states.reserve(inputs.size() + 1);
  r.states.push_back(x0);
  for (size_t k = 0; k < inputs.size(); ++k) {
    r.cost += StageCost(cost, static_cast<int>(k), r.states.back() - target,
                        inputs[k]);
    r.states.push_back(system.StateTransition(
        r.states.back(), inputs[k], static_cast<double>(k) * dt));
  }
  r.cost += TerminalCost(cost, r.states.back() - target);
  return r;
}

double MaxInputChange(const std::vector<Vector>& a,
                      const std::vector<Vector>& b) {
  double change = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    change = std::max(change, (a[k] - b[k]).cwiseAbs().maxCoeff());
  }
  return change;
}

}  // namespace

MpcSolution MpcSolve(const System& system, const QuadraticCost& cost,
                     double dt, const Vector& x_current, const Vector& target,
                     const MpcOptions& options) {
  const int n = system.state_dim();
  const int c = system.input_dim();
  CheckDimension("current state", n, x_current.size());
  CheckDimension("target", n, target.size());
  ValidateCost(cost, n, c);
  if (!(dt > 0.0)) throw ContractViolation("dt must be positive");
  if (options.max_iterations < 1) {
    throw ContractViolation("max_iterations must be >= 1");
  }
  const int horizon = cost.horizon;
  // Slack for accepting a candidate whose cost ties the nominal up to
  // rounding.
  constexpr double kTieSlack = 1e-12;

  std::vector<Vector> nominal_inputs(static_cast<size_t>(horizon),
                                     Vector::Zero(c));
  Rollout nominal =
      RollOut(system, cost, dt, x_current, target, nominal_inputs);

  MpcSolution result;
  result.cost_history.push_back(nominal.cost);
  std::vector<LinearizedSystem> error_systems(static_cast<size_t>(horizon));

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    for (int k = 0; k < horizon; ++k) {
      const auto idx = static_cast<size_t>(k);
      LinearizedSystem lin =
          system.Linearize(nominal.states[idx], nominal_inputs[idx],
                           static_cast<double>(k) * dt);
      // x' - r = A (x - r) + B u + (c1 + A r - r)
      lin.c1 += lin.A * target - target;
      error_systems[idx] = std::move(lin);
    }
    const ControlSolution sub =
        LqrSolve(error_systems, cost, x_current - target);

    bool accepted = false;
    double blend = 1.0;
    std::vector<Vector> candidate_inputs;
    Rollout candidate;
    for (int h = 0; h <= options.max_halvings; ++h, blend *= 0.5) {
      if (h == 0) {
        candidate_inputs = sub.inputs;
      } else {
        for (size_t k = 0; k < candidate_inputs.size(); ++k) {
          candidate_inputs[k] =
              nominal_inputs[k] + blend * (sub.inputs[k] - nominal_inputs[k]);
        }
      }
      candidate =
          RollOut(system, cost, dt, x_current, target, candidate_inputs);
      if (std::isfinite(candidate.cost) &&
          candidate.cost <=
              nominal.cost + kTieSlack * std::max(1.0, std::abs(nominal.cost))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    const double change = MaxInputChange(candidate_inputs, nominal_inputs);
    nominal_inputs = std::move(candidate_inputs);
    nominal = std::move(candidate);
    result.cost_history.push_back(nominal.cost);
    if (change < options.input_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.states = std::move(nominal.states);
  result.inputs = std::move(nominal_inputs);
  result.cost = nominal.cost;
  return result;
}

Vector RecedingHorizonStep(const System& system, const QuadraticCost& cost,
                           double dt, const Vector& x_current,
                           const Vector& target, const MpcOptions& options) {
  return MpcSolve(system, cost, dt, x_current, target, options).inputs.front();
}

}  // namespace dubins_stack
