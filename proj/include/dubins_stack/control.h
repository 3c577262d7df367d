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

// Finite-horizon optimal control.
//
// Both solvers minimize, over inputs u[0..T-1],
//
//   J = sum_{k<T} ( 1/2 z_k^T W_k z_k + w_k^T z_k ) + 1/2 x_T^T W_T x_T + w_T^T x_T
//
// with z_k = (x_k, u_k). Inputs are only penalized at steps 0..T-1; the
// terminal state x_T carries the state block of the cost (see
// QuadraticCost::TerminalWeight).

#ifndef DUBINS_STACK_CONTROL_H_
#define DUBINS_STACK_CONTROL_H_

#include <optional>
#include <vector>

#include "dubins_stack/dynamics.h"

namespace dubins_stack {

struct QuadraticCost {
  // One matrix per step, or a single matrix broadcast to every step. Each is
  // (N+C) x (N+C), symmetric, with a PSD state block and a positive definite
  // input block.
  std::vector<Matrix> weights;
  // One (N+C) vector per step, or a single one broadcast.
  std::vector<Vector> linear;
  int horizon = 1;
  // Terminal N x N weight and N vector. When unset, the state blocks of the
  // final stage's weight/linear term are used.
  std::optional<Matrix> terminal_weight;
  std::optional<Vector> terminal_linear;

  const Matrix& Weight(int k) const;
  const Vector& Linear(int k) const;
  Matrix TerminalWeight(int state_dim) const;
  Vector TerminalLinear(int state_dim) const;
};

// Convenience: constant per-step cost.
QuadraticCost MakeConstantCost(Matrix weight, Vector linear, int horizon);

// Throws ContractViolation for shape/symmetry problems and SolvabilityError
// when an input block is not positive definite.
void ValidateCost(const QuadraticCost& cost, int state_dim, int input_dim);

double StageCost(const QuadraticCost& cost, int k, const Vector& x,
                 const Vector& u);
double TerminalCost(const QuadraticCost& cost, const Vector& x);

struct ControlSolution {
  std::vector<Vector> states;  // T + 1
  std::vector<Vector> inputs;  // T
  double cost = 0.0;
};

// Total cost of a (states, inputs) trajectory.
double TrajectoryCost(const QuadraticCost& cost,
                      const std::vector<Vector>& states,
                      const std::vector<Vector>& inputs);

// Backward Riccati recursion over affine dynamics x' = A_k x + B_k u + c1_k
// followed by a forward rollout on the same model. `systems` holds either T
// entries or a single one reused at every step.
// Throws SolvabilityError when a stage Hessian in u is not positive definite
// and DivergenceError when the recursion produces non-finite values.
ControlSolution LqrSolve(const std::vector<LinearizedSystem>& systems,
                         const QuadraticCost& cost, const Vector& x0);

struct MpcOptions {
  int max_iterations = 10;
  double input_tolerance = 1e-4;
  int max_halvings = 5;
};

struct MpcSolution : ControlSolution {
  bool converged = false;
  int iterations = 0;
  // Rollout cost of each accepted nominal, starting with the zero-input one.
  std::vector<double> cost_history;
};

// Nonlinear MPC by sequential linearization. The cost is applied to
// (x - target, u). Each outer iteration linearizes f along the current nominal
// trajectory (initially zero inputs from x_current), solves the LQR
// subproblem, and rolls the new inputs through the true dynamics. A candidate
// is accepted only if its rollout cost does not increase; otherwise it is
// blended halfway back toward the previous nominal, up to `max_halvings`
// times. Stops when the inputs move by less than `input_tolerance` (max-norm)
// or after `max_iterations`; the result is flagged non-converged in the
// latter case.
MpcSolution MpcSolve(const System& system, const QuadraticCost& cost,
                     double dt, const Vector& x_current, const Vector& target,
                     const MpcOptions& options = {});

// First input of MpcSolve's plan.
Vector RecedingHorizonStep(const System& system, const QuadraticCost& cost,
                           double dt, const Vector& x_current,
                           const Vector& target,
                           const MpcOptions& options = {});

}  // namespace dubins_stack

#endif  // DUBINS_STACK_CONTROL_H_
