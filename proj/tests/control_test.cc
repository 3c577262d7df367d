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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dubins_stack/errors.h"
#include "oracles.h"

namespace dubins_stack {
namespace {

Vector V(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

double MaxDiff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

LinearizedSystem Affine(Matrix a, Matrix b, Vector c1) {
  const auto n = a.rows();
  return {std::move(a), std::move(b), Matrix::Identity(n, n),
          Matrix::Zero(n, 1), std::move(c1), Vector::Zero(n)};
}

struct RandomInstance {
  std::vector<LinearizedSystem> steps;
  QuadraticCost cost;
  Vector x0;
};

// Random affine LTI problem with a PSD state block, a PD input block and a
// cross term small enough to keep the joint weight PSD.
RandomInstance MakeInstance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_n(1, 4), dim_c(1, 2), len(1, 6);
  const int n = dim_n(rng), c = dim_c(rng), horizon = len(rng);
  const Matrix a = oracle::RandomStable(n, 1.2, rng);
  const Matrix b = oracle::RandomMatrix(n, c, rng);
  const Vector c1 = 0.1 * oracle::RandomMatrix(n, 1, rng);
  Matrix w = oracle::RandomSpd(n + c, 0.05, 2.0, rng);
  w.topLeftCorner(n, n) += oracle::RandomSpd(n, 0.0, 1.0, rng);
  RandomInstance inst;
  inst.steps.assign(static_cast<size_t>(horizon), Affine(a, b, c1));
  inst.cost = MakeConstantCost(w, 0.3 * oracle::RandomMatrix(n + c, 1, rng),
                               horizon);
  inst.x0 = oracle::RandomMatrix(n, 1, rng);
  return inst;
}

oracle::DenseQpSolution SolveDense(const RandomInstance& inst) {
  const int n = static_cast<int>(inst.x0.size());
  std::vector<Matrix> w;
  std::vector<Vector> lin;
  for (int k = 0; k < inst.cost.horizon; ++k) {
    w.push_back(inst.cost.Weight(k));
    lin.push_back(inst.cost.Linear(k));
  }
  // Terminal: state blocks of the last stage, written out independently.
  const Matrix qf = w.back().topLeftCorner(n, n);
  const Vector pf = lin.back().head(n);
  return oracle::DenseQp(inst.steps, w, lin, qf, pf, inst.x0);
}

TEST(Lqr, OriginIsOptimalForScalarIntegrator) {
  const QuadraticCost cost = MakeConstantCost(Matrix::Identity(2, 2),
                                              Vector::Zero(2), 1);
  const ControlSolution sol = LqrSolve(
      {Affine(Matrix::Ones(1, 1), Matrix::Ones(1, 1), V({0.0}))}, cost, V({0.0}));
  ASSERT_EQ(sol.inputs.size(), 1u);
  ASSERT_EQ(sol.states.size(), 2u);
  EXPECT_EQ(sol.inputs[0](0), 0.0);
  EXPECT_EQ(sol.cost, 0.0);
}

TEST(Lqr, DoubleIntegratorMatchesDenseQp) {
  Matrix a(2, 2);
  a << 1, 0.1, 0, 1;
  Matrix b(2, 1);
  b << 0.005, 0.1;
  RandomInstance inst;
  inst.steps.assign(5, Affine(a, b, Vector::Zero(2)));
  inst.cost = MakeConstantCost(Matrix::Identity(3, 3), Vector::Zero(3), 5);
  inst.x0 = V({1.0, 0.0});
  const ControlSolution sol = LqrSolve(inst.steps, inst.cost, inst.x0);
  const oracle::DenseQpSolution ref = SolveDense(inst);
  EXPECT_LE(MaxDiff(sol.inputs, ref.inputs), 1e-6);
  EXPECT_NEAR(sol.cost, ref.cost, 1e-9);
}

TEST(Lqr, RolloutHonorsAffineTerm) {
  // x' = x + u + 1 with only a terminal penalty on x.
  QuadraticCost cost = MakeConstantCost(
      (Matrix(2, 2) << 0, 0, 0, 1).finished(), Vector::Zero(2), 4);
  cost.terminal_weight = Matrix::Identity(1, 1);
  cost.terminal_linear = Vector::Zero(1);
  const std::vector<LinearizedSystem> steps(
      4, Affine(Matrix::Ones(1, 1), Matrix::Ones(1, 1), V({1.0})));
  const ControlSolution sol = LqrSolve(steps, cost, V({0.5}));
  EXPECT_EQ(sol.states[0], V({0.5}));
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(sol.states[k + 1](0),
              sol.states[k](0) + sol.inputs[k](0) + 1.0);
  }
}

TEST(Lqr, TimeVaryingSystemsMatchDenseQp) {
  std::mt19937_64 rng(9);
  RandomInstance inst;
  std::vector<Matrix> w;
  std::vector<Vector> lin;
  for (int k = 0; k < 5; ++k) {
    inst.steps.push_back(Affine(oracle::RandomStable(3, 1.1, rng),
                                oracle::RandomMatrix(3, 2, rng),
                                oracle::RandomMatrix(3, 1, rng)));
    w.push_back(oracle::RandomSpd(5, 0.1, 2.0, rng));
    lin.push_back(oracle::RandomMatrix(5, 1, rng));
  }
  inst.cost.weights = w;
  inst.cost.linear = lin;
  inst.cost.horizon = 5;
  inst.cost.terminal_weight = oracle::RandomSpd(3, 0.0, 3.0, rng);
  inst.cost.terminal_linear = oracle::RandomMatrix(3, 1, rng);
  inst.x0 = oracle::RandomMatrix(3, 1, rng);
  const ControlSolution sol = LqrSolve(inst.steps, inst.cost, inst.x0);
  const oracle::DenseQpSolution ref =
      oracle::DenseQp(inst.steps, w, lin, *inst.cost.terminal_weight,
                      *inst.cost.terminal_linear, inst.x0);
  EXPECT_LE(MaxDiff(sol.inputs, ref.inputs), 1e-6);
  EXPECT_NEAR(sol.cost, ref.cost, 1e-8 * std::max(1.0, std::abs(ref.cost)));
}

TEST(Lqr, RandomInstancesAreOptimal) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const RandomInstance inst = MakeInstance(rng);
    const ControlSolution sol = LqrSolve(inst.steps, inst.cost, inst.x0);
    const oracle::DenseQpSolution ref = SolveDense(inst);
    ASSERT_LE(MaxDiff(sol.inputs, ref.inputs), 1e-6) << trial;

    // The QP gradient at the returned inputs vanishes.
    const int n = static_cast<int>(inst.x0.size());
    std::vector<Matrix> w;
    std::vector<Vector> lin;
    for (int k = 0; k < inst.cost.horizon; ++k) {
      w.push_back(inst.cost.Weight(k));
      lin.push_back(inst.cost.Linear(k));
    }
    Vector stacked(static_cast<Eigen::Index>(sol.inputs.size()) *
                   sol.inputs[0].size());
    for (size_t k = 0; k < sol.inputs.size(); ++k) {
      stacked.segment(static_cast<Eigen::Index>(k) * sol.inputs[0].size(),
                      sol.inputs[0].size()) = sol.inputs[k];
    }
    const Vector u_ref_stacked = [&] {
      Vector s(stacked.size());
      for (size_t k = 0; k < ref.inputs.size(); ++k) {
        s.segment(static_cast<Eigen::Index>(k) * ref.inputs[0].size(),
                  ref.inputs[0].size()) = ref.inputs[k];
      }
      return s;
    }();
    const Vector grad = ref.gradient + ref.hessian * (stacked - u_ref_stacked);
    EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-6) << trial;

    // No random input sequence does better.
    const Matrix qf = w.back().topLeftCorner(n, n);
    const Vector pf = lin.back().head(n);
    for (int s = 0; s < 1000; ++s) {
      std::vector<Vector> inputs = sol.inputs;
      for (Vector& u : inputs) {
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) += normal(rng);
      }
      ASSERT_GE(oracle::DenseQpCost(inst.steps, w, lin, qf, pf, inst.x0, inputs),
                sol.cost - 1e-9);
    }
  }
}

TEST(Lqr, IndefiniteInputBlockIsUnsolvable) {
  Matrix w = Matrix::Identity(2, 2);
  w(1, 1) = 0.0;
  EXPECT_THROW(LqrSolve({Affine(Matrix::Ones(1, 1), Matrix::Ones(1, 1), V({0}))},
                        MakeConstantCost(w, Vector::Zero(2), 1), V({1.0})),
               SolvabilityError);
}

TEST(Lqr, MalformedCostIsContractViolation) {
  Matrix w = Matrix::Identity(2, 2);
  w(0, 1) = 0.5;  // not symmetric
  EXPECT_THROW(ValidateCost(MakeConstantCost(w, Vector::Zero(2), 1), 1, 1),
               ContractViolation);
  EXPECT_THROW(ValidateCost(MakeConstantCost(Matrix::Identity(3, 3),
                                             Vector::Zero(3), 1),
                            1, 1),
               ContractViolation);
  EXPECT_THROW(ValidateCost(MakeConstantCost(Matrix::Identity(2, 2),
                                             Vector::Zero(2), 0),
                            1, 1),
               ContractViolation);
}

TEST(Lqr, OverflowingRiccatiIsDivergence) {
  const std::vector<LinearizedSystem> steps(
      6, Affine(1e80 * Matrix::Ones(1, 1), Matrix::Ones(1, 1), V({0.0})));
  EXPECT_THROW(LqrSolve(steps,
                        MakeConstantCost(Matrix::Identity(2, 2),
                                         Vector::Zero(2), 6),
                        V({1.0})),
               DivergenceError);
}

QuadraticCost DubinsCost(int horizon) {
  Vector d(6);
  d << 10, 10, 1, 1, 1, 0.1;
  return MakeConstantCost(d.asDiagonal(), Vector::Zero(6), horizon);
}

TEST(Mpc, AtTargetAppliesNoInput) {
  DubinsCar car;
  const Vector x = V({0.5, -0.2, 0.6, 0.8});
  const MpcSolution sol = MpcSolve(car, DubinsCost(10), 0.1, x, x);
  for (const Vector& u : sol.inputs) EXPECT_LE(u.cwiseAbs().maxCoeff(), 1e-6);
  for (const Vector& s : sol.states) EXPECT_LE((s - x).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(RecedingHorizonStep(car, DubinsCost(10), 0.1, x, x).norm(), 1e-6);
}

TEST(Mpc, LinearSystemEqualsShiftedLqr) {
  std::mt19937_64 rng(31);
  const Matrix a = oracle::RandomStable(3, 1.1, rng);
  const Matrix b = oracle::RandomMatrix(3, 2, rng);
  const Vector c1 = oracle::RandomMatrix(3, 1, rng);
  LtiSystem sys(a, b, Matrix::Identity(3, 3), Matrix::Zero(3, 2), 0.1, c1);
  const QuadraticCost cost =
      MakeConstantCost(oracle::RandomSpd(5, 0.1, 2.0, rng), Vector::Zero(5), 6);
  const Vector x = oracle::RandomMatrix(3, 1, rng);
  const Vector target = oracle::RandomMatrix(3, 1, rng);

  const MpcSolution sol = MpcSolve(sys, cost, 0.1, x, target);
  const std::vector<LinearizedSystem> shifted(6, Affine(a, b, c1 + a * target - target));
  const ControlSolution lqr = LqrSolve(shifted, cost, x - target);
  EXPECT_TRUE(sol.converged);
  // The first pass is exact; the second only confirms it.
  EXPECT_LE(sol.iterations, 2);
  EXPECT_LE(MaxDiff(sol.inputs, lqr.inputs), 1e-9);
  EXPECT_NEAR(sol.cost, lqr.cost, 1e-9 * std::max(1.0, std::abs(lqr.cost)));
}

TEST(Mpc, DubinsReachesPointAheadAndBeatsConstantPolicies) {
  DubinsCar car(0.1);
  Vector d(6);
  d << 100, 100, 1, 1, 0.01, 0.01;
  const QuadraticCost cost = MakeConstantCost(d.asDiagonal(), Vector::Zero(6), 10);
  const Vector x = V({0, 0, 1, 0});
  const Vector target = V({1, 0, 1, 0});
  const MpcSolution sol = MpcSolve(car, cost, 0.1, x, target);
  EXPECT_LE((sol.states.back().head<2>() - target.head<2>()).norm(), 0.05);

  // Grid over constant (v, phi) policies, scored with the same error-frame cost.
  double best = std::numeric_limits<double>::infinity();
  for (double v = -2.0; v <= 3.0 + 1e-9; v += 0.02) {
    for (double phi = -2.0; phi <= 2.0 + 1e-9; phi += 0.05) {
      std::vector<Vector> states{x - target};
      std::vector<Vector> inputs;
      Vector s = x;
      for (int k = 0; k < 10; ++k) {
        inputs.push_back(V({v, phi}));
        s = car.StateTransition(s, inputs.back(), 0.1 * k);
        states.push_back(s - target);
      }
      best = std::min(best, TrajectoryCost(cost, states, inputs));
    }
  }
  EXPECT_LE(sol.cost, 1.01 * best);
}

TEST(Mpc, RolloutCostNeverIncreases) {
  DubinsCar car(0.1);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int trial = 0; trial < 30; ++trial) {
    const double th = 2.0 * uni(rng), th_t = 2.0 * uni(rng);
    const Vector x = V({uni(rng), uni(rng), std::cos(th), std::sin(th)});
    const Vector target = V({uni(rng), uni(rng), std::cos(th_t), std::sin(th_t)});
    const MpcSolution sol = MpcSolve(car, DubinsCost(10), 0.1, x, target);
    ASSERT_GE(sol.cost_history.size(), 1u);
    for (size_t i = 1; i < sol.cost_history.size(); ++i) {
      EXPECT_LE(sol.cost_history[i],
                sol.cost_history[i - 1] *
                    (1.0 + 1e-12) + 1e-12);
    }
    EXPECT_DOUBLE_EQ(sol.cost, sol.cost_history.back());
    // Returned states are the nonlinear rollout of the returned inputs.
    Vector s = x;
    for (size_t k = 0; k < sol.inputs.size(); ++k) {
      EXPECT_LE((sol.states[k] - s).cwiseAbs().maxCoeff(), 1e-12);
      s = car.StateTransition(s, sol.inputs[k], 0.1 * static_cast<double>(k));
    }
  }
}

TEST(RecedingHorizon, ScalarMatchesDenseQpFirstInput) {
  LtiSystem sys(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                Matrix::Zero(1, 1));
  const QuadraticCost cost = MakeConstantCost(Matrix::Identity(2, 2),
                                              Vector::Zero(2), 2);
  const Vector u0 = RecedingHorizonStep(sys, cost, 0.1, V({1.0}), V({0.0}));
  const std::vector<LinearizedSystem> steps(
      2, Affine(Matrix::Ones(1, 1), Matrix::Ones(1, 1), V({0.0})));
  const oracle::DenseQpSolution ref =
      oracle::DenseQp(steps, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)},
                      {Vector::Zero(2), Vector::Zero(2)}, Matrix::Identity(1, 1),
                      Vector::Zero(1), V({1.0}));
  EXPECT_NEAR(u0(0), ref.inputs[0](0), 1e-9);
  // Hand value: minimize over (u0, u1) with x1 = 1 + u0, x2 = x1 + u1.
  EXPECT_NEAR(u0(0), -0.6, 1e-9);
}

TEST(RecedingHorizon, DeadAheadDrivesStraight) {
  DubinsCar car;
  const Vector u = RecedingHorizonStep(car, DubinsCost(10), 0.1,
                                       V({0, 0, 1, 0}), V({0.5, 0, 1, 0}));
  EXPECT_LE(std::abs(u(1)), 1e-3);
  EXPECT_GT(u(0), 0.0);
}

TEST(RecedingHorizon, IsFirstMpcInput) {
  DubinsCar car;
  const Vector x = V({0.1, 0.2, 0.0, 1.0});
  const Vector target = V({1.0, 1.0, 1.0, 0.0});
  EXPECT_EQ(RecedingHorizonStep(car, DubinsCost(10), 0.1, x, target),
            MpcSolve(car, DubinsCost(10), 0.1, x, target).inputs.front());
}

}  // namespace
}  // namespace dubins_stack
