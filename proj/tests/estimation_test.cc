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

#include "dubins_stack/estimation.h"

#include <cmath>
#include <numbers>
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

Matrix S(double value) { return Matrix::Constant(1, 1, value); }

LtiSystem ScalarIdentity() {
  return LtiSystem(S(1.0), S(0.0), S(1.0), S(0.0));
}

double MinEigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff();
}

TEST(Ekf, ScalarKalmanUpdate) {
  const LtiSystem sys = ScalarIdentity();
  const GaussianBelief post =
      EkfStep(sys, {V({0.0}), S(1.0)}, V({1.0}), V({0.0}), {S(0.0), S(1.0)}, 0);
  EXPECT_NEAR(post.mean(0), 0.5, 1e-15);
  EXPECT_NEAR(post.covariance(0, 0), 0.5, 1e-15);
}

TEST(Ekf, UninformativeObservationKeepsPrediction) {
  DubinsCar car;
  const GaussianBelief prior{V({0.2, -0.1, 0.6, 0.8}), 0.01 * Matrix::Identity(4, 4)};
  const Vector u = V({1.0, 0.3});
  const NoiseCovariances noise{Matrix::Zero(4, 4), 1e9 * Matrix::Identity(4, 4)};
  const GaussianBelief pred = EkfPredict(car, prior, u, noise.process, 0.0);
  const GaussianBelief post =
      EkfStep(car, prior, V({5.0, 5.0, 0.0, 1.0}), u, noise, 0.0);
  EXPECT_LE((post.mean - pred.mean).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ekf, MatchesTextbookKalmanOnLinearSystem) {
  std::mt19937_64 rng(101);
  const Matrix a = oracle::RandomStable(3, 0.95, rng);
  const Matrix b = oracle::RandomMatrix(3, 2, rng);
  const Matrix c = oracle::RandomMatrix(2, 3, rng);
  const Matrix d = oracle::RandomMatrix(2, 2, rng);
  const Vector c1 = oracle::RandomMatrix(3, 1, rng);
  const Vector c2 = oracle::RandomMatrix(2, 1, rng);
  LtiSystem sys(a, b, c, d, 0.1, c1, c2);
  const NoiseCovariances noise{oracle::RandomSpd(3, 0.01, 0.1, rng),
                               oracle::RandomSpd(2, 0.05, 0.2, rng)};

  GaussianBelief belief{Vector::Zero(3), Matrix::Identity(3, 3)};
  oracle::KalmanState ref{belief.mean, belief.covariance};
  std::normal_distribution<double> normal;
  for (int k = 0; k < 50; ++k) {
    const Vector u = oracle::RandomMatrix(2, 1, rng);
    const Vector y = oracle::RandomMatrix(2, 1, rng);
    belief = EkfStep(sys, belief, y, u, noise, 0.1 * k);
    ref = oracle::KalmanStep(sys.matrices(), noise.process, noise.observation,
                             ref, u, y);
    ASSERT_LE((belief.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-9) << k;
    ASSERT_LE((belief.covariance - ref.cov).cwiseAbs().maxCoeff(), 1e-9) << k;
  }
}

TEST(Ekf, SingularInnovationIsDegenerate) {
  LtiSystem sys(S(1.0), S(0.0), S(0.0), S(0.0));
  EXPECT_THROW(EkfStep(sys, {V({0.0}), S(1.0)}, V({1.0}), V({0.0}),
                       {S(0.0), S(0.0)}, 0),
               DegeneracyError);
}

TEST(Ekf, DubinsPosteriorHeadingIsUnit) {
  DubinsCar car;
  const GaussianBelief post =
      EkfStep(car, {V({0, 0, 1, 0}), 0.01 * Matrix::Identity(4, 4)},
              V({0.1, 0.05, 0.9, 0.3}), V({1.0, 0.5}),
              {1e-4 * Matrix::Identity(4, 4), 4e-4 * Matrix::Identity(4, 4)}, 0);
  EXPECT_NEAR(post.mean.tail<2>().norm(), 1.0, 1e-12);
}

TEST(Ukf, ScalarKalmanUpdate) {
  const LtiSystem sys = ScalarIdentity();
  const GaussianBelief post =
      UkfStep(sys, {V({0.0}), S(1.0)}, V({1.0}), V({0.0}), {S(0.0), S(1.0)}, 0);
  EXPECT_NEAR(post.mean(0), 0.5, 1e-9);
  EXPECT_NEAR(post.covariance(0, 0), 0.5, 1e-9);
}

TEST(Ukf, MatchesTextbookKalmanOnLinearSystem) {
  std::mt19937_64 rng(202);
  const Matrix a = oracle::RandomStable(4, 0.9, rng);
  const Matrix b = oracle::RandomMatrix(4, 2, rng);
  const Matrix c = oracle::RandomMatrix(3, 4, rng);
  LtiSystem sys(a, b, c, Matrix::Zero(3, 2));
  const NoiseCovariances noise{oracle::RandomSpd(4, 0.01, 0.1, rng),
                               oracle::RandomSpd(3, 0.05, 0.2, rng)};
  GaussianBelief belief{Vector::Ones(4), 0.5 * Matrix::Identity(4, 4)};
  oracle::KalmanState ref{belief.mean, belief.covariance};
  for (int k = 0; k < 50; ++k) {
    const Vector u = oracle::RandomMatrix(2, 1, rng);
    const Vector y = oracle::RandomMatrix(3, 1, rng);
    belief = UkfStep(sys, belief, y, u, noise, 0.1 * k);
    ref = oracle::KalmanStep(sys.matrices(), noise.process, noise.observation,
                             ref, u, y);
    ASSERT_LE((belief.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-6) << k;
    ASSERT_LE((belief.covariance - ref.cov).cwiseAbs().maxCoeff(), 1e-6) << k;
  }
}

TEST(Ukf, ZeroInnovationKeepsPredictedMean) {
  DubinsCar car;
  const GaussianBelief prior{V({0.3, 0.1, 0.8, 0.6}), 0.02 * Matrix::Identity(4, 4)};
  const Vector u = V({0.7, -0.4});
  const NoiseCovariances noise{1e-4 * Matrix::Identity(4, 4),
                               1e-3 * Matrix::Identity(4, 4)};
  const GaussianBelief pred = UkfPredict(car, prior, u, noise.process, 0.0);
  const Vector y = car.Observation(pred.mean, u, 0.0);
  const GaussianBelief post = UkfStep(car, prior, y, u, noise, 0.0);
  // The heading pair is renormalized after the update, so compare the
  // normalized prediction.
  Vector expected = pred.mean;
  car.Normalize(expected);
  EXPECT_LE((post.mean - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ukf, NonPositiveCovarianceIsDegenerate) {
  const LtiSystem sys = ScalarIdentity();
  EXPECT_THROW(UkfStep(sys, {V({0.0}), S(-1.0)}, V({1.0}), V({0.0}),
                       {S(0.0), S(1.0)}, 0),
               DegeneracyError);
}

TEST(GaussianFilters, PosteriorCovarianceStaysPsd) {
  std::mt19937_64 rng(303);
  DubinsCar car;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double th = 3.0 * uni(rng);
    const GaussianBelief prior{
        V({uni(rng), uni(rng), std::cos(th), std::sin(th)}),
        oracle::RandomSpd(4, 1e-6, 0.5, rng)};
    const Vector u = V({2.0 * uni(rng), 3.0 * uni(rng)});
    const Vector y = prior.mean + 0.1 * oracle::RandomMatrix(4, 1, rng);
    const NoiseCovariances noise{oracle::RandomSpd(4, 1e-8, 1e-2, rng),
                                 oracle::RandomSpd(4, 1e-6, 1e-2, rng)};
    for (const GaussianBelief& post :
         {EkfStep(car, prior, y, u, noise, 0.0),
          UkfStep(car, prior, y, u, noise, 0.0)}) {
      EXPECT_LE((post.covariance - post.covariance.transpose())
                    .cwiseAbs()
                    .maxCoeff(),
                1e-9);
      EXPECT_GE(MinEigenvalue(post.covariance), -1e-9);
    }
  }
}

TEST(Pf, SingleParticleKeepsUnitWeight) {
  const LtiSystem sys(S(2.0), S(1.0), S(1.0), S(0.0));
  RandomStream rng(1);
  const ParticleBelief post =
      PfStep(sys, {{V({1.0})}, {1.0}}, V({3.0}), V({0.5}), {S(0.0), S(1.0)}, 0,
             rng);
  ASSERT_EQ(post.particles.size(), 1u);
  EXPECT_DOUBLE_EQ(post.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(post.particles[0](0), 2.5);  // no process noise
}

TEST(Pf, FixedSeedIsBitIdentical) {
  DubinsCar car;
  RandomStream seed_rng(9);
  const ParticleBelief prior = SampleParticles(
      {V({0, 0, 1, 0}), 0.01 * Matrix::Identity(4, 4)}, 500, seed_rng, &car);
  const NoiseCovariances noise{1e-4 * Matrix::Identity(4, 4),
                               4e-4 * Matrix::Identity(4, 4)};
  RandomStream a(42), b(42);
  ParticleBelief pa = prior, pb = prior;
  for (int k = 0; k < 5; ++k) {
    const Vector y = V({0.1 * k, 0.0, 1.0, 0.0});
    pa = PfStep(car, pa, y, V({1.0, 0.0}), noise, 0.1 * k, a);
    pb = PfStep(car, pb, y, V({1.0, 0.0}), noise, 0.1 * k, b);
  }
  ASSERT_EQ(pa.particles.size(), pb.particles.size());
  for (size_t i = 0; i < pa.particles.size(); ++i) {
    EXPECT_EQ(pa.particles[i], pb.particles[i]);
    EXPECT_EQ(pa.weights[i], pb.weights[i]);
  }
}

TEST(Pf, TracksScalarKalmanMeanWithinMonteCarloBand) {
  const LtiSystem sys(S(0.9), S(1.0), S(1.0), S(0.0));
  const NoiseCovariances noise{S(0.1), S(0.2)};
  constexpr int kParticles = 10000;
  RandomStream rng(77);
  std::mt19937_64 data_rng(78);
  std::normal_distribution<double> normal;

  oracle::KalmanState ref{V({0.0}), S(1.0)};
  ParticleBelief belief = SampleParticles({ref.mean, ref.cov}, kParticles, rng);
  double x_true = 0.5;
  for (int k = 0; k < 20; ++k) {
    const Vector u = V({0.1 * std::sin(0.3 * k)});
    x_true = 0.9 * x_true + u(0) + std::sqrt(0.1) * normal(data_rng);
    const Vector y = V({x_true + std::sqrt(0.2) * normal(data_rng)});
    belief = PfStep(sys, belief, y, u, noise, 0.1 * k, rng);
    ref = oracle::KalmanStep(sys.matrices(), noise.process, noise.observation,
                             ref, u, y);
    const double band = 4.0 * std::sqrt(ref.cov(0, 0) / kParticles);
    EXPECT_LE(std::abs(EstimateMean(belief)(0) - ref.mean(0)), band) << k;
  }
}

// Root-mean-square distance between the PF and KF means over a fixed data
// record on a 2-state, 1-output system.
double PfErrorAgainstKalman(int particles, std::uint64_t seed) {
  Matrix a(2, 2);
  a << 0.9, 0.2, -0.1, 0.8;
  const LtiSystem sys(a, Matrix::Identity(2, 1), (Matrix(1, 2) << 1.0, 0.5).finished(),
                      S(0.0));
  const NoiseCovariances noise{0.05 * Matrix::Identity(2, 2), S(0.2)};
  std::mt19937_64 data_rng(3);
  std::normal_distribution<double> normal;
  oracle::KalmanState ref{Vector::Zero(2), Matrix::Identity(2, 2)};
  RandomStream rng(seed);
  ParticleBelief belief = SampleParticles({ref.mean, ref.cov}, particles, rng);
  Vector x = V({1.0, -1.0});
  double sq = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vector u = V({0.2 * std::cos(0.4 * k)});
    x = a * x + u + std::sqrt(0.05) * V({normal(data_rng), normal(data_rng)});
    const Vector y = V({x(0) + 0.5 * x(1) + std::sqrt(0.2) * normal(data_rng)});
    belief = PfStep(sys, belief, y, u, noise, 0.1 * k, rng);
    ref = oracle::KalmanStep(sys.matrices(), noise.process, noise.observation,
                             ref, u, y);
    sq += (EstimateMean(belief) - ref.mean).squaredNorm();
  }
  return std::sqrt(sq / 20.0);
}

TEST(Pf, ConvergesToKalmanMeanAsParticlesGrow) {
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    small += PfErrorAgainstKalman(500, seed);
    large += PfErrorAgainstKalman(50000, seed);
  }
  // Monte-Carlo error shrinks like 1/sqrt(K): a 100x larger cloud should be
  // roughly 10x closer.
  EXPECT_LT(large, small / 4.0) << "K=500 " << small / 4 << ", K=50000 " << large / 4;
}

TEST(Pf, WeightsAreUniformAfterResampling) {
  const LtiSystem sys = ScalarIdentity();
  RandomStream rng(5);
  ParticleBelief prior = SampleParticles({V({0.0}), S(1.0)}, 200, rng);
  // A sharp likelihood far in the tail collapses the ESS below K/2.
  const ParticleBelief post =
      PfStep(sys, prior, V({1.5}), V({0.0}), {S(0.0), S(0.01)}, 0, rng);
  for (double w : post.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 200.0);
}

TEST(Pf, UnderflowingLikelihoodIsDegenerate) {
  const LtiSystem sys = ScalarIdentity();
  RandomStream rng(5);
  const ParticleBelief prior{{V({0.0}), V({0.1})}, {0.5, 0.5}};
  try {
    PfStep(sys, prior, V({1e3}), V({0.0}), {S(0.0), S(1e-6)}, 0, rng);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_NE(std::string(e.what()).find("particles"), std::string::npos)
        << e.what();
  }
}

TEST(EstimateMeanTest, WeightedAverage) {
  EXPECT_DOUBLE_EQ(EstimateMean({{V({0.0}), V({2.0})}, {0.5, 0.5}})(0), 1.0);
  EXPECT_EQ(EstimateMean({{V({3.0, -1.0})}, {1.0}}), V({3.0, -1.0}));
}

TEST(EstimateMeanTest, DubinsHeadingIsRenormalized) {
  DubinsCar car;
  const double th = 0.7;
  const ParticleBelief belief{
      {V({1, 2, std::cos(th), std::sin(th)}), V({1, 2, std::cos(th), -std::sin(th)})},
      {0.5, 0.5}};
  const Vector mean = EstimateMean(car, belief);
  EXPECT_NEAR(mean(0), 1.0, 1e-15);
  EXPECT_NEAR(mean(1), 2.0, 1e-15);
  EXPECT_NEAR(mean(2), 1.0, 1e-15);
  EXPECT_NEAR(mean(3), 0.0, 1e-15);
}

TEST(Resampling, EffectiveSampleSize) {
  EXPECT_DOUBLE_EQ(EffectiveSampleSize({0.25, 0.25, 0.25, 0.25}), 4.0);
  EXPECT_DOUBLE_EQ(EffectiveSampleSize({1.0, 0.0, 0.0}), 1.0);
}

TEST(Resampling, SystematicCountsFollowWeights) {
  RandomStream rng(8);
  const std::vector<double> w = {0.5, 0.25, 0.125, 0.125};
  const std::vector<int> idx = SystematicResample(w, rng);
  ASSERT_EQ(idx.size(), 4u);
  // Systematic resampling gives each index floor(K w) or ceil(K w) copies.
  std::vector<int> counts(4, 0);
  for (int i : idx) ++counts[static_cast<size_t>(i)];
  EXPECT_EQ(counts[0], 2);
  EXPECT_EQ(counts[1], 1);
  EXPECT_LE(counts[2], 1);
  EXPECT_LE(counts[3], 1);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
}

TEST(PsdSquareRootTest, SquaresBack) {
  std::mt19937_64 rng(4);
  const Matrix p = oracle::RandomSpd(4, 0.0, 2.0, rng);
  const Matrix r = PsdSquareRoot(p);
  EXPECT_LE((r * r.transpose() - p).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace dubins_stack
