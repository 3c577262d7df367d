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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dubins_stack/errors.h"

namespace dubins_stack {
namespace {

constexpr double kMaxInnovationCondition = 1e12;
constexpr double kInitialJitter = 1e-9;
constexpr double kMaxJitter = 1e-3;

void CheckGaussian(const System& system, const GaussianBelief& belief,
                   const Vector& y, const Vector& u,
                   const NoiseCovariances& noise) {
  const long n = system.state_dim();
  const long m = system.observation_dim();
  CheckDimension("belief mean", n, belief.mean.size());
  CheckDimension("belief covariance rows", n, belief.covariance.rows());
  CheckDimension("belief covariance columns", n, belief.covariance.cols());
  CheckDimension("observation", m, y.size());
  CheckDimension("input", system.input_dim(), u.size());
  CheckDimension("process covariance rows", n, noise.process.rows());
  CheckDimension("process covariance columns", n, noise.process.cols());
  CheckDimension("observation covariance rows", m, noise.observation.rows());
  CheckDimension("observation covariance columns", m,
                 noise.observation.cols());
}

Matrix Symmetrized(const Matrix& p) { return 0.5 * (p + p.transpose()); }

// Rejects innovation covariances that cannot be inverted reliably.
void CheckInnovation(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Symmetrized(s),
                                            Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxInnovationCondition) {
    std::ostringstream msg;
    msg << "innovation covariance is singular (eigenvalues in [" << lo << ", "
        << hi << "])";
    throw DegeneracyError(msg.str());
  }
}

// Lower Cholesky factor of `m`, adding diagonal jitter if needed.
Matrix CholeskyWithJitter(const Matrix& m) {
  const Matrix sym = Symmetrized(m);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Matrix identity = Matrix::Identity(m.rows(), m.cols());
  for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.000001;
       jitter *= 10.0) {
    llt.compute(sym + jitter * identity);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw DegeneracyError(
      "Cholesky factorization failed after diagonal jitter up to 1e-3");
}

struct SigmaWeights {
  double scale;  // n + lambda
  Vector mean;
  Vector cov;
};

SigmaWeights MakeSigmaWeights(int n, const UkfParameters& params) {
  const double lambda =
      params.alpha * params.alpha * (n + params.kappa) - n;
  SigmaWeights w;
  w.scale = n + lambda;
  if (!(w.scale > 0.0)) {
    throw ContractViolation("UKF parameters give a non-positive sigma spread");
  }
  w.mean = Vector::Constant(2 * n + 1, 0.5 / w.scale);
  w.cov = w.mean;
  w.mean[0] = lambda / w.scale;
  w.cov[0] = w.mean[0] + (1.0 - params.alpha * params.alpha + params.beta);
  return w;
}

// Columns are the 2n+1 sigma points of N(mean, cov).
Matrix SigmaPoints(const Vector& mean, const Matrix& cov, double scale) {
  const long n = mean.size();
  const Matrix root = CholeskyWithJitter(scale * cov);
  Matrix points(n, 2 * n + 1);
  points.col(0) = mean;
  for (long i = 0; i < n; ++i) {
    points.col(1 + i) = mean + root.col(i);
    points.col(1 + n + i) = mean - root.col(i);
  }
  return points;
}

std::vector<Vector> SampleNoise(const Matrix& root, int count,
                                RandomStream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector z(root.cols());
    for (long i = 0; i < z.size(); ++i) z[i] = normal(rng);
    out.push_back(root * z);
  }
  return out;
}

}  // namespace

Matrix PsdSquareRoot(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Symmetrized(m));
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() *
         eig.eigenvectors().transpose();
}

GaussianBelief EkfPredict(const System& system, const GaussianBelief& belief,
                          const Vector& u, const Matrix& process, double t) {
  const LinearizedSystem lin = system.Linearize(belief.mean, u, t);
  GaussianBelief predicted;
  predicted.mean = system.StateTransition(belief.mean, u, t);
  predicted.covariance = Symmetrized(
      lin.A * belief.covariance * lin.A.transpose() + process);
  return predicted;
}

GaussianBelief EkfStep(const System& system, const GaussianBelief& belief,
                       const Vector& y, const Vector& u,
                       const NoiseCovariances& noise, double t) {
  CheckGaussian(system, belief, y, u, noise);
  const GaussianBelief predicted =
      EkfPredict(system, belief, u, noise.process, t);

  const LinearizedSystem obs = system.Linearize(predicted.mean, u, t);
  const Vector innovation = y - system.Observation(predicted.mean, u, t);
  const Matrix& C = obs.C;
  const Matrix s =
      Symmetrized(C * predicted.covariance * C.transpose() + noise.observation);
  CheckInnovation(s);

  // K = P C^T S^-1, computed as (S^-1 C P)^T since S and P are symmetric.
  const Matrix gain =
      s.ldlt().solve(C * predicted.covariance).transpose();
  const long n = belief.mean.size();
  const Matrix i_kc = Matrix::Identity(n, n) - gain * C;

  GaussianBelief posterior;
  posterior.mean = predicted.mean + gain * innovation;
  posterior.covariance =
      Symmetrized(i_kc * predicted.covariance * i_kc.transpose() +
                  gain * noise.observation * gain.transpose());
  system.Normalize(posterior.mean);
  return posterior;
}

GaussianBelief UkfPredict(const System& system, const GaussianBelief& belief,
                          const Vector& u, const Matrix& process, double t,
                          const UkfParameters& params) {
  const int n = static_cast<int>(belief.mean.size());
  const SigmaWeights w = MakeSigmaWeights(n, params);
  const Matrix sigma = SigmaPoints(belief.mean, belief.covariance, w.scale);

  Matrix propagated(n, sigma.cols());
  for (long i = 0; i < sigma.cols(); ++i) {
    propagated.col(i) = system.StateTransition(sigma.col(i), u, t);
  }
  GaussianBelief predicted;
  predicted.mean = propagated * w.mean;
  const Matrix dev = propagated.colwise() - predicted.mean;
  predicted.covariance =
      Symmetrized(dev * w.cov.asDiagonal() * dev.transpose() + process);
  return predicted;
}

GaussianBelief UkfStep(const System& system, const GaussianBelief& belief,
                       const Vector& y, const Vector& u,
                       const NoiseCovariances& noise, double t,
                       const UkfParameters& params) {
  CheckGaussian(system, belief, y, u, noise);
  const int n = static_cast<int>(belief.mean.size());
  const int m = system.observation_dim();
  const SigmaWeights w = MakeSigmaWeights(n, params);
  const GaussianBelief predicted =
      UkfPredict(system, belief, u, noise.process, t, params);

  const Matrix sigma =
      SigmaPoints(predicted.mean, predicted.covariance, w.scale);
  Matrix observed(m, sigma.cols());
  for (long i = 0; i < sigma.cols(); ++i) {
    observed.col(i) = system.Observation(sigma.col(i), u, t);
  }
  const Vector y_mean = observed * w.mean;
  const Matrix dy = observed.colwise() - y_mean;
  const Matrix dx = sigma.colwise() - predicted.mean;
  const Matrix s =
      Symmetrized(dy * w.cov.asDiagonal() * dy.transpose() + noise.observation);
  const Matrix cross = dx * w.cov.asDiagonal() * dy.transpose();
  CheckInnovation(s);

  const Matrix gain = s.ldlt().solve(cross.transpose()).transpose();
  GaussianBelief posterior;
  posterior.mean = predicted.mean + gain * (y - y_mean);
  posterior.covariance =
      Symmetrized(predicted.covariance - gain * s * gain.transpose());
  system.Normalize(posterior.mean);
  return posterior;
}

double EffectiveSampleSize(const std::vector<double>& weights) {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

std::vector<int> SystematicResample(const std::vector<double>& weights,
                                    RandomStream& rng) {
  const int count = static_cast<int>(weights.size());
  std::vector<int> picks(static_cast<size_t>(count));
  if (count == 0) return picks;
  const double spacing = 1.0 / count;
  std::uniform_real_distribution<double> offset(0.0, spacing);
  const double start = offset(rng);
  double cumulative = weights[0];
  int i = 0;
  for (int m = 0; m < count; ++m) {
    const double pointer = start + m * spacing;
    while (pointer > cumulative && i < count - 1) {
      ++i;
      cumulative += weights[static_cast<size_t>(i)];
    }
    picks[static_cast<size_t>(m)] = i;
  }
  return picks;
}

ParticleBelief SampleParticles(const GaussianBelief& belief, int count,
                               RandomStream& rng, const System* system) {
  if (count < 1) throw ContractViolation("particle count must be >= 1");
  const Matrix root = PsdSquareRoot(belief.covariance);
  ParticleBelief out;
  out.particles = SampleNoise(root, count, rng);
  for (auto& p : out.particles) {
    p += belief.mean;
    if (system != nullptr) system->Normalize(p);
  }
  out.weights.assign(static_cast<size_t>(count), 1.0 / count);
  return out;
}

ParticleBelief PfStep(const System& system, const ParticleBelief& belief,
                      const Vector& y, const Vector& u,
                      const NoiseCovariances& noise, double t,
                      RandomStream& rng) {
  const size_t count = belief.particles.size();
  if (count == 0) throw ContractViolation("particle belief is empty");
  CheckDimension("particle weights", static_cast<long>(count),
                 static_cast<long>(belief.weights.size()));
  CheckDimension("observation", system.observation_dim(), y.size());
  CheckDimension("input", system.input_dim(), u.size());
  CheckDimension("process covariance rows", system.state_dim(),
                 noise.process.rows());
  CheckDimension("observation covariance rows", system.observation_dim(),
                 noise.observation.rows());

  const Eigen::LDLT<Matrix> r_inv(noise.observation);
  if (r_inv.info() != Eigen::Success || !r_inv.isPositive() ||
      (r_inv.vectorD().array() <= 0.0).any()) {
    throw ContractViolation("observation covariance must be invertible");
  }

  const std::vector<Vector> process_noise =
      SampleNoise(PsdSquareRoot(noise.process), static_cast<int>(count), rng);

  ParticleBelief next;
  next.particles.reserve(count);
  std::vector<double> log_weights(count);
  double best_likelihood = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < count; ++i) {
    CheckDimension("particle", system.state_dim(), belief.particles[i].size());
    Vector x = system.StateTransition(belief.particles[i], u, t) +
               process_noise[i];
    system.Normalize(x);
    const Vector e = y - system.Observation(x, u, t);
    const double log_likelihood = -0.5 * e.dot(r_inv.solve(e));
    best_likelihood = std::max(best_likelihood, log_likelihood);
    log_weights[i] = std::log(belief.weights[i]) + log_likelihood;
    next.particles.push_back(std::move(x));
  }
  if (!(best_likelihood >= std::log(std::numeric_limits<double>::min()))) {
    throw DegeneracyError(
        "all particle likelihoods underflowed; increase the observation "
        "covariance or the number of particles");
  }

  const double shift = *std::max_element(log_weights.begin(), log_weights.end());
  next.weights.resize(count);
  double total = 0.0;
  for (size_t i = 0; i < count; ++i) {
    next.weights[i] = std::exp(log_weights[i] - shift);
    total += next.weights[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegeneracyError(
        "particle weights collapsed; increase the observation covariance or "
        "the number of particles");
  }
  for (double& w : next.weights) w /= total;

  if (EffectiveSampleSize(next.weights) < 0.5 * static_cast<double>(count)) {
    const std::vector<int> picks = SystematicResample(next.weights, rng);
    ParticleBelief resampled;
    resampled.particles.reserve(count);
    for (int i : picks) {
      resampled.particles.push_back(next.particles[static_cast<size_t>(i)]);
    }
    resampled.weights.assign(count, 1.0 / static_cast<double>(count));
    return resampled;
  }
  return next;
}

Vector EstimateMean(const ParticleBelief& belief) {
  if (belief.particles.empty()) {
    throw ContractViolation("particle belief is empty");
  }
  Vector mean = Vector::Zero(belief.particles.front().size());
  for (size_t i = 0; i < belief.particles.size(); ++i) {
    mean += belief.weights[i] * belief.particles[i];
  }
  return mean;
}

Vector EstimateMean(const System& system, const ParticleBelief& belief) {
  Vector mean = EstimateMean(belief);
  system.Normalize(mean);
  return mean;
}

}  // namespace dubins_stack
