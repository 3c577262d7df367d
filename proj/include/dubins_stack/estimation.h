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

// Bayesian filters over any System. All filters are stateless: the belief is
// passed in and a new one is returned. Every step is predict-then-update: the
// belief over x[k-1] is pushed through f with the input u[k-1] that was
// applied, then corrected with the observation y[k] of the new state.

#ifndef DUBINS_STACK_ESTIMATION_H_
#define DUBINS_STACK_ESTIMATION_H_

#include <cstdint>
#include <random>
#include <vector>

#include "dubins_stack/dynamics.h"

namespace dubins_stack {

struct GaussianBelief {
  Vector mean;
  Matrix covariance;
};

// Process (N x N) and observation (M x M) noise covariances.
struct NoiseCovariances {
  Matrix process;
  Matrix observation;
};

struct ParticleBelief {
  std::vector<Vector> particles;
  std::vector<double> weights;  // sum to one
};

// Seeded stream for the particle filter. Never shared implicitly.
using RandomStream = std::mt19937_64;

struct UkfParameters {
  double alpha = 1e-1;
  double beta = 2.0;
  double kappa = 0.0;
};

// Prediction halves of the Gaussian filters.
GaussianBelief EkfPredict(const System& system, const GaussianBelief& belief,
                          const Vector& u, const Matrix& process, double t);
GaussianBelief UkfPredict(const System& system, const GaussianBelief& belief,
                          const Vector& u, const Matrix& process, double t,
                          const UkfParameters& params = {});

// Extended Kalman filter step: predicts with f and its Jacobian A, updates
// with the observation Jacobian C evaluated at the predicted mean, and
// returns a symmetrized covariance (Joseph form). The posterior mean is
// projected with System::Normalize.
// Throws DegeneracyError when the innovation covariance has condition number
// above 1e12 (or is not positive definite).
GaussianBelief EkfStep(const System& system, const GaussianBelief& belief,
                       const Vector& y, const Vector& u,
                       const NoiseCovariances& noise, double t);

// Unscented Kalman filter step with scaled sigma points. Square roots are
// taken by Cholesky with diagonal jitter 1e-9, escalating by 10x up to 1e-3.
// Throws DegeneracyError if the factorization still fails, or on a singular
// innovation covariance.
GaussianBelief UkfStep(const System& system, const GaussianBelief& belief,
                       const Vector& y, const Vector& u,
                       const NoiseCovariances& noise, double t,
                       const UkfParameters& params = {});

// Bootstrap particle filter step: propagate through f plus Gaussian process
// noise, reweight by the Gaussian observation likelihood, and resample
// systematically when the effective sample size drops below K/2.
// Throws DegeneracyError when every particle's likelihood underflows.
ParticleBelief PfStep(const System& system, const ParticleBelief& belief,
                      const Vector& y, const Vector& u,
                      const NoiseCovariances& noise, double t,
                      RandomStream& rng);

// Draws `count` equally weighted particles from N(mean, covariance).
ParticleBelief SampleParticles(const GaussianBelief& belief, int count,
                               RandomStream& rng, const System* system = nullptr);

// Weighted particle mean.
Vector EstimateMean(const ParticleBelief& belief);
// Weighted particle mean projected with system.Normalize.
Vector EstimateMean(const System& system, const ParticleBelief& belief);

double EffectiveSampleSize(const std::vector<double>& weights);

// Systematic resampling: one uniform offset in [0, 1/K), then K evenly spaced
// pointers into the cumulative weights. Returns the selected indices.
std::vector<int> SystematicResample(const std::vector<double>& weights,
                                    RandomStream& rng);

// Symmetric square root factor L with L L^T = m for a PSD matrix; tolerates
// singular inputs (used for noise sampling).
Matrix PsdSquareRoot(const Matrix& m);

}  // namespace dubins_stack

#endif  // DUBINS_STACK_ESTIMATION_H_
