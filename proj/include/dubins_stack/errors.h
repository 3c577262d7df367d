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

#ifndef DUBINS_STACK_ERRORS_H_
#define DUBINS_STACK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dubins_stack {

// Caller broke a documented precondition (bad dimensions, bad parameters).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that arise from the numbers themselves.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function produced a non-finite value where a finite one was required.
class NumericalDomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A filter hit a singular / degenerate configuration (ill-conditioned
// innovation covariance, failed Cholesky, collapsed particle weights).
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Quadratic subproblem has no unique minimizer.
class SolvabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Riccati iterates blew up.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Throws ContractViolation when `actual != expected`.
void CheckDimension(const std::string& what, long expected, long actual);

}  // namespace dubins_stack

#endif  // DUBINS_STACK_ERRORS_H_
