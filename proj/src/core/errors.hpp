// Copyright 2026 The Configlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFIGLAB_CORE_ERRORS_HPP_
#define CONFIGLAB_CORE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace configlab {

// Base class for every error thrown by the library.  The C API translates
// these into error codes; the CLI maps them onto exit code 1 (operational
// failure) as opposed to exit code 2 (a checked property was violated).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller passed structurally invalid data (bad dimensions, empty windows,
// non-finite numbers, malformed JSON, ...).
struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

// Transport between configurations of unequal total mass was requested from
// an operation that must return a matching rather than a distance.
struct SectorMismatch : Error {
  using Error::Error;
};

// The brute-force oracle refuses inputs beyond its enumeration cap.
struct OracleTooLarge : Error {
  using Error::Error;
};

// Extension sample data violates the declared Lipschitz bound.
struct NotLipschitzOnA : Error {
  using Error::Error;
};

// A declared gradient disagrees with finite differences at validation time.
struct GradientMismatch : Error {
  using Error::Error;
};

// A Metropolis chain stopped accepting proposals during burn-in.
struct ChainStuck : Error {
  using Error::Error;
};

// An otherwise well-posed numerical routine failed to converge.
struct NumericalFailure : Error {
  using Error::Error;
};

// The Euler-Maruyama drift increment exceeded the sanity threshold.
struct StepTooLarge : Error {
  using Error::Error;
};

// No certified lower bound on the distance between two event sets is
// available for the requested pair of event kinds.
struct NoDistanceCertificate : Error {
  using Error::Error;
};

// A Monte Carlo hitting estimate is statistically useless (too few hits).
struct InsufficientPaths : Error {
  using Error::Error;
};

// A short-time estimate would be polluted by boundary reflections.
struct BoundaryContamination : Error {
  using Error::Error;
};

// Problems with a run configuration (unknown keys, missing fields, ...).
struct ConfigError : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

}  // namespace configlab

#endif  // CONFIGLAB_CORE_ERRORS_HPP_
