// Copyright 2026 The Dephasim Authors
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

#pragma once

#include <stdexcept>
#include <string>

#include "dephasim/model.hpp"

namespace dephasim {

// Full spectral decomposition H = V diag(lambda) V^T of one Hamiltonian.
// Built once and shared read-only; evolving a state is two real mat-vecs
// plus diagonal phases. When the coupling vanishes the eigenbasis is the
// site basis and the mat-vecs are skipped.
struct SpectralCache {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns; empty when `diagonal`
  bool diagonal = false;

  static SpectralCache build(const HamiltonianOperator& h);

  int size() const { return static_cast<int>(eigenvalues.size()); }

  // psi <- exp(-i H t) psi
  void evolve_in_place(Eigen::VectorXcd& psi, double duration) const;
};

enum class PropagatorBackend { spectral, krylov };

struct PropagatorSettings {
  PropagatorBackend backend = PropagatorBackend::spectral;
  double krylov_tolerance = 1e-10;  // relative error bound per call
  int krylov_max_dim = 64;
  // Sub-step halvings allowed before the call is declared non-convergent.
  int krylov_max_rejections = 64;
};

class KrylovConvergenceError : public std::runtime_error {
 public:
  KrylovConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), achieved_residual_(residual) {}

  double achieved_residual() const { return achieved_residual_; }

 private:
  double achieved_residual_;
};

// exp(-i H duration) |state>. The spectral backend diagonalises H on the
// spot; prefer the SpectralCache overload when the same H is reused.
PureState evolve_unitary(const HamiltonianOperator& h, const PureState& state,
                         double duration, const PropagatorSettings& settings = {});

PureState evolve_unitary(const SpectralCache& cache, const PureState& state,
                         double duration);

// Lanczos approximation of exp(-i H duration) |state> with adaptive
// sub-stepping; throws KrylovConvergenceError when the residual estimate
// cannot be pushed below tolerance within the configured budget.
PureState evolve_krylov(const HamiltonianOperator& h, const PureState& state,
                        double duration, const PropagatorSettings& settings = {});

// Diagonal phase kick psi_x <- exp(-i theta (x - origin)) psi_x. Populations
// are untouched; the relative phase between sites x and y changes by
// theta*(x-y) regardless of origin.
PureState apply_tilt_kick(const PureState& state, double kick_phase, int origin = 0);

}  // namespace dephasim
