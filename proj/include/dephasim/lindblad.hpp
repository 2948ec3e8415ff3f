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
#include <vector>

#include "dephasim/model.hpp"
#include "dephasim/propagator.hpp"

namespace dephasim {

struct DensityMatrix {
  Eigen::MatrixXcd entries;

  static DensityMatrix from_pure(const PureState& psi);

  int size() const { return static_cast<int>(entries.rows()); }
  Eigen::VectorXd populations() const { return entries.diagonal().real(); }
  double trace_deviation() const { return std::abs(entries.trace() - Complex(1.0, 0.0)); }
  double hermiticity_error() const;
  // Smallest eigenvalue; diagnostic only, O(L^3).
  double min_eigenvalue() const;
};

struct LindbladSettings {
  double base_step = 0.1;            // coarsest Strang step, in units of 1/tau
  double refinement_threshold = 1e-5;  // population infidelity between refinements
  int max_refinements = 8;
};

class StepRefinementError : public std::runtime_error {
 public:
  StepRefinementError(const std::string& what, double delta)
      : std::runtime_error(what), achieved_delta_(delta) {}

  double achieved_delta() const { return achieved_delta_; }

 private:
  double achieved_delta_;
};

// One second-order Strang step: half-step elementwise coherence decay
// rho_xy *= exp(-gamma (x-y)^2 step/2), full unitary conjugation by
// exp(-i H step), half-step decay again. Trace and Hermiticity are
// preserved up to roundoff. Convenience wrapper that diagonalises H on
// the spot; the trajectory driver below caches the decomposition.
DensityMatrix lindblad_step(const HamiltonianOperator& h, const DephasingSpec& spec,
                            const DensityMatrix& rho, double step);

struct LindbladTrajectory {
  std::vector<double> times;                   // the requested sample times
  std::vector<Eigen::VectorXd> populations;    // one entry per sample time
  std::vector<DensityMatrix> states;           // filled when keep_states
  DensityMatrix final_state;                   // state at total_time, always kept
  double step_used = 0.0;
  int refinements = 0;
};

// Integrates d(rho)/dt = -i[H,rho] + dissipator to total_time, sampling at the
// given (sorted) times. The Strang step is halved until the population
// infidelity between successive refinements drops below the threshold; the
// finest run is returned. Throws StepRefinementError when max_refinements
// halvings are not enough.
LindbladTrajectory evolve_lindblad(const HamiltonianOperator& h,
                                   const DephasingSpec& spec,
                                   const DensityMatrix& rho0, double total_time,
                                   const LindbladSettings& settings,
                                   const std::vector<double>& sample_times,
                                   bool keep_states = true);

// Exact solution of the tunnelling-free (coupling = 0) sub-model:
// rho_xy(t) = rho_xy(0) exp(-i (eps_x - eps_y) t) exp(-gamma (x-y)^2 t).
// Oracle for the full integrator.
DensityMatrix closed_form_dephasing(const DensityMatrix& rho0,
                                    const DephasingSpec& spec,
                                    const Eigen::VectorXd& epsilons, double t);

}  // namespace dephasim
