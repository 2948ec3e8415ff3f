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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace dephasim {

using Complex = std::complex<double>;

// Geometry and disorder strength of a 1D tight-binding chain with open
// boundaries. The tunnelling rate tau is the unit of energy throughout;
// all times are expressed in units of 1/tau.
struct LatticeSpec {
  int num_sites;             // L >= 2
  double tunnelling_rate;    // tau > 0
  double disorder_amplitude; // W >= 0, onsite energies drawn from [-W, W]

  LatticeSpec(int sites, double tau, double w);
};

// One draw of the random onsite energies, together with the seed that
// produced it.
struct DisorderRealization {
  Eigen::VectorXd epsilons;
  std::uint64_t seed = 0;
};

// L onsite energies i.i.d. uniform on [-W, W]. Identical (spec, seed) input
// always yields the identical vector.
DisorderRealization sample_disorder(const LatticeSpec& spec, std::uint64_t seed);

// Real symmetric tridiagonal operator: onsite energies on the diagonal plus
// a uniform nearest-neighbour coupling on an open chain. A zero coupling is
// allowed; it describes the tunnelling-free sub-model used by the analytic
// dephasing solution.
class HamiltonianOperator {
 public:
  HamiltonianOperator(Eigen::VectorXd diagonal, double coupling);

  int size() const { return static_cast<int>(diagonal_.size()); }
  double coupling() const { return coupling_; }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }

  // y = H x
  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  // Gershgorin bound on the spectral radius.
  double norm_bound() const;

  Eigen::MatrixXd dense() const;

 private:
  Eigen::VectorXd diagonal_;
  double coupling_;
};

HamiltonianOperator build_hamiltonian(const LatticeSpec& spec,
                                      const DisorderRealization& disorder);

// Adds a linear tilt alpha*(x - origin) to the diagonal. The origin only
// shifts every eigenvalue by a constant, i.e. a global phase of the
// propagator, so observables cannot depend on it.
HamiltonianOperator build_tilted(const HamiltonianOperator& h, double alpha,
                                 int origin = 0);

// Diagonal tilt operator with entries alpha*(x - origin).
struct TiltOperator {
  double alpha = 0.0;
  int origin = 0;

  double entry(int x) const { return alpha * (x - origin); }
};

// Pure dephasing at rate gamma, weighted by the squared site separation:
// the coherence between sites x and y decays at rate gamma*(x-y)^2.
struct DephasingSpec {
  double gamma;

  explicit DephasingSpec(double rate);
};

inline double dephasing_weight(int x, int y) {
  const double d = static_cast<double>(x - y);
  return d * d;
}

struct PureState {
  Eigen::VectorXcd amplitudes;

  int size() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
  Eigen::VectorXd populations() const { return amplitudes.cwiseAbs2(); }
};

struct GroundStateResult {
  PureState state;
  double energy = 0.0;
  // Set when the gap to the next level is below resolution; the eigenvector
  // reported is then the solver's lowest-index one.
  bool degenerate = false;
};

// Normalised eigenvector of the minimum eigenvalue. Global phase fixed by
// making the largest-magnitude amplitude real positive.
GroundStateResult ground_state(const HamiltonianOperator& h);

}  // namespace dephasim
