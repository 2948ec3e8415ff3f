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

#include "dephasim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dephasim/rng.hpp"

namespace dephasim {

LatticeSpec::LatticeSpec(int sites, double tau, double w)
    : num_sites(sites), tunnelling_rate(tau), disorder_amplitude(w) {
  if (sites < 2) throw std::invalid_argument("LatticeSpec: num_sites must be >= 2");
  if (!(tau > 0.0)) throw std::invalid_argument("LatticeSpec: tunnelling_rate must be > 0");
  if (!(w >= 0.0)) throw std::invalid_argument("LatticeSpec: disorder_amplitude must be >= 0");
}

DisorderRealization sample_disorder(const LatticeSpec& spec, std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  DisorderRealization out;
  out.seed = seed;
  out.epsilons.resize(spec.num_sites);
  for (int x = 0; x < spec.num_sites; ++x) {
    out.epsilons[x] = rng.uniform_symmetric(spec.disorder_amplitude);
  }
  return out;
}

HamiltonianOperator::HamiltonianOperator(Eigen::VectorXd diagonal, double coupling)
    : diagonal_(std::move(diagonal)), coupling_(coupling) {
  if (diagonal_.size() < 2) {
    throw std::invalid_argument("HamiltonianOperator: need at least 2 sites");
  }
  if (!std::isfinite(coupling_) || !diagonal_.allFinite()) {
    throw std::invalid_argument("HamiltonianOperator: non-finite entries");
  }
}

void HamiltonianOperator::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  const int n = size();
  y.resize(n);
  const double tau = coupling_;
  y[0] = diagonal_[0] * x[0] + tau * x[1];
  for (int i = 1; i + 1 < n; ++i) {
    y[i] = diagonal_[i] * x[i] + tau * (x[i - 1] + x[i + 1]);
  }
  y[n - 1] = diagonal_[n - 1] * x[n - 1] + tau * x[n - 2];
}

Eigen::VectorXd HamiltonianOperator::apply(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd y(n);
  const double tau = coupling_;
  y[0] = diagonal_[0] * x[0] + tau * x[1];
  for (int i = 1; i + 1 < n; ++i) {
    y[i] = diagonal_[i] * x[i] + tau * (x[i - 1] + x[i + 1]);
  }
  y[n - 1] = diagonal_[n - 1] * x[n - 1] + tau * x[n - 2];
  return y;
}

double HamiltonianOperator::norm_bound() const {
  return diagonal_.cwiseAbs().maxCoeff() + 2.0 * std::abs(coupling_);
}

Eigen::MatrixXd HamiltonianOperator::dense() const {
  const int n = size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.diagonal() = diagonal_;
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = coupling_;
    m(i + 1, i) = coupling_;
  }
  return m;
}

HamiltonianOperator build_hamiltonian(const LatticeSpec& spec,
                                      const DisorderRealization& disorder) {
  if (disorder.epsilons.size() != spec.num_sites) {
    throw std::invalid_argument(
        "build_hamiltonian: disorder has " + std::to_string(disorder.epsilons.size()) +
        " entries for " + std::to_string(spec.num_sites) + " sites");
  }
  return HamiltonianOperator(disorder.epsilons, spec.tunnelling_rate);
}

HamiltonianOperator build_tilted(const HamiltonianOperator& h, double alpha, int origin) {
  Eigen::VectorXd diag = h.diagonal();
  for (int x = 0; x < diag.size(); ++x) {
    diag[x] += alpha * (x - origin);
  }
  return HamiltonianOperator(std::move(diag), h.coupling());
}

DephasingSpec::DephasingSpec(double rate) : gamma(rate) {
  if (!(rate >= 0.0)) throw std::invalid_argument("DephasingSpec: gamma must be >= 0");
}

GroundStateResult ground_state(const HamiltonianOperator& h) {
  const int n = h.size();
  Eigen::VectorXd subdiag = Eigen::VectorXd::Constant(n - 1, h.coupling());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.diagonal(), subdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("ground_state: tridiagonal eigensolver failed");
  }

  GroundStateResult out;
  out.energy = solver.eigenvalues()[0];
  const double scale = std::max(h.norm_bound(), 1e-300);
  out.degenerate = (n > 1) && (solver.eigenvalues()[1] - solver.eigenvalues()[0] < 1e-12 * scale);

  Eigen::VectorXd vec = solver.eigenvectors().col(0);
  int peak = 0;
  vec.cwiseAbs().maxCoeff(&peak);
  if (vec[peak] < 0.0) vec = -vec;
  vec.normalize();

  out.state.amplitudes = vec.cast<Complex>();
  return out;
}

}  // namespace dephasim
