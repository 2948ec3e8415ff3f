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

#include "dephasim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dephasim {

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  DensityMatrix rho;
  rho.entries = psi.amplitudes * psi.amplitudes.adjoint();
  return rho;
}

double DensityMatrix::hermiticity_error() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries,
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

// Strang-splitting stepper on a density matrix held as split real/imaginary
// parts. The unitary sub-flow is a congruence with the cached eigenbasis (8
// real GEMMs per step); the dephasing sub-flow is elementwise with a
// separation-indexed decay table. For a diagonal H everything collapses to a
// single elementwise pass and the splitting is exact.
class StrangEvolver {
 public:
  StrangEvolver(const HamiltonianOperator& h, double gamma)
      : n_(h.size()), gamma_(gamma), cache_(SpectralCache::build(h)) {
    if (!cache_.diagonal) {
      ar_.resize(n_, n_);
      ai_.resize(n_, n_);
      br_.resize(n_, n_);
      bi_.resize(n_, n_);
    }
  }

  void load(const DensityMatrix& rho) {
    rho_r_ = rho.entries.real();
    rho_i_ = rho.entries.imag();
  }

  DensityMatrix store() const {
    DensityMatrix out;
    out.entries.resize(n_, n_);
    out.entries.real() = rho_r_;
    out.entries.imag() = rho_i_;
    return out;
  }

  Eigen::VectorXd populations() const { return rho_r_.diagonal(); }

  // Advances by count steps of size step.
  void run(double step, long count) {
    if (count <= 0 || step == 0.0) return;
    if (cache_.diagonal) {
      // decay and phases commute with a diagonal H, so the whole segment is
      // one exact elementwise pass
      prepare(step * static_cast<double>(count));
      step_diagonal();
    } else {
      prepare(step);
      for (long k = 0; k < count; ++k) step_general();
    }
    hermitize();
  }

 private:
  void prepare(double step) {
    half_decay_.resize(n_);
    for (int d = 0; d < n_; ++d) {
      half_decay_[d] = std::exp(-gamma_ * static_cast<double>(d) * d * step * 0.5);
    }
    phase_cos_.resize(n_);
    phase_sin_.resize(n_);
    for (int m = 0; m < n_; ++m) {
      const double phase = cache_.eigenvalues[m] * step;
      phase_cos_[m] = std::cos(phase);
      phase_sin_[m] = std::sin(phase);
    }
  }

  void apply_half_decay() {
    for (int j = 0; j < n_; ++j) {
      double* col_r = rho_r_.col(j).data();
      double* col_i = rho_i_.col(j).data();
      for (int i = 0; i < n_; ++i) {
        const double f = half_decay_[std::abs(i - j)];
        col_r[i] *= f;
        col_i[i] *= f;
      }
    }
  }

  // rho <- U rho U^+ with U = exp(-i H step), via the eigenbasis.
  void apply_unitary() {
    const Eigen::MatrixXd& v = cache_.eigenvectors;
    ar_.noalias() = v.transpose() * rho_r_;
    ai_.noalias() = v.transpose() * rho_i_;
    br_.noalias() = ar_ * v;
    bi_.noalias() = ai_ * v;
    // elementwise u_m * conj(u_n) with u = cos - i sin
    for (int col = 0; col < n_; ++col) {
      const double cn = phase_cos_[col];
      const double sn = phase_sin_[col];
      double* cr = br_.col(col).data();
      double* ci = bi_.col(col).data();
      for (int row = 0; row < n_; ++row) {
        const double fr = phase_cos_[row] * cn + phase_sin_[row] * sn;
        const double fi = phase_cos_[row] * sn - phase_sin_[row] * cn;
        const double re = fr * cr[row] - fi * ci[row];
        const double im = fr * ci[row] + fi * cr[row];
        cr[row] = re;
        ci[row] = im;
      }
    }
    ar_.noalias() = v * br_;
    ai_.noalias() = v * bi_;
    rho_r_.noalias() = ar_ * v.transpose();
    rho_i_.noalias() = ai_ * v.transpose();
  }

  void step_general() {
    apply_half_decay();
    apply_unitary();
    apply_half_decay();
  }

  // Diagonal H: decay and phases commute, single fused elementwise pass.
  void step_diagonal() {
    for (int col = 0; col < n_; ++col) {
      const double cn = phase_cos_[col];
      const double sn = phase_sin_[col];
      double* cr = rho_r_.col(col).data();
      double* ci = rho_i_.col(col).data();
      for (int row = 0; row < n_; ++row) {
        const double d = half_decay_[std::abs(row - col)];
        const double fr = d * d * (phase_cos_[row] * cn + phase_sin_[row] * sn);
        const double fi = d * d * (phase_cos_[row] * sn - phase_sin_[row] * cn);
        const double re = fr * cr[row] - fi * ci[row];
        const double im = fr * ci[row] + fi * cr[row];
        cr[row] = re;
        ci[row] = im;
      }
    }
  }

  void hermitize() {
    rho_r_ = 0.5 * (rho_r_ + rho_r_.transpose()).eval();
    rho_i_ = 0.5 * (rho_i_ - rho_i_.transpose()).eval();
  }

  int n_;
  double gamma_;
  SpectralCache cache_;
  Eigen::MatrixXd rho_r_, rho_i_;
  Eigen::MatrixXd ar_, ai_, br_, bi_;
  Eigen::VectorXd half_decay_, phase_cos_, phase_sin_;
};

struct SingleRun {
  std::vector<Eigen::VectorXd> populations;
  std::vector<DensityMatrix> states;
  DensityMatrix final_state;
};

SingleRun run_trajectory(const HamiltonianOperator& h, double gamma,
                         const DensityMatrix& rho0, double total_time,
                         const std::vector<double>& sample_times, double step,
                         bool keep_states) {
  StrangEvolver evolver(h, gamma);
  evolver.load(rho0);

  SingleRun run;
  run.populations.reserve(sample_times.size());
  double t_now = 0.0;
  std::size_t next_sample = 0;

  auto advance_to = [&](double target) {
    const double segment = target - t_now;
    if (segment > 0.0) {
      const long count = std::max<long>(1, static_cast<long>(std::ceil(segment / step - 1e-9)));
      evolver.run(segment / static_cast<double>(count), count);
    }
    t_now = target;
  };

  while (next_sample < sample_times.size()) {
    advance_to(sample_times[next_sample]);
    run.populations.push_back(evolver.populations());
    if (keep_states) run.states.push_back(evolver.store());
    ++next_sample;
  }
  advance_to(total_time);
  run.final_state = evolver.store();
  return run;
}

double population_delta(const SingleRun& a, const SingleRun& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.populations.size(); ++k) {
    worst = std::max(worst, std::sqrt((a.populations[k] - b.populations[k]).squaredNorm()));
  }
  worst = std::max(worst, std::sqrt((a.final_state.populations() -
                                     b.final_state.populations()).squaredNorm()));
  return worst;
}

}  // namespace

DensityMatrix lindblad_step(const HamiltonianOperator& h, const DephasingSpec& spec,
                            const DensityMatrix& rho, double step) {
  if (step < 0.0) throw std::invalid_argument("lindblad_step: negative step");
  if (rho.size() != h.size()) throw std::invalid_argument("lindblad_step: size mismatch");
  StrangEvolver evolver(h, spec.gamma);
  evolver.load(rho);
  evolver.run(step, 1);
  return evolver.store();
}

LindbladTrajectory evolve_lindblad(const HamiltonianOperator& h,
                                   const DephasingSpec& spec,
                                   const DensityMatrix& rho0, double total_time,
                                   const LindbladSettings& settings,
                                   const std::vector<double>& sample_times,
                                   bool keep_states) {
  if (total_time < 0.0) throw std::invalid_argument("evolve_lindblad: negative total_time");
  if (rho0.size() != h.size()) throw std::invalid_argument("evolve_lindblad: size mismatch");
  if (!(settings.base_step > 0.0)) throw std::invalid_argument("evolve_lindblad: base_step must be > 0");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (sample_times[k] < 0.0 || sample_times[k] > total_time) {
      throw std::invalid_argument("evolve_lindblad: sample time outside [0, total_time]");
    }
    if (k > 0 && sample_times[k] < sample_times[k - 1]) {
      throw std::invalid_argument("evolve_lindblad: sample times must be sorted");
    }
  }

  LindbladTrajectory out;
  out.times = sample_times;

  if (total_time == 0.0) {
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
      out.populations.push_back(rho0.populations());
      if (keep_states) out.states.push_back(rho0);
    }
    out.final_state = rho0;
    out.step_used = 0.0;
    return out;
  }

  double step = settings.base_step;
  SingleRun previous =
      run_trajectory(h, spec.gamma, rho0, total_time, sample_times, step, keep_states);
  double delta = std::numeric_limits<double>::infinity();
  for (int refinement = 1; refinement <= settings.max_refinements; ++refinement) {
    step *= 0.5;
    SingleRun current =
        run_trajectory(h, spec.gamma, rho0, total_time, sample_times, step, keep_states);
    delta = population_delta(previous, current);
    if (delta < settings.refinement_threshold) {
      out.populations = std::move(current.populations);
      out.states = std::move(current.states);
      out.final_state = std::move(current.final_state);
      out.step_used = step;
      out.refinements = refinement;
      return out;
    }
    previous = std::move(current);
  }
  throw StepRefinementError(
      "evolve_lindblad: population infidelity between refinements still " +
          std::to_string(delta) + " after " + std::to_string(settings.max_refinements) +
          " halvings (threshold " + std::to_string(settings.refinement_threshold) + ")",
      delta);
}

DensityMatrix closed_form_dephasing(const DensityMatrix& rho0,
                                    const DephasingSpec& spec,
                                    const Eigen::VectorXd& epsilons, double t) {
  const int n = rho0.size();
  if (epsilons.size() != n) {
    throw std::invalid_argument("closed_form_dephasing: size mismatch");
  }
  Eigen::VectorXd decay(n);
  for (int d = 0; d < n; ++d) {
    decay[d] = std::exp(-spec.gamma * static_cast<double>(d) * d * t);
  }
  Eigen::VectorXcd site_phase(n);
  for (int x = 0; x < n; ++x) {
    site_phase[x] = std::polar(1.0, -epsilons[x] * t);
  }
  DensityMatrix out;
  out.entries.resize(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      out.entries(x, y) = rho0.entries(x, y) * site_phase[x] *
                          std::conj(site_phase[y]) * decay[std::abs(x - y)];
    }
  }
  return out;
}

}  // namespace dephasim
