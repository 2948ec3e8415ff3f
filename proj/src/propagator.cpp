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

#include "dephasim/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dephasim {

SpectralCache SpectralCache::build(const HamiltonianOperator& h) {
  SpectralCache cache;
  if (h.coupling() == 0.0) {
    // Site basis is already the eigenbasis; keep site ordering.
    cache.diagonal = true;
    cache.eigenvalues = h.diagonal();
    return cache;
  }
  const int n = h.size();
  Eigen::VectorXd subdiag = Eigen::VectorXd::Constant(n - 1, h.coupling());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.diagonal(), subdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("SpectralCache: tridiagonal eigensolver failed");
  }
  cache.eigenvalues = solver.eigenvalues();
  cache.eigenvectors = solver.eigenvectors();
  return cache;
}

void SpectralCache::evolve_in_place(Eigen::VectorXcd& psi, double duration) const {
  const int n = size();
  if (duration == 0.0) return;
  if (diagonal) {
    for (int x = 0; x < n; ++x) {
      const double phase = eigenvalues[x] * duration;
      psi[x] *= Complex(std::cos(phase), -std::sin(phase));
    }
    return;
  }
  Eigen::VectorXd pr = psi.real();
  Eigen::VectorXd pi = psi.imag();
  Eigen::VectorXd ar = eigenvectors.transpose() * pr;
  Eigen::VectorXd ai = eigenvectors.transpose() * pi;
  for (int m = 0; m < n; ++m) {
    const double phase = eigenvalues[m] * duration;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double re = c * ar[m] + s * ai[m];
    const double im = c * ai[m] - s * ar[m];
    ar[m] = re;
    ai[m] = im;
  }
  pr.noalias() = eigenvectors * ar;
  pi.noalias() = eigenvectors * ai;
  psi.real() = pr;
  psi.imag() = pi;
}

PureState evolve_unitary(const SpectralCache& cache, const PureState& state,
                         double duration) {
  if (duration < 0.0) throw std::invalid_argument("evolve_unitary: negative duration");
  PureState out = state;
  cache.evolve_in_place(out.amplitudes, duration);
  return out;
}

PureState evolve_unitary(const HamiltonianOperator& h, const PureState& state,
                         double duration, const PropagatorSettings& settings) {
  if (duration < 0.0) throw std::invalid_argument("evolve_unitary: negative duration");
  if (settings.backend == PropagatorBackend::krylov) {
    return evolve_krylov(h, state, duration, settings);
  }
  return evolve_unitary(SpectralCache::build(h), state, duration);
}

namespace {

// exp(-i T t) e1 for the real symmetric tridiagonal T given by diag/offdiag.
// Returns the unit-seeded solution; `next coupling * |u[m-1]|` drives the
// residual estimate.
Eigen::VectorXcd expm_tridiag_e1(const Eigen::Ref<const Eigen::VectorXd>& diag,
                                 const Eigen::Ref<const Eigen::VectorXd>& offdiag,
                                 double t) {
  const int m = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  if (m == 1) {
    Eigen::VectorXcd u(1);
    const double phase = diag[0] * t;
    u[0] = Complex(std::cos(phase), -std::sin(phase));
    return u;
  }
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("evolve_krylov: small eigensolver failed");
  }
  const Eigen::MatrixXd& w = solver.eigenvectors();
  Eigen::VectorXcd coeff(m);
  for (int k = 0; k < m; ++k) {
    const double phase = solver.eigenvalues()[k] * t;
    coeff[k] = w(0, k) * Complex(std::cos(phase), -std::sin(phase));
  }
  return w.cast<Complex>() * coeff;
}

// First Krylov dimension worth testing, from the a-priori series bound
// (rho*t/2)^m / m! <= tol/10 with rho the Gershgorin radius.
int predict_dimension(double rho_t, double tol, int m_max) {
  double term = 1.0;
  for (int m = 1; m <= m_max; ++m) {
    term *= 0.5 * rho_t / m;
    if (term <= 0.1 * tol) return std::max(m, 2);
  }
  return m_max;
}

}  // namespace

PureState evolve_krylov(const HamiltonianOperator& h, const PureState& state,
                        double duration, const PropagatorSettings& settings) {
  if (duration < 0.0) throw std::invalid_argument("evolve_krylov: negative duration");
  if (!(settings.krylov_tolerance > 0.0)) {
    throw std::invalid_argument("evolve_krylov: tolerance must be > 0");
  }
  PureState out = state;
  if (duration == 0.0) return out;

  const int n = h.size();
  const int m_max = std::min(settings.krylov_max_dim, n);
  const double tol = std::max(settings.krylov_tolerance, 1e-14);
  const double anorm = std::max(h.norm_bound(), 1e-300);
  const double breakdown_tol = 1e-14 * anorm;

  Eigen::VectorXcd& w = out.amplitudes;
  Eigen::MatrixXcd basis(n, m_max + 1);
  Eigen::VectorXd alpha(m_max);
  Eigen::VectorXd beta(m_max);  // beta[j] couples columns j and j+1
  Eigen::VectorXcd q(n), hq(n);

  double t_now = 0.0;
  double t_step = duration;
  int rejections = 0;
  double best_residual = std::numeric_limits<double>::infinity();

  while (t_now < duration) {
    t_step = std::min(t_step, duration - t_now);
    const double w_norm = w.norm();
    if (w_norm == 0.0) break;
    basis.col(0) = w / w_norm;

    const int first_check = predict_dimension(anorm * t_step, tol, m_max);
    bool converged = false;
    bool breakdown = false;
    int m_used = 0;
    Eigen::VectorXcd u;

    int j = 0;
    while (j < m_max) {
      q = basis.col(j);
      h.apply(q, hq);
      if (j > 0) hq -= beta[j - 1] * basis.col(j - 1);
      alpha[j] = basis.col(j).dot(hq).real();
      hq -= alpha[j] * basis.col(j);
      const double b = hq.norm();
      beta[j] = b;
      if (b <= breakdown_tol) {
        // Invariant subspace reached: the projected evolution is exact.
        breakdown = true;
        m_used = j + 1;
        u = expm_tridiag_e1(alpha.head(m_used), beta.head(m_used - 1), t_step);
        converged = true;
        break;
      }
      basis.col(j + 1) = hq / b;
      ++j;

      if (j >= first_check && (j == m_max || (j - first_check) % 4 == 0)) {
        u = expm_tridiag_e1(alpha.head(j), beta.head(j - 1), t_step);
        const double residual = beta[j - 1] * t_step * std::abs(u[j - 1]);
        best_residual = std::min(best_residual, residual);
        if (residual <= tol) {
          converged = true;
          m_used = j;
          break;
        }
      }
    }

    if (!converged) {
      ++rejections;
      if (rejections > settings.krylov_max_rejections) {
        throw KrylovConvergenceError(
            "evolve_krylov: no convergence within max_dim=" +
                std::to_string(m_max) + " after " + std::to_string(rejections - 1) +
                " sub-step halvings; achieved relative residual " +
                std::to_string(best_residual),
            best_residual);
      }
      t_step *= 0.5;
      continue;
    }

    w.noalias() = basis.leftCols(m_used) * (w_norm * u);
    if (t_now + t_step == t_now) {
      throw KrylovConvergenceError(
          "evolve_krylov: sub-step underflow, cannot advance past t = " +
              std::to_string(t_now),
          best_residual);
    }
    t_now += t_step;
    if (!breakdown && m_used <= m_max / 2) t_step *= 2.0;
  }
  return out;
}

PureState apply_tilt_kick(const PureState& state, double kick_phase, int origin) {
  PureState out = state;
  for (int x = 0; x < out.size(); ++x) {
    out.amplitudes[x] *= std::polar(1.0, -kick_phase * (x - origin));
  }
  return out;
}

}  // namespace dephasim
