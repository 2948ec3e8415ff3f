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

#include <doctest.h>

#include <cmath>

#include "dephasim/model.hpp"
#include "dephasim/propagator.hpp"
#include "dephasim/rng.hpp"

using namespace dephasim;

namespace {

PureState random_state(int n, std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  PureState psi;
  psi.amplitudes.resize(n);
  for (int i = 0; i < n; ++i) {
    psi.amplitudes[i] = Complex(rng.gaussian(), rng.gaussian());
  }
  psi.amplitudes /= psi.amplitudes.norm();
  return psi;
}

HamiltonianOperator random_chain(int n, std::uint64_t seed, double w = 0.2) {
  const LatticeSpec spec(n, 1.0, w);
  return build_hamiltonian(spec, sample_disorder(spec, seed));
}

}  // namespace

TEST_CASE("spectral cache invariants") {
  const HamiltonianOperator h = random_chain(50, 4);
  const SpectralCache cache = SpectralCache::build(h);
  const Eigen::MatrixXd reconstruction =
      cache.eigenvectors * cache.eigenvalues.asDiagonal() *
      cache.eigenvectors.transpose();
  CHECK((reconstruction - h.dense()).norm() <= 1e-10 * h.norm_bound());
  const Eigen::MatrixXd gram =
      cache.eigenvectors.transpose() * cache.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(50, 50)).norm() <= 1e-10);
}

TEST_CASE("zero duration is the identity") {
  const HamiltonianOperator h = random_chain(12, 5);
  const PureState psi = random_state(12, 6);
  for (auto backend : {PropagatorBackend::spectral, PropagatorBackend::krylov}) {
    PropagatorSettings settings;
    settings.backend = backend;
    const PureState out = evolve_unitary(h, psi, 0.0, settings);
    CHECK((out.amplitudes - psi.amplitudes).norm() == 0.0);
  }
  CHECK_THROWS_AS(evolve_unitary(h, psi, -1.0), std::invalid_argument);
}

TEST_CASE("two-site Rabi oscillation") {
  // closed form: psi(t) = (cos tau t, -i sin tau t) for psi(0) = (1, 0)
  const LatticeSpec spec(2, 1.0, 0.0);
  const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));
  PureState psi;
  psi.amplitudes.resize(2);
  psi.amplitudes << Complex(1.0, 0.0), Complex(0.0, 0.0);

  for (double t : {0.3, 1.7, 4.0}) {
    for (auto backend : {PropagatorBackend::spectral, PropagatorBackend::krylov}) {
      PropagatorSettings settings;
      settings.backend = backend;
      const PureState out = evolve_unitary(h, psi, t, settings);
      const Eigen::VectorXd p = out.populations();
      CHECK(p[0] == doctest::Approx(std::cos(t) * std::cos(t)).epsilon(1e-10));
      CHECK(p[1] == doctest::Approx(std::sin(t) * std::sin(t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("unitarity and norm drift") {
  const HamiltonianOperator h = random_chain(8, 9);
  const SpectralCache cache = SpectralCache::build(h);
  PureState psi = random_state(8, 10);

  SUBCASE("single call") {
    const PureState out = evolve_unitary(cache, psi, 3.7);
    CHECK(std::abs(out.norm() - 1.0) <= 1e-10);
  }

  SUBCASE("1e4 chained calls stay within 1e-7") {
    for (int k = 0; k < 10000; ++k) {
      cache.evolve_in_place(psi.amplitudes, 0.37);
    }
    CHECK(std::abs(psi.norm() - 1.0) <= 1e-7);
  }
}

TEST_CASE("energy conservation along the evolution") {
  const HamiltonianOperator h = random_chain(40, 12);
  const SpectralCache cache = SpectralCache::build(h);
  PureState psi = random_state(40, 13);
  Eigen::VectorXcd hpsi;
  h.apply(psi.amplitudes, hpsi);
  const double initial = psi.amplitudes.dot(hpsi).real();
  for (int k = 0; k < 50; ++k) {
    cache.evolve_in_place(psi.amplitudes, 0.9);
    h.apply(psi.amplitudes, hpsi);
    const double energy = psi.amplitudes.dot(hpsi).real();
    CHECK(std::abs(energy - initial) <= 1e-8 * std::max(std::abs(initial), 1.0));
  }
}

TEST_CASE("composition: evolve(t1) then evolve(t2) equals evolve(t1+t2)") {
  const HamiltonianOperator h = random_chain(30, 14);
  const PureState psi = random_state(30, 15);
  for (auto backend : {PropagatorBackend::spectral, PropagatorBackend::krylov}) {
    PropagatorSettings settings;
    settings.backend = backend;
    const PureState split =
        evolve_unitary(h, evolve_unitary(h, psi, 1.3, settings), 2.9, settings);
    const PureState direct = evolve_unitary(h, psi, 4.2, settings);
    CHECK((split.amplitudes - direct.amplitudes).norm() <= 1e-9);
  }
}

TEST_CASE("backend agreement up to L = 400, tau t = 20") {
  const HamiltonianOperator h = random_chain(400, 16);
  const GroundStateResult g = ground_state(h);
  const SpectralCache cache = SpectralCache::build(h);

  const PureState spectral = evolve_unitary(cache, g.state, 20.0);
  PropagatorSettings settings;
  settings.backend = PropagatorBackend::krylov;
  const PureState krylov = evolve_krylov(h, g.state, 20.0, settings);

  const double overlap = std::abs(spectral.amplitudes.dot(krylov.amplitudes));
  CHECK(overlap >= 1.0 - 1e-9);
  CHECK((spectral.amplitudes - krylov.amplitudes).norm() <= 1e-7);
}

TEST_CASE("krylov failure is loud and names the residual") {
  const HamiltonianOperator h = random_chain(64, 17);
  const PureState psi = random_state(64, 18);
  PropagatorSettings settings;
  settings.backend = PropagatorBackend::krylov;
  settings.krylov_max_dim = 8;
  settings.krylov_max_rejections = 0;  // forbid sub-stepping
  CHECK_THROWS_AS(evolve_krylov(h, psi, 50.0, settings), KrylovConvergenceError);
  try {
    evolve_krylov(h, psi, 50.0, settings);
  } catch (const KrylovConvergenceError& e) {
    CHECK(e.achieved_residual() > settings.krylov_tolerance);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("tilt kick") {
  const PureState psi = random_state(32, 19);

  SUBCASE("zero phase is the identity") {
    const PureState out = apply_tilt_kick(psi, 0.0);
    CHECK((out.amplitudes - psi.amplitudes).norm() == 0.0);
  }

  SUBCASE("2 pi with integer sites is a global phase") {
    const PureState out = apply_tilt_kick(psi, 2.0 * M_PI);
    const double overlap = std::abs(psi.amplitudes.dot(out.amplitudes));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("populations invariant, relative phases shift by theta (x-y)") {
    const double theta = 0.7342;
    const PureState out = apply_tilt_kick(psi, theta);
    CHECK((out.populations() - psi.populations()).cwiseAbs().maxCoeff() <= 1e-14);
    // site 5 vs site 2: phase difference changes by theta * 3
    const Complex before = psi.amplitudes[5] * std::conj(psi.amplitudes[2]);
    const Complex after = out.amplitudes[5] * std::conj(out.amplitudes[2]);
    const double shift = std::arg(after / before);
    const double expected = std::remainder(-theta * 3.0, 2.0 * M_PI);
    CHECK(shift == doctest::Approx(expected).epsilon(1e-10));
  }

  SUBCASE("origin only changes a global phase") {
    const double theta = 1.234;
    const PureState a = apply_tilt_kick(psi, theta, 0);
    const PureState b = apply_tilt_kick(psi, theta, 11);
    CHECK(std::abs(a.amplitudes.dot(b.amplitudes)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((a.populations() - b.populations()).cwiseAbs().maxCoeff() <= 1e-14);
  }
}
