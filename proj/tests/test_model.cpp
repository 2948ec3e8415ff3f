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
#include "dephasim/rng.hpp"

using namespace dephasim;

TEST_CASE("lattice spec validation") {
  CHECK_NOTHROW(LatticeSpec(2, 1.0, 0.0));
  CHECK_THROWS_AS(LatticeSpec(1, 1.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec(10, 0.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec(10, -1.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec(10, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("disorder sampling") {
  SUBCASE("zero width gives zero energies") {
    const LatticeSpec spec(16, 1.0, 0.0);
    const DisorderRealization d = sample_disorder(spec, 123);
    CHECK(d.epsilons.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.seed == 123);
  }

  SUBCASE("identical (spec, seed) gives identical vectors") {
    const LatticeSpec spec(400, 1.0, 0.2);
    const DisorderRealization a = sample_disorder(spec, 77);
    const DisorderRealization b = sample_disorder(spec, 77);
    CHECK(a.epsilons == b.epsilons);
    const DisorderRealization c = sample_disorder(spec, 78);
    CHECK(a.epsilons != c.epsilons);
  }

  SUBCASE("bounds and moments at the default disorder amplitude") {
    const LatticeSpec spec(400, 1.0, 0.2);
    const DisorderRealization d = sample_disorder(spec, 5);
    CHECK(d.epsilons.size() == 400);
    CHECK(d.epsilons.cwiseAbs().maxCoeff() <= 0.2);
    // mean -> 0 and variance -> W^2/3; standard errors W/sqrt(3 L) and ~W^2/L
    const double mean = d.epsilons.mean();
    const double var = (d.epsilons.array() - mean).square().sum() / 399.0;
    CHECK(std::abs(mean) < 4.0 * 0.2 / std::sqrt(3.0 * 400));
    CHECK(var == doctest::Approx(0.2 * 0.2 / 3.0).epsilon(0.25));
  }
}

TEST_CASE("hamiltonian construction") {
  SUBCASE("L=2 clean chain has eigenvalues -tau, +tau") {
    const LatticeSpec spec(2, 1.0, 0.0);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense());
    CHECK(solver.eigenvalues()[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(solver.eigenvalues()[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("L=3 clean chain against direct diagonalisation") {
    // oracle: 3x3 matrix built by hand
    Eigen::Matrix3d dense;
    dense << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> oracle(dense);

    const LatticeSpec spec(3, 1.0, 0.0);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.dense());
    for (int k = 0; k < 3; ++k) {
      CHECK(solver.eigenvalues()[k] ==
            doctest::Approx(oracle.eigenvalues()[k]).epsilon(1e-12));
    }
    CHECK(oracle.eigenvalues()[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(oracle.eigenvalues()[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(oracle.eigenvalues()[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  SUBCASE("length mismatch rejected") {
    const LatticeSpec spec(4, 1.0, 0.1);
    DisorderRealization wrong = sample_disorder(LatticeSpec(5, 1.0, 0.1), 3);
    CHECK_THROWS_AS(build_hamiltonian(spec, wrong), std::invalid_argument);
  }

  SUBCASE("open boundary: no wrap coupling") {
    const LatticeSpec spec(5, 1.0, 0.0);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));
    const Eigen::MatrixXd dense = h.dense();
    CHECK(dense(0, 4) == 0.0);
    CHECK(dense(4, 0) == 0.0);
  }
}

TEST_CASE("hermiticity of the operator action") {
  const LatticeSpec spec(64, 1.0, 0.2);
  const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 11));
  Xoshiro256pp rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd u(64), v(64);
    for (int i = 0; i < 64; ++i) {
      u[i] = rng.gaussian();
      v[i] = rng.gaussian();
    }
    const double lhs = u.dot(h.apply(v));
    const double rhs = h.apply(u).dot(v);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
  }
}

TEST_CASE("tilt operator") {
  const LatticeSpec spec(3, 1.0, 0.0);
  const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));

  SUBCASE("alpha = 0 leaves the operator unchanged") {
    const HamiltonianOperator tilted = build_tilted(h, 0.0);
    CHECK(tilted.diagonal() == h.diagonal());
    CHECK(tilted.coupling() == h.coupling());
  }

  SUBCASE("alpha = tau gives diagonal (0, tau, 2tau)") {
    const HamiltonianOperator tilted = build_tilted(h, 1.0);
    CHECK(tilted.diagonal()[0] == 0.0);
    CHECK(tilted.diagonal()[1] == 1.0);
    CHECK(tilted.diagonal()[2] == 2.0);
    CHECK(tilted.coupling() == 1.0);
  }

  SUBCASE("origin shifts the ramp") {
    const HamiltonianOperator tilted = build_tilted(h, 2.0, 1);
    CHECK(tilted.diagonal()[0] == -2.0);
    CHECK(tilted.diagonal()[1] == 0.0);
    CHECK(tilted.diagonal()[2] == 2.0);
  }

  SUBCASE("TiltOperator entries") {
    const TiltOperator tilt{0.5, 0};
    CHECK(tilt.entry(0) == 0.0);
    CHECK(tilt.entry(4) == 2.0);
  }
}

TEST_CASE("dephasing weight") {
  CHECK(dephasing_weight(5, 5) == 0.0);
  CHECK(dephasing_weight(0, 2) == 4.0);
  CHECK(dephasing_weight(2, 0) == 4.0);
  CHECK_THROWS_AS(DephasingSpec(-1.0), std::invalid_argument);
  Xoshiro256pp rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int x = static_cast<int>(rng.next() % 400);
    const int y = static_cast<int>(rng.next() % 400);
    CHECK(dephasing_weight(x, y) == dephasing_weight(y, x));
    CHECK(dephasing_weight(x, y) >= 0.0);
    CHECK(dephasing_weight(x, x) == 0.0);
  }
}

TEST_CASE("ground state") {
  SUBCASE("L=3 clean chain") {
    const LatticeSpec spec(3, 1.0, 0.0);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 0));
    const GroundStateResult g = ground_state(h);
    CHECK(g.energy == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(!g.degenerate);
    // (1/2, -1/sqrt2, 1/2) with the largest amplitude made real positive
    CHECK(g.state.amplitudes[0].real() == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(g.state.amplitudes[1].real() ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(g.state.amplitudes[2].real() == doctest::Approx(-0.5).epsilon(1e-10));
  }

  SUBCASE("L=2 biased chain: energy 5 - sqrt(26), weight on site 0") {
    Eigen::VectorXd diag(2);
    diag << 0.0, 10.0;
    const HamiltonianOperator h(diag, 1.0);
    const GroundStateResult g = ground_state(h);
    CHECK(g.energy == doctest::Approx(5.0 - std::sqrt(26.0)).epsilon(1e-12));
    CHECK(g.energy == doctest::Approx(-0.0990).epsilon(1e-3));
    CHECK(g.state.populations()[0] > 0.99);
  }

  SUBCASE("residual and Rayleigh bound on a disordered chain") {
    const LatticeSpec spec(50, 1.0, 0.2);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 21));
    const GroundStateResult g = ground_state(h);
    Eigen::VectorXcd residual;
    h.apply(g.state.amplitudes, residual);
    residual -= g.energy * g.state.amplitudes;
    CHECK(residual.norm() <= 1e-10 * h.norm_bound());
    CHECK(g.state.norm() == doctest::Approx(1.0).epsilon(1e-12));

    Xoshiro256pp rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd v(50);
      for (int i = 0; i < 50; ++i) v[i] = rng.gaussian();
      v.normalize();
      CHECK(v.dot(h.apply(v)) >= g.energy - 1e-12);
    }
  }

  SUBCASE("disordered 400-site chain is exponentially localised") {
    const LatticeSpec spec(400, 1.0, 0.2);
    const HamiltonianOperator h = build_hamiltonian(spec, sample_disorder(spec, 1));
    const GroundStateResult g = ground_state(h);
    int peak = 0;
    g.state.populations().maxCoeff(&peak);
    double far_weight = 0.0;
    for (int x = 0; x < 400; ++x) {
      if (std::abs(x - peak) > 120) far_weight += g.state.populations()[x];
    }
    CHECK(far_weight < 1e-8);
  }

  SUBCASE("degenerate spectrum is flagged") {
    Eigen::VectorXd diag(3);
    diag << 2.0, 2.0, 2.0;
    const HamiltonianOperator h(diag, 0.0);
    const GroundStateResult g = ground_state(h);
    CHECK(g.degenerate);
    CHECK(g.energy == doctest::Approx(2.0));
  }
}
