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

#include <cstdint>
#include <optional>
#include <vector>

#include "dephasim/lindblad.hpp"
#include "dephasim/model.hpp"
#include "dephasim/propagator.hpp"

namespace dephasim {

// Tilt width reproducing dephasing rate gamma with windows of the given
// duration: sigma = sqrt(2 gamma / window).
double derive_sigma(double gamma, double window);

enum class ProtocolMode { digital, analogue };

// Parameters of one randomised-tilt simulation: N windows of duration
// T = total_time/N, each with a fresh Gaussian tilt of width sigma chosen so
// that sigma^2 T / 2 = gamma holds exactly.
struct ProtocolConfig {
  ProtocolMode mode;
  int num_windows;    // N >= 1
  int ensemble_size;  // E >= 1
  double total_time;  // t > 0
  double gamma;       // >= 0

  ProtocolConfig(ProtocolMode m, int windows, int ensemble, double time, double rate);

  double window_duration() const { return total_time / num_windows; }
  double sigma() const { return derive_sigma(gamma, window_duration()); }
};

// Per-member tilt strengths, one i.i.d. Gaussian draw per window.
struct TiltSchedule {
  std::vector<double> alphas;
  std::uint64_t member_seed = 0;
};

// Deterministic: the member stream is seeded from (ensemble_seed, member
// index) only, so schedules are independent of blocking and thread count,
// and growing the ensemble extends the same seed-stream prefix.
TiltSchedule sample_tilt_schedule(const ProtocolConfig& config,
                                  std::uint64_t ensemble_seed,
                                  std::uint64_t member_index);

// Digital member: per window, evolve under H for T, then apply the tilt
// window as a single diagonal kick with phase alpha_k * T.
PureState run_member_digital(const SpectralCache& cache, const ProtocolConfig& config,
                             const TiltSchedule& schedule, const PureState& initial);

PropagatorSettings analogue_defaults();

// Analogue member: per window, evolve under H + alpha_k X for T.
PureState run_member_analogue(const HamiltonianOperator& h, const ProtocolConfig& config,
                              const TiltSchedule& schedule, const PureState& initial,
                              const PropagatorSettings& settings = analogue_defaults());

struct EnsembleMetadata {
  ProtocolConfig config;
  std::uint64_t master_seed = 0;
  std::uint64_t disorder_seed = 0;
};

struct EnsembleResult {
  Eigen::VectorXd averaged_populations;
  // Uniform mixture of the E member projectors; absent in population-only
  // mode to avoid the O(L^2) accumulation.
  std::optional<DensityMatrix> averaged_density;
  EnsembleMetadata metadata;
};

struct EnsembleOptions {
  bool accumulate_density = true;
  int threads = 1;  // 0 = hardware; never affects the result bits
  // used by analogue ensembles only; digital always evolves via the cache
  PropagatorSettings propagator = analogue_defaults();
};

// Averages E independent members with uniform weight. Members are processed
// in fixed-size blocks and blocks are combined in index order, so the result
// is bit-identical for fixed seeds under any thread count. A member failure
// aborts the ensemble and names the member index.
EnsembleResult run_ensemble(const HamiltonianOperator& h, const ProtocolConfig& config,
                            const PureState& initial, std::uint64_t master_seed,
                            std::uint64_t disorder_seed,
                            const EnsembleOptions& options = {});

// Closed-form Gaussian average of the digital protocol for a tunnelling-free
// chain: each window attenuates the (x,y) coherence by
// exp(-sigma^2 T^2 (x-y)^2 / 2) on top of the onsite phases. Second algebraic
// route to the dephasing attenuation, used to cross-check the sampled
// ensembles and the Lindblad closed form.
DensityMatrix digital_average_analytic(const DensityMatrix& rho0,
                                       const Eigen::VectorXd& epsilons,
                                       const ProtocolConfig& config);

}  // namespace dephasim
