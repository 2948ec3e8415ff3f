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

#include "dephasim/protocols.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dephasim/parallel.hpp"
#include "dephasim/rng.hpp"

namespace dephasim {

namespace {

// Members are evolved in fixed blocks of this many columns. The constant is
// part of the numerical contract: block boundaries (not thread count) decide
// the floating-point reduction order.
constexpr int kMemberBlock = 32;

}  // namespace

double derive_sigma(double gamma, double window) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("derive_sigma: gamma must be >= 0");
  if (!(window > 0.0)) throw std::invalid_argument("derive_sigma: window must be > 0");
  return std::sqrt(2.0 * gamma / window);
}

ProtocolConfig::ProtocolConfig(ProtocolMode m, int windows, int ensemble, double time,
                               double rate)
    : mode(m), num_windows(windows), ensemble_size(ensemble), total_time(time),
      gamma(rate) {
  if (windows < 1) throw std::invalid_argument("ProtocolConfig: num_windows must be >= 1");
  if (ensemble < 1) throw std::invalid_argument("ProtocolConfig: ensemble_size must be >= 1");
  if (!(time > 0.0)) throw std::invalid_argument("ProtocolConfig: total_time must be > 0");
  if (!(rate >= 0.0)) throw std::invalid_argument("ProtocolConfig: gamma must be >= 0");
}

TiltSchedule sample_tilt_schedule(const ProtocolConfig& config,
                                  std::uint64_t ensemble_seed,
                                  std::uint64_t member_index) {
  TiltSchedule schedule;
  schedule.member_seed = derive_seed(ensemble_seed, seed_salt::tilt_member, member_index);
  Xoshiro256pp rng(schedule.member_seed);
  const double sigma = config.sigma();
  schedule.alphas.resize(static_cast<std::size_t>(config.num_windows));
  for (auto& alpha : schedule.alphas) {
    alpha = sigma * rng.gaussian();
  }
  return schedule;
}

PropagatorSettings analogue_defaults() {
  PropagatorSettings settings;
  settings.backend = PropagatorBackend::krylov;
  return settings;
}

PureState run_member_digital(const SpectralCache& cache, const ProtocolConfig& config,
                             const TiltSchedule& schedule, const PureState& initial) {
  if (schedule.alphas.size() != static_cast<std::size_t>(config.num_windows)) {
    throw std::invalid_argument("run_member_digital: schedule length mismatch");
  }
  const double window = config.window_duration();
  PureState psi = initial;
  for (int k = 0; k < config.num_windows; ++k) {
    cache.evolve_in_place(psi.amplitudes, window);
    psi = apply_tilt_kick(psi, schedule.alphas[static_cast<std::size_t>(k)] * window);
  }
  return psi;
}

PureState run_member_analogue(const HamiltonianOperator& h, const ProtocolConfig& config,
                              const TiltSchedule& schedule, const PureState& initial,
                              const PropagatorSettings& settings) {
  if (schedule.alphas.size() != static_cast<std::size_t>(config.num_windows)) {
    throw std::invalid_argument("run_member_analogue: schedule length mismatch");
  }
  const double window = config.window_duration();
  PureState psi = initial;
  for (int k = 0; k < config.num_windows; ++k) {
    const HamiltonianOperator tilted =
        build_tilted(h, schedule.alphas[static_cast<std::size_t>(k)]);
    if (settings.backend == PropagatorBackend::krylov) {
      psi = evolve_krylov(tilted, psi, window, settings);
    } else {
      psi = evolve_unitary(tilted, psi, window, settings);
    }
  }
  return psi;
}

namespace {

// Evolves the members [begin, end) of a digital ensemble as one column
// block: the shared window propagator is applied to all columns with two
// real GEMM pairs, the member-specific kicks column by column.
void digital_block_states(const SpectralCache& cache, const ProtocolConfig& config,
                          std::uint64_t ensemble_seed, int begin, int end,
                          const PureState& initial, Eigen::MatrixXd& out_r,
                          Eigen::MatrixXd& out_i) {
  const int n = cache.size();
  const int width = end - begin;
  const double window = config.window_duration();

  out_r.resize(n, width);
  out_i.resize(n, width);
  for (int j = 0; j < width; ++j) {
    out_r.col(j) = initial.amplitudes.real();
    out_i.col(j) = initial.amplitudes.imag();
  }

  Eigen::MatrixXd alphas(config.num_windows, width);
  for (int j = 0; j < width; ++j) {
    const TiltSchedule schedule = sample_tilt_schedule(
        config, ensemble_seed, static_cast<std::uint64_t>(begin + j));
    for (int k = 0; k < config.num_windows; ++k) {
      alphas(k, j) = schedule.alphas[static_cast<std::size_t>(k)];
    }
  }

  Eigen::VectorXd cos_w(n), sin_w(n);
  for (int m = 0; m < n; ++m) {
    const double phase = cache.eigenvalues[m] * window;
    cos_w[m] = std::cos(phase);
    sin_w[m] = std::sin(phase);
  }

  Eigen::MatrixXd ar(n, width), ai(n, width);
  for (int k = 0; k < config.num_windows; ++k) {
    if (cache.diagonal) {
      for (int j = 0; j < width; ++j) {
        double* cr = out_r.col(j).data();
        double* ci = out_i.col(j).data();
        for (int x = 0; x < n; ++x) {
          const double re = cos_w[x] * cr[x] + sin_w[x] * ci[x];
          const double im = cos_w[x] * ci[x] - sin_w[x] * cr[x];
          cr[x] = re;
          ci[x] = im;
        }
      }
    } else {
      ar.noalias() = cache.eigenvectors.transpose() * out_r;
      ai.noalias() = cache.eigenvectors.transpose() * out_i;
      for (int j = 0; j < width; ++j) {
        double* cr = ar.col(j).data();
        double* ci = ai.col(j).data();
        for (int m = 0; m < n; ++m) {
          const double re = cos_w[m] * cr[m] + sin_w[m] * ci[m];
          const double im = cos_w[m] * ci[m] - sin_w[m] * cr[m];
          cr[m] = re;
          ci[m] = im;
        }
      }
      out_r.noalias() = cache.eigenvectors * ar;
      out_i.noalias() = cache.eigenvectors * ai;
    }

    // member-specific kicks, exp(-i alpha T x) built by phase recurrence
    for (int j = 0; j < width; ++j) {
      const double theta = alphas(k, j) * window;
      const double zc = std::cos(theta);
      const double zs = -std::sin(theta);
      double pc = 1.0, ps = 0.0;
      double* cr = out_r.col(j).data();
      double* ci = out_i.col(j).data();
      for (int x = 0; x < n; ++x) {
        const double re = pc * cr[x] - ps * ci[x];
        const double im = pc * ci[x] + ps * cr[x];
        cr[x] = re;
        ci[x] = im;
        const double npc = pc * zc - ps * zs;
        ps = pc * zs + ps * zc;
        pc = npc;
      }
    }
  }
}

struct BlockAccumulator {
  Eigen::VectorXd populations;
  Eigen::MatrixXcd density;  // lower triangle only, via rankUpdate
  bool has_density = false;
};

}  // namespace

EnsembleResult run_ensemble(const HamiltonianOperator& h, const ProtocolConfig& config,
                            const PureState& initial, std::uint64_t master_seed,
                            std::uint64_t disorder_seed, const EnsembleOptions& options) {
  const int n = h.size();
  if (initial.size() != n) throw std::invalid_argument("run_ensemble: size mismatch");
  if (std::abs(initial.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("run_ensemble: initial state is not normalised");
  }

  const int ensemble = config.ensemble_size;
  const int num_blocks = (ensemble + kMemberBlock - 1) / kMemberBlock;
  const SpectralCache cache =
      config.mode == ProtocolMode::digital ? SpectralCache::build(h) : SpectralCache{};

  std::vector<BlockAccumulator> blocks(static_cast<std::size_t>(num_blocks));

  auto run_block = [&](int b) {
    const int begin = b * kMemberBlock;
    const int end = std::min(ensemble, begin + kMemberBlock);
    const int width = end - begin;
    BlockAccumulator& acc = blocks[static_cast<std::size_t>(b)];

    Eigen::MatrixXd states_r, states_i;
    if (config.mode == ProtocolMode::digital) {
      digital_block_states(cache, config, master_seed, begin, end, initial, states_r,
                           states_i);
    } else {
      states_r.resize(n, width);
      states_i.resize(n, width);
      for (int j = 0; j < width; ++j) {
        const int member = begin + j;
        try {
          const TiltSchedule schedule = sample_tilt_schedule(
              config, master_seed, static_cast<std::uint64_t>(member));
          const PureState out =
              run_member_analogue(h, config, schedule, initial, options.propagator);
          states_r.col(j) = out.amplitudes.real();
          states_i.col(j) = out.amplitudes.imag();
        } catch (const std::exception& e) {
          throw std::runtime_error("run_ensemble: member " + std::to_string(member) +
                                   " failed: " + e.what());
        }
      }
    }

    acc.populations = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < width; ++j) {
      acc.populations += states_r.col(j).cwiseAbs2() + states_i.col(j).cwiseAbs2();
    }
    if (options.accumulate_density) {
      Eigen::MatrixXcd psi(n, width);
      psi.real() = states_r;
      psi.imag() = states_i;
      acc.density = Eigen::MatrixXcd::Zero(n, n);
      acc.density.selfadjointView<Eigen::Lower>().rankUpdate(psi, 1.0);
      acc.has_density = true;
    }
  };

  run_indexed_tasks(num_blocks, options.threads, run_block);

  // combine in block order
  Eigen::VectorXd populations = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXcd density_lower;
  if (options.accumulate_density) density_lower = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& acc : blocks) {
    populations += acc.populations;
    if (options.accumulate_density) density_lower += acc.density;
  }
  populations /= static_cast<double>(ensemble);

  std::optional<DensityMatrix> density;
  if (options.accumulate_density) {
    density_lower /= static_cast<double>(ensemble);
    DensityMatrix rho;
    rho.entries = density_lower.selfadjointView<Eigen::Lower>();
    density = std::move(rho);
  }

  return EnsembleResult{std::move(populations), std::move(density),
                        EnsembleMetadata{config, master_seed, disorder_seed}};
}

DensityMatrix digital_average_analytic(const DensityMatrix& rho0,
                                       const Eigen::VectorXd& epsilons,
                                       const ProtocolConfig& config) {
  const int n = rho0.size();
  if (epsilons.size() != n) {
    throw std::invalid_argument("digital_average_analytic: size mismatch");
  }
  const double window = config.window_duration();
  const double sigma = config.sigma();
  const double per_window = 0.5 * sigma * sigma * window * window;

  Eigen::VectorXd attenuation(n);
  for (int d = 0; d < n; ++d) {
    attenuation[d] =
        std::exp(-static_cast<double>(config.num_windows) * per_window * d * d);
  }
  Eigen::VectorXcd site_phase(n);
  for (int x = 0; x < n; ++x) {
    site_phase[x] = std::polar(1.0, -epsilons[x] * config.total_time);
  }

  DensityMatrix out;
  out.entries.resize(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      out.entries(x, y) = rho0.entries(x, y) * site_phase[x] *
                          std::conj(site_phase[y]) * attenuation[std::abs(x - y)];
    }
  }
  return out;
}

}  // namespace dephasim
