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

#include "dephasim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "dephasim/parallel.hpp"
#include "dephasim/rng.hpp"

namespace dephasim {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<double> sample_grid(double total_time, double interval) {
  if (interval <= 0.0) interval = total_time / 128.0;
  std::vector<double> grid;
  const long count = std::max<long>(1, static_cast<long>(std::ceil(total_time / interval - 1e-9)));
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (long k = 0; k <= count; ++k) {
    grid.push_back(total_time * static_cast<double>(k) / static_cast<double>(count));
  }
  return grid;
}

ExactEngineOutput run_exact_engine(const HamiltonianOperator& h, double gamma,
                                   const DensityMatrix& rho0, double total_time,
                                   const LindbladSettings& settings,
                                   double sample_interval, bool keep_density) {
  const double start = now_seconds();
  const std::vector<double> grid = sample_grid(total_time, sample_interval);
  LindbladTrajectory trajectory = evolve_lindblad(h, DephasingSpec(gamma), rho0,
                                                  total_time, settings, grid,
                                                  /*keep_states=*/false);
  ExactEngineOutput out;
  out.populations = trajectory.final_state.populations();
  if (keep_density) out.density = trajectory.final_state;
  out.sample_times = std::move(trajectory.times);
  out.sample_populations = std::move(trajectory.populations);
  out.step_used = trajectory.step_used;
  out.refinements = trajectory.refinements;
  out.wall_seconds = now_seconds() - start;
  return out;
}

ProtocolEngineOutput run_protocol_engine(const HamiltonianOperator& h,
                                         ProtocolMode mode, const ProtocolParams& params,
                                         double total_time, double gamma,
                                         const PureState& initial,
                                         std::uint64_t ensemble_seed,
                                         std::uint64_t disorder_seed,
                                         const ExperimentSpec& spec) {
  const double start = now_seconds();
  const ProtocolConfig config(mode, params.num_windows, params.ensemble_size,
                              total_time, gamma);
  EnsembleOptions options;
  options.accumulate_density = spec.density;
  options.threads = spec.threads;
  options.propagator = spec.propagator;
  EnsembleResult ensemble =
      run_ensemble(h, config, initial, ensemble_seed, disorder_seed, options);

  ProtocolEngineOutput out;
  out.populations = std::move(ensemble.averaged_populations);
  out.density = std::move(ensemble.averaged_density);
  out.params = params;
  out.window = config.window_duration();
  out.sigma = config.sigma();
  out.ensemble_seed = ensemble_seed;
  out.wall_seconds = now_seconds() - start;
  return out;
}

InfidelityReport cross_report(const ExactEngineOutput& exact,
                              const ProtocolEngineOutput& protocol) {
  InfidelityReport report;
  report.population_infidelity =
      population_infidelity(exact.populations, protocol.populations);
  if (exact.density && protocol.density) {
    report.state_infidelity = state_infidelity(*exact.density, *protocol.density);
  }
  return report;
}

ExperimentRecord run_realization_impl(const ExperimentSpec& spec,
                                      std::uint64_t disorder_seed_value,
                                      std::uint64_t realization_index) {
  ExperimentRecord record;
  record.spec = spec;
  record.disorder_seed_used = disorder_seed_value;

  const DisorderRealization disorder = sample_disorder(spec.lattice, disorder_seed_value);
  const HamiltonianOperator h = build_hamiltonian(spec.lattice, disorder);
  const GroundStateResult ground = ground_state(h);
  record.ground_energy = ground.energy;
  record.degenerate_ground = ground.degenerate;
  ground.state.populations().maxCoeff(&record.peak_site);

  const DensityMatrix rho0 = DensityMatrix::from_pure(ground.state);

  // Resolve the stop rule. The quarter-decay rule locates the crossing with
  // the exact engine, then every engine runs to that time.
  double total_time = spec.total_time;
  if (spec.stop.kind == StopRule::Kind::quarter_decay) {
    const ExactEngineOutput probe =
        run_exact_engine(h, spec.gamma, rho0, spec.stop.max_time, spec.lindblad,
                         spec.stop.sample_interval, /*keep_density=*/false);
    const DecayTiming timing =
        quarter_decay_time(probe.sample_times, probe.sample_populations);
    if (timing.quarter_decay_time) {
      total_time = *timing.quarter_decay_time;
    } else {
      total_time = spec.stop.max_time;
      record.engine_errors["stop_rule"] =
          "quarter decay not reached by max_time; final ratio " +
          std::to_string(timing.final_ratio);
    }
  }
  record.total_time_used = total_time;

  if (spec.exact_enabled) {
    try {
      record.exact = run_exact_engine(h, spec.gamma, rho0, total_time, spec.lindblad,
                                      spec.stop.sample_interval, spec.density);
      record.decay = quarter_decay_time(record.exact->sample_times,
                                        record.exact->sample_populations);
    } catch (const std::exception& e) {
      record.engine_errors["exact"] = e.what();
      record.exact.reset();
    }
  }

  if (spec.digital) {
    try {
      const std::uint64_t seed =
          derive_seed(spec.master_seed, seed_salt::digital, realization_index);
      record.digital =
          run_protocol_engine(h, ProtocolMode::digital, *spec.digital, total_time,
                              spec.gamma, ground.state, seed, disorder_seed_value, spec);
    } catch (const std::exception& e) {
      record.engine_errors["digital"] = e.what();
      record.digital.reset();
    }
  }

  if (spec.analogue) {
    try {
      const std::uint64_t seed =
          derive_seed(spec.master_seed, seed_salt::analogue, realization_index);
      record.analogue =
          run_protocol_engine(h, ProtocolMode::analogue, *spec.analogue, total_time,
                              spec.gamma, ground.state, seed, disorder_seed_value, spec);
    } catch (const std::exception& e) {
      record.engine_errors["analogue"] = e.what();
      record.analogue.reset();
    }
  }

  if (record.exact && record.digital) {
    record.digital_vs_exact = cross_report(*record.exact, *record.digital);
  }
  if (record.exact && record.analogue) {
    record.analogue_vs_exact = cross_report(*record.exact, *record.analogue);
  }
  return record;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (!exact_enabled && !digital && !analogue) {
    throw std::invalid_argument("ExperimentSpec: no engine selected");
  }
  if (!(gamma >= 0.0)) throw std::invalid_argument("ExperimentSpec: gamma must be >= 0");
  if (realizations < 1) throw std::invalid_argument("ExperimentSpec: realizations must be >= 1");
  if (threads < 0) throw std::invalid_argument("ExperimentSpec: threads must be >= 0");
  if (stop.kind == StopRule::Kind::fixed_time) {
    if (!(total_time > 0.0)) {
      throw std::invalid_argument("ExperimentSpec: total_time must be > 0");
    }
  } else {
    if (!(stop.max_time > 0.0)) {
      throw std::invalid_argument("ExperimentSpec: quarter_decay stop rule needs max_time > 0");
    }
    if (!exact_enabled) {
      throw std::invalid_argument("ExperimentSpec: quarter_decay stop rule needs the exact engine");
    }
  }
  for (const auto& params : {digital, analogue}) {
    if (params && (params->num_windows < 1 || params->ensemble_size < 1)) {
      throw std::invalid_argument("ExperimentSpec: protocol N and E must be >= 1");
    }
  }
  if (!(lindblad.base_step > 0.0)) {
    throw std::invalid_argument("ExperimentSpec: lindblad base_step must be > 0");
  }
}

ExperimentRecord run_single_realization(const ExperimentSpec& spec) {
  spec.validate();
  const std::uint64_t seed = spec.disorder_seed
                                 ? *spec.disorder_seed
                                 : derive_seed(spec.master_seed, seed_salt::disorder, 0);
  return run_realization_impl(spec, seed, 0);
}

SweepResult run_disorder_sweep(const ExperimentSpec& spec,
                               const std::vector<SweepRow>& resume_rows,
                               const SweepProgress& progress) {
  spec.validate();
  const int count = spec.realizations;

  std::vector<std::optional<SweepRow>> slots(static_cast<std::size_t>(count));
  for (const SweepRow& row : resume_rows) {
    if (row.realization >= 0 && row.realization < count) {
      slots[static_cast<std::size_t>(row.realization)] = row;
    }
  }

  // Per-realization spec: engines run single-threaded inside a worker; the
  // sweep parallelises across realizations.
  ExperimentSpec worker_spec = spec;
  worker_spec.threads = 1;

  std::mutex emit_mutex;
  int emitted = 0;
  auto flush_ready = [&]() {
    while (emitted < count && slots[static_cast<std::size_t>(emitted)]) {
      if (progress) progress(*slots[static_cast<std::size_t>(emitted)]);
      ++emitted;
    }
  };

  auto task = [&](int r) {
    if (slots[static_cast<std::size_t>(r)]) {
      std::lock_guard<std::mutex> lock(emit_mutex);
      flush_ready();
      return;  // resumed
    }
    SweepRow row;
    row.realization = r;
    row.disorder_seed =
        derive_seed(spec.master_seed, seed_salt::disorder, static_cast<std::uint64_t>(r));
    try {
      const ExperimentRecord record = run_realization_impl(
          worker_spec, row.disorder_seed, static_cast<std::uint64_t>(r));
      if (!record.engine_errors.empty()) {
        std::string joined;
        for (const auto& [engine, message] : record.engine_errors) {
          joined += (joined.empty() ? "" : "; ") + engine + ": " + message;
        }
        row.error = joined;
      } else {
        if (record.digital_vs_exact) {
          row.ip_digital = record.digital_vs_exact->population_infidelity;
        }
        if (record.analogue_vs_exact) {
          row.ip_analogue = record.analogue_vs_exact->population_infidelity;
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    std::lock_guard<std::mutex> lock(emit_mutex);
    slots[static_cast<std::size_t>(r)] = std::move(row);
    flush_ready();
  };

  run_indexed_tasks(count, spec.threads, task);

  SweepResult result;
  result.rows.reserve(static_cast<std::size_t>(count));
  std::vector<double> digital_values, analogue_values;
  for (auto& slot : slots) {
    SweepRow& row = *slot;
    if (!row.error.empty()) {
      ++result.failed;
    } else {
      if (row.ip_digital) digital_values.push_back(*row.ip_digital);
      if (row.ip_analogue) analogue_values.push_back(*row.ip_analogue);
    }
    result.rows.push_back(std::move(row));
  }
  if (!digital_values.empty()) {
    result.digital_summary = infidelity_distribution(digital_values);
  }
  if (!analogue_values.empty()) {
    result.analogue_summary = infidelity_distribution(analogue_values);
  }
  return result;
}

ScanResult run_convergence_scan(const ExperimentSpec& spec,
                                const std::vector<ProtocolParams>& pairs) {
  spec.validate();
  if (pairs.empty()) throw std::invalid_argument("run_convergence_scan: empty pair list");
  if (!spec.exact_enabled) {
    throw std::invalid_argument("run_convergence_scan: needs the exact engine");
  }
  const int count = spec.realizations;

  struct PerRealization {
    std::vector<double> ip_digital;   // per pair
    std::vector<double> ip_analogue;  // per pair
  };
  std::vector<PerRealization> table(static_cast<std::size_t>(count));

  auto task = [&](int r) {
    const std::uint64_t disorder_seed =
        derive_seed(spec.master_seed, seed_salt::disorder, static_cast<std::uint64_t>(r));
    const DisorderRealization disorder = sample_disorder(spec.lattice, disorder_seed);
    const HamiltonianOperator h = build_hamiltonian(spec.lattice, disorder);
    const GroundStateResult ground = ground_state(h);
    const DensityMatrix rho0 = DensityMatrix::from_pure(ground.state);

    ExperimentSpec worker_spec = spec;
    worker_spec.threads = 1;
    const ExactEngineOutput exact =
        run_exact_engine(h, spec.gamma, rho0, spec.total_time, spec.lindblad,
                         spec.stop.sample_interval, /*keep_density=*/false);

    PerRealization& out = table[static_cast<std::size_t>(r)];
    for (const ProtocolParams& params : pairs) {
      if (spec.digital) {
        const std::uint64_t seed = derive_seed(spec.master_seed, seed_salt::digital,
                                               static_cast<std::uint64_t>(r));
        const ProtocolEngineOutput engine = run_protocol_engine(
            h, ProtocolMode::digital, params, spec.total_time, spec.gamma,
            ground.state, seed, disorder_seed, worker_spec);
        out.ip_digital.push_back(
            population_infidelity(exact.populations, engine.populations));
      }
      if (spec.analogue) {
        const std::uint64_t seed = derive_seed(spec.master_seed, seed_salt::analogue,
                                               static_cast<std::uint64_t>(r));
        const ProtocolEngineOutput engine = run_protocol_engine(
            h, ProtocolMode::analogue, params, spec.total_time, spec.gamma,
            ground.state, seed, disorder_seed, worker_spec);
        out.ip_analogue.push_back(
            population_infidelity(exact.populations, engine.populations));
      }
    }
  };

  run_indexed_tasks(count, spec.threads, task);

  ScanResult result;
  auto summarise = [&](ProtocolMode mode, std::size_t pair_index,
                       const ProtocolParams& params) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& row : table) {
      const auto& values =
          mode == ProtocolMode::digital ? row.ip_digital : row.ip_analogue;
      sum += values[pair_index];
      sum_sq += values[pair_index] * values[pair_index];
    }
    const double mean = sum / count;
    const double variance =
        count > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)) : 0.0;
    ScanPoint point;
    point.mode = mode;
    point.params = params;
    point.mean_ip = mean;
    point.stderr_ip = std::sqrt(variance / count);
    point.realizations = count;
    result.points.push_back(point);
    return mean;
  };

  double prev_digital = -1.0, prev_analogue = -1.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (spec.digital) {
      const double mean = summarise(ProtocolMode::digital, p, pairs[p]);
      if (prev_digital >= 0.0 && mean > prev_digital) result.digital_monotone = false;
      prev_digital = mean;
    }
    if (spec.analogue) {
      const double mean = summarise(ProtocolMode::analogue, p, pairs[p]);
      if (prev_analogue >= 0.0 && mean > prev_analogue) result.analogue_monotone = false;
      prev_analogue = mean;
    }
  }
  return result;
}

std::vector<std::string> preset_names() {
  return {"fig2a", "fig2b", "fig2c", "fig2d", "fig3"};
}

ExperimentSpec make_preset(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.lattice = LatticeSpec(400, 1.0, 0.2);
  spec.master_seed = 1;
  spec.density = true;

  if (name == "fig2a" || name == "fig2b" || name == "fig2c") {
    spec.gamma = 1e-4;
    spec.total_time = 653.0;
    spec.disorder_seed = 3;
    spec.lindblad.base_step = 1.6;
    if (name == "fig2a") {
      spec.digital = ProtocolParams{80, 400};
      spec.analogue = ProtocolParams{100, 500};
    } else if (name == "fig2b") {
      spec.digital = ProtocolParams{20, 100};
      spec.analogue = ProtocolParams{30, 300};
    } else {
      spec.digital = ProtocolParams{5, 25};
      spec.analogue = ProtocolParams{15, 150};
    }
  } else if (name == "fig2d") {
    spec.gamma = 1e-3;
    spec.total_time = 120.0;
    spec.disorder_seed = 3;
    spec.lindblad.base_step = 0.8;
    spec.digital = ProtocolParams{20, 100};
    spec.analogue = ProtocolParams{30, 300};
  } else if (name == "fig3") {
    spec.gamma = 1e-4;
    spec.total_time = 653.0;
    spec.lindblad.base_step = 1.6;
    spec.digital = ProtocolParams{80, 400};
    spec.analogue = ProtocolParams{100, 500};
    spec.realizations = 10000;
    spec.density = false;  // population infidelities only
  } else {
    throw std::invalid_argument("make_preset: unknown preset '" + name + "'");
  }
  return spec;
}

}  // namespace dephasim
