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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dephasim/metrics.hpp"
#include "dephasim/protocols.hpp"

namespace dephasim {

struct ProtocolParams {
  int num_windows = 1;
  int ensemble_size = 1;
};

struct StopRule {
  enum class Kind { fixed_time, quarter_decay };
  Kind kind = Kind::fixed_time;
  // quarter_decay only: search horizon for the crossing and the exact-engine
  // sample spacing used to locate it (0 = auto).
  double max_time = 0.0;
  double sample_interval = 0.0;
};

// Complete description of one study: lattice, dephasing, engine selection,
// seeds, and execution knobs. Everything needed to reproduce a run.
struct ExperimentSpec {
  std::string name = "custom";
  LatticeSpec lattice{2, 1.0, 0.0};
  double gamma = 0.0;
  double total_time = 0.0;
  StopRule stop{};
  bool exact_enabled = true;
  std::optional<ProtocolParams> digital;
  std::optional<ProtocolParams> analogue;
  std::uint64_t master_seed = 1;
  std::optional<std::uint64_t> disorder_seed;  // fixed seed; sweeps derive per realization
  int realizations = 1;
  bool density = true;   // keep full density matrices (needed for I_s)
  int threads = 0;       // 0 = hardware; never affects results
  std::string output_dir = "results";
  LindbladSettings lindblad{};
  PropagatorSettings propagator = analogue_defaults();

  void validate() const;
};

struct ExactEngineOutput {
  Eigen::VectorXd populations;
  std::optional<DensityMatrix> density;  // final state, density mode only
  std::vector<double> sample_times;
  std::vector<Eigen::VectorXd> sample_populations;
  double step_used = 0.0;
  int refinements = 0;
  double wall_seconds = 0.0;
};

struct ProtocolEngineOutput {
  Eigen::VectorXd populations;
  std::optional<DensityMatrix> density;
  ProtocolParams params{};
  double window = 0.0;
  double sigma = 0.0;
  std::uint64_t ensemble_seed = 0;
  double wall_seconds = 0.0;
};

struct ExperimentRecord {
  ExperimentSpec spec;
  std::uint64_t disorder_seed_used = 0;
  double ground_energy = 0.0;
  int peak_site = 0;
  bool degenerate_ground = false;
  double total_time_used = 0.0;
  std::optional<ExactEngineOutput> exact;
  std::optional<ProtocolEngineOutput> digital;
  std::optional<ProtocolEngineOutput> analogue;
  std::optional<InfidelityReport> digital_vs_exact;
  std::optional<InfidelityReport> analogue_vs_exact;
  std::optional<DecayTiming> decay;
  // engine name -> error message; engines that failed are absent above
  std::map<std::string, std::string> engine_errors;
};

// Runs every selected engine from the same disorder realization and ground
// state, then cross-reports infidelities against the exact engine. Engine
// failures are recorded; the remaining engines still run.
ExperimentRecord run_single_realization(const ExperimentSpec& spec);

struct SweepRow {
  int realization = 0;
  std::uint64_t disorder_seed = 0;
  std::optional<double> ip_digital;
  std::optional<double> ip_analogue;
  std::string error;  // nonempty when this realization failed
};

struct SweepResult {
  std::vector<SweepRow> rows;  // one per realization, index order
  int failed = 0;
  std::optional<DistributionSummary> digital_summary;
  std::optional<DistributionSummary> analogue_summary;
};

// Called with completed rows in realization order (suitable for incremental
// persistence); invoked from the coordinating thread only.
using SweepProgress = std::function<void(const SweepRow&)>;

// R independent disorder realizations with per-realization seeds derived from
// the master seed. Rows found in resume_rows are reused, not recomputed, so
// interrupted sweeps can resume and converge to the same summary.
SweepResult run_disorder_sweep(const ExperimentSpec& spec,
                               const std::vector<SweepRow>& resume_rows = {},
                               const SweepProgress& progress = nullptr);

struct ScanPoint {
  ProtocolMode mode = ProtocolMode::digital;
  ProtocolParams params{};
  double mean_ip = 0.0;
  double stderr_ip = 0.0;
  int realizations = 0;
};

struct ScanResult {
  std::vector<ScanPoint> points;  // per pair, digital then analogue
  bool digital_monotone = true;   // mean I_p non-increasing along the pair list
  bool analogue_monotone = true;
};

// Mean and standard error of I_p per (N, E) pair over a fixed realization
// set. Seeds depend only on (master, realization), so a duplicated pair
// reproduces identical statistics and growing E extends the same stream.
ScanResult run_convergence_scan(const ExperimentSpec& spec,
                                const std::vector<ProtocolParams>& pairs);

std::vector<std::string> preset_names();
ExperimentSpec make_preset(const std::string& name);

}  // namespace dephasim
