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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dephasim/experiments.hpp"

namespace dephasim {

// Configuration problems; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output-path problems; a runtime failure (exit 1), not a usage error.
class OutputDirError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Round-trip-exact decimal formatting used by every CSV emitter.
std::string format_double(double value);

nlohmann::json spec_to_json(const ExperimentSpec& spec);

// Strict parsing: unknown keys anywhere in the document are an error naming
// the offending key. Missing keys fall back to the provided base (defaults
// or a preset).
ExperimentSpec spec_from_json(const nlohmann::json& doc,
                              const ExperimentSpec& base = ExperimentSpec{});

ExperimentSpec load_spec_file(const std::string& path,
                              const ExperimentSpec& base = ExperimentSpec{});

// Scan pair list from the config document ("scan_pairs": [[N, E], ...]).
std::vector<ProtocolParams> scan_pairs_from_json(const nlohmann::json& doc);

// Creates the directory (and parents) and probes it with a temporary file.
// Throws ConfigError when not writable; callers check this before any
// computation starts.
void ensure_writable_dir(const std::string& dir);

// site,p_exact,p_digital,p_analogue (columns for absent engines omitted)
void write_populations_csv(const std::string& path, const ExperimentRecord& record);

// Full reproducibility envelope: spec echo, seeds, engine settings actually
// used, infidelities, decay timing, errors.
void write_infidelities_json(const std::string& path, const ExperimentRecord& record);

// Line-oriented sweep persistence: realization,disorder_seed,i_p_* columns.
class DistributionWriter {
 public:
  DistributionWriter(const std::string& path, bool digital, bool analogue);

  void append(const SweepRow& row);  // flushes after each row

  static std::string header(bool digital, bool analogue);

 private:
  std::ofstream out_;
  bool digital_;
  bool analogue_;
};

// Parses an existing distribution.csv for resume; a missing file yields an
// empty list, a header mismatch throws ConfigError.
std::vector<SweepRow> read_distribution_csv(const std::string& path, bool digital,
                                            bool analogue);

void write_summary_json(const std::string& path, const ExperimentSpec& spec,
                        const SweepResult& result);

void write_scan_csv(const std::string& path, const ScanResult& result);
void write_scan_json(const std::string& path, const ExperimentSpec& spec,
                     const ScanResult& result);

}  // namespace dephasim
