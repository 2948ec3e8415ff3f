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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dephasim/experiments.hpp"
#include "dephasim/io.hpp"

namespace {

using namespace dephasim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string preset;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> disorder_seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> engines;
  std::optional<int> realizations;
  bool density = false;
  bool populations_only = false;
  bool verbose = false;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts, bool with_realizations) {
  cmd->add_option("--preset", opts.preset, "Built-in experiment preset")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--config", opts.config_path, "JSON experiment configuration");
  cmd->add_option("--seed", opts.seed, "Master seed override");
  cmd->add_option("--disorder-seed", opts.disorder_seed, "Disorder seed override");
  cmd->add_option("--threads", opts.threads,
                  "Worker threads (default: DEPHASIM_THREADS or hardware)");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--engines", opts.engines,
                  "Comma-separated engine selection from exact,digital,analogue");
  if (with_realizations) {
    cmd->add_option("--realizations", opts.realizations, "Number of disorder realizations");
  }
  auto* density = cmd->add_flag("--density", opts.density,
                                "Accumulate full density matrices (enables I_s)");
  cmd->add_flag("--populations-only", opts.populations_only,
                "Skip density accumulation (I_p only)")
      ->excludes(density);
  cmd->add_flag("-v,--verbose", opts.verbose, "Progress output on stderr");
}

int default_threads() {
  if (const char* env = std::getenv("DEPHASIM_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (...) {
      throw ConfigError("DEPHASIM_THREADS is not an integer: '" + std::string(env) + "'");
    }
  }
  return 0;  // hardware
}

// Preset/config resolution plus flag overrides. Throws ConfigError on any
// validation problem (exit 2).
ExperimentSpec resolve_spec(const CommonOptions& opts) {
  if (!opts.preset.empty() && !opts.config_path.empty()) {
    throw ConfigError("--preset and --config are mutually exclusive");
  }
  if (opts.preset.empty() && opts.config_path.empty()) {
    throw ConfigError("one of --preset or --config is required");
  }

  ExperimentSpec spec =
      opts.preset.empty() ? load_spec_file(opts.config_path) : make_preset(opts.preset);

  // precedence: --threads flag > config value > DEPHASIM_THREADS > hardware
  if (spec.threads == 0) spec.threads = default_threads();
  if (opts.seed) spec.master_seed = *opts.seed;
  if (opts.disorder_seed) spec.disorder_seed = *opts.disorder_seed;
  if (opts.threads) spec.threads = *opts.threads;
  if (opts.out_dir) spec.output_dir = *opts.out_dir;
  if (opts.realizations) spec.realizations = *opts.realizations;
  if (opts.density) spec.density = true;
  if (opts.populations_only) spec.density = false;

  if (opts.engines) {
    std::set<std::string> selected;
    std::string token;
    std::istringstream stream(*opts.engines);
    while (std::getline(stream, token, ',')) {
      if (token != "exact" && token != "digital" && token != "analogue") {
        throw ConfigError("unknown engine '" + token + "' in --engines");
      }
      selected.insert(token);
    }
    if (selected.empty()) throw ConfigError("--engines selected no engine");
    spec.exact_enabled = selected.count("exact") > 0;
    if (!selected.count("digital")) spec.digital.reset();
    if (!selected.count("analogue")) spec.analogue.reset();
    if (selected.count("digital") && !spec.digital) {
      throw ConfigError("--engines requests digital but the spec configures none");
    }
    if (selected.count("analogue") && !spec.analogue) {
      throw ConfigError("--engines requests analogue but the spec configures none");
    }
  }

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

namespace fs = std::filesystem;

int cmd_simulate(const CommonOptions& opts) {
  const ExperimentSpec spec = resolve_spec(opts);
  ensure_writable_dir(spec.output_dir);  // fail before any computation

  if (opts.verbose) {
    std::cerr << "simulate: " << spec.name << " L=" << spec.lattice.num_sites
              << " gamma=" << spec.gamma << " t=" << spec.total_time << "\n";
  }
  const ExperimentRecord record = run_single_realization(spec);

  write_populations_csv((fs::path(spec.output_dir) / "populations.csv").string(), record);
  write_infidelities_json((fs::path(spec.output_dir) / "infidelities.json").string(),
                          record);

  if (!record.engine_errors.empty()) {
    for (const auto& [engine, message] : record.engine_errors) {
      std::cerr << "engine '" << engine << "' failed: " << message << "\n";
    }
    return kExitRuntime;
  }
  if (opts.verbose) {
    if (record.digital_vs_exact) {
      std::cerr << "digital  I_p = " << record.digital_vs_exact->population_infidelity
                << "\n";
    }
    if (record.analogue_vs_exact) {
      std::cerr << "analogue I_p = " << record.analogue_vs_exact->population_infidelity
                << "\n";
    }
  }
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const ExperimentSpec spec = resolve_spec(opts);
  ensure_writable_dir(spec.output_dir);

  const bool digital = spec.digital.has_value();
  const bool analogue = spec.analogue.has_value();
  const std::string dist_path = (fs::path(spec.output_dir) / "distribution.csv").string();
  const std::string fail_path = (fs::path(spec.output_dir) / "failures.log").string();

  const std::vector<SweepRow> resumed = read_distribution_csv(dist_path, digital, analogue);
  std::set<int> resumed_indices;
  for (const SweepRow& row : resumed) resumed_indices.insert(row.realization);
  if (opts.verbose && !resumed.empty()) {
    std::cerr << "resuming: " << resumed.size() << " realizations already on disk\n";
  }

  DistributionWriter writer(dist_path, digital, analogue);
  std::ofstream failures(fail_path, std::ios::binary | std::ios::app);
  int done = static_cast<int>(resumed.size());

  auto progress = [&](const SweepRow& row) {
    if (resumed_indices.count(row.realization)) return;  // already on disk
    if (row.error.empty()) {
      writer.append(row);
    } else {
      failures << row.realization << "," << row.disorder_seed << "," << row.error << "\n"
               << std::flush;
    }
    ++done;
    if (opts.verbose) {
      std::cerr << "realization " << row.realization << " done (" << done << "/"
                << spec.realizations << ")\n";
    }
  };

  const SweepResult result = run_disorder_sweep(spec, resumed, progress);
  write_summary_json((fs::path(spec.output_dir) / "summary.json").string(), spec, result);

  if (result.failed > 0) {
    std::cerr << result.failed << " realization(s) failed; see " << fail_path << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_scan(const CommonOptions& opts, const std::string& pairs_flag) {
  ExperimentSpec spec = resolve_spec(opts);
  ensure_writable_dir(spec.output_dir);

  std::vector<ProtocolParams> pairs;
  if (!pairs_flag.empty()) {
    std::istringstream stream(pairs_flag);
    std::string token;
    while (std::getline(stream, token, ',')) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("--pairs entries must look like N:E, got '" + token + "'");
      }
      try {
        pairs.push_back(ProtocolParams{std::stoi(token.substr(0, colon)),
                                       std::stoi(token.substr(colon + 1))});
      } catch (const std::exception&) {
        throw ConfigError("--pairs entry is not numeric: '" + token + "'");
      }
    }
  } else if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    nlohmann::json doc;
    in >> doc;
    pairs = scan_pairs_from_json(doc);
  }
  if (pairs.empty()) {
    throw ConfigError("scan needs --pairs N:E[,N:E...] or scan_pairs in the config");
  }

  const ScanResult result = run_convergence_scan(spec, pairs);
  write_scan_csv((fs::path(spec.output_dir) / "scan.csv").string(), result);
  write_scan_json((fs::path(spec.output_dir) / "scan_summary.json").string(), spec, result);
  return kExitOk;
}

int cmd_presets(bool as_json) {
  if (as_json) {
    nlohmann::json doc = nlohmann::json::object();
    for (const std::string& name : preset_names()) {
      doc[name] = spec_to_json(make_preset(name));
    }
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "name    L    gamma    t      digital(N,E)  analogue(N,E)  mode\n";
  for (const std::string& name : preset_names()) {
    const ExperimentSpec spec = make_preset(name);
    std::cout << name << "  " << spec.lattice.num_sites << "  " << spec.gamma << "  "
              << spec.total_time << "  ";
    if (spec.digital) {
      std::cout << "(" << spec.digital->num_windows << "," << spec.digital->ensemble_size
                << ")  ";
    }
    if (spec.analogue) {
      std::cout << "(" << spec.analogue->num_windows << ","
                << spec.analogue->ensemble_size << ")  ";
    }
    std::cout << (spec.realizations > 1 ? "sweep" : "single") << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dephasim: dissipative Anderson model simulator"};
  app.require_subcommand(1);

  CommonOptions simulate_opts, sweep_opts, scan_opts;
  std::string pairs_flag;
  bool presets_json = false;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "One disorder realization, all selected engines");
  add_common_options(simulate, simulate_opts, /*with_realizations=*/false);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Disorder ensemble: per-realization infidelities and distribution");
  add_common_options(sweep, sweep_opts, /*with_realizations=*/true);

  CLI::App* scan = app.add_subcommand(
      "scan", "Mean infidelity per (N, E) pair over a fixed realization set");
  add_common_options(scan, scan_opts, /*with_realizations=*/true);
  scan->add_option("--pairs", pairs_flag, "Pairs as N:E[,N:E...]");

  CLI::App* presets = app.add_subcommand("presets", "List built-in experiment presets");
  presets->add_flag("--json", presets_json, "Dump full preset specs as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(simulate_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (scan->parsed()) return cmd_scan(scan_opts, pairs_flag);
    if (presets->parsed()) return cmd_presets(presets_json);
  } catch (const OutputDirError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
