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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dephasim/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string command = std::string(DEPHASIM_CLI_PATH) + " " + args + " 2>&1";
  if (!env_prefix.empty()) command = "env " + env_prefix + " " + command;
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
    result.output.append(buffer, n);
    if (n < sizeof(buffer)) break;
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("dephasim_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string tiny_config_json(const std::string& out_dir, bool include_threads = true) {
  return R"({
  "name": "cli-tiny",
  "lattice": {"num_sites": 16, "tunnelling_rate": 1.0, "disorder_amplitude": 0.2},
  "gamma": 0.001,
  "total_time": 5.0,
  "engines": {
    "exact": {"enabled": true, "base_step": 0.2},
    "digital": {"num_windows": 4, "ensemble_size": 16},
    "analogue": {"num_windows": 2, "ensemble_size": 8}
  },
  "master_seed": 3,
  "disorder_seed": 9,
  "realizations": 3,
)" + std::string(include_threads ? R"(  "threads": 1,
)"
                                 : "") +
         R"(  "output_dir": ")" + out_dir + R"("
})";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("io: doubles survive the CSV round trip exactly") {
  for (double v : {0.1, 1.0 / 3.0, 653.0, 4.9499795040335495e-3, 1e-300}) {
    CHECK(std::stod(dephasim::format_double(v)) == v);
    CHECK(std::stod(dephasim::format_double(-v)) == -v);
  }
}

TEST_CASE("io: spec json round trip") {
  using dephasim::make_preset;
  for (const std::string& name : dephasim::preset_names()) {
    const dephasim::ExperimentSpec spec = make_preset(name);
    const nlohmann::json doc = dephasim::spec_to_json(spec);
    const dephasim::ExperimentSpec back = dephasim::spec_from_json(doc);
    CHECK(back.name == spec.name);
    CHECK(back.lattice.num_sites == spec.lattice.num_sites);
    CHECK(back.gamma == spec.gamma);
    CHECK(back.total_time == spec.total_time);
    CHECK(back.master_seed == spec.master_seed);
    CHECK(back.disorder_seed == spec.disorder_seed);
    CHECK(back.realizations == spec.realizations);
    CHECK(back.density == spec.density);
    CHECK(back.digital.has_value() == spec.digital.has_value());
    if (spec.digital) {
      CHECK(back.digital->num_windows == spec.digital->num_windows);
      CHECK(back.digital->ensemble_size == spec.digital->ensemble_size);
    }
    CHECK(back.lindblad.base_step == spec.lindblad.base_step);
    CHECK(back.propagator.krylov_tolerance == spec.propagator.krylov_tolerance);
  }
}

TEST_CASE("cli: presets listing") {
  const CliResult result = run_cli("presets");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("fig2a") != std::string::npos);
  CHECK(result.output.find("fig3") != std::string::npos);

  const CliResult json_result = run_cli("presets --json");
  CHECK(json_result.exit_code == 0);
  const auto doc = nlohmann::json::parse(json_result.output);
  CHECK(doc.at("fig2a").at("total_time") == 653.0);
  CHECK(doc.at("fig2d").at("gamma") == 1e-3);
}

TEST_CASE("cli: usage errors exit 2") {
  SUBCASE("missing config file names the path") {
    const CliResult result = run_cli("simulate --config /nope/missing.json");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("/nope/missing.json") != std::string::npos);
  }

  SUBCASE("no preset or config") {
    const CliResult result = run_cli("simulate");
    CHECK(result.exit_code == 2);
  }

  SUBCASE("unknown flag") {
    const CliResult result = run_cli("simulate --preset fig2a --frobnicate");
    CHECK(result.exit_code == 2);
  }

  SUBCASE("unknown key in config is an error naming the key") {
    const fs::path dir = fresh_dir("badkey");
    const fs::path config = dir / "bad.json";
    std::ofstream(config) << R"({"lattice": {"num_sites": 8}, "total_tim": 5.0})";
    const CliResult result = run_cli("simulate --config " + config.string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("total_tim") != std::string::npos);
  }

  SUBCASE("unknown engine in --engines") {
    const CliResult result = run_cli("simulate --preset fig2a --engines exact,warp");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("warp") != std::string::npos);
  }
}

TEST_CASE("cli: unwritable output directory exits 1 before computing") {
  const CliResult result =
      run_cli("simulate --preset fig2a --out /proc/definitely/not/writable");
  CHECK(result.exit_code == 1);
}

TEST_CASE("cli: DEPHASIM_THREADS environment default") {
  SUBCASE("garbage value is a usage error when consulted") {
    // the fig2a preset leaves threads unset, so the environment is consulted
    const CliResult result =
        run_cli("simulate --preset fig2a --out /tmp/envgarbage", "DEPHASIM_THREADS=lots");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("DEPHASIM_THREADS") != std::string::npos);
  }

  SUBCASE("valid value runs and matches the flag route byte for byte") {
    const fs::path dir = fresh_dir("envthreads");
    const fs::path config = dir / "config.json";
    std::ofstream(config) << tiny_config_json((dir / "out").string(),
                                              /*include_threads=*/false);
    const CliResult via_env =
        run_cli("simulate --config " + config.string(), "DEPHASIM_THREADS=2");
    CHECK(via_env.exit_code == 0);
    const std::string env_populations = slurp(dir / "out" / "populations.csv");

    const fs::path dir2 = fresh_dir("envthreads2");
    const fs::path config2 = dir2 / "config.json";
    std::ofstream(config2) << tiny_config_json((dir2 / "out").string(),
                                               /*include_threads=*/false);
    const CliResult via_flag =
        run_cli("simulate --config " + config2.string() + " --threads 2");
    CHECK(via_flag.exit_code == 0);
    CHECK(slurp(dir2 / "out" / "populations.csv") == env_populations);
  }
}

TEST_CASE("cli: simulate writes schema-stable outputs") {
  const fs::path dir = fresh_dir("simulate");
  const fs::path config = dir / "config.json";
  std::ofstream(config) << tiny_config_json((dir / "out").string());

  const CliResult result = run_cli("simulate --config " + config.string());
  CHECK(result.exit_code == 0);

  const std::string populations = slurp(dir / "out" / "populations.csv");
  std::istringstream lines(populations);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "site,p_exact,p_digital,p_analogue");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 16);

  const auto infidelities = nlohmann::json::parse(slurp(dir / "out" / "infidelities.json"));
  CHECK(infidelities.at("infidelities").at("digital").contains("i_p"));
  CHECK(infidelities.at("infidelities").at("digital").contains("i_s"));
  CHECK(infidelities.at("seeds").at("disorder_seed") == 9);
  CHECK(infidelities.at("engines").at("exact").contains("step_used"));
  CHECK(infidelities.at("engines").at("digital").at("num_windows") == 4);

  SUBCASE("reruns and thread counts give identical bytes") {
    const fs::path dir2 = fresh_dir("simulate2");
    const fs::path config2 = dir2 / "config.json";
    std::ofstream(config2) << tiny_config_json((dir2 / "out").string());
    const CliResult rerun = run_cli("simulate --config " + config2.string() + " --threads 8");
    CHECK(rerun.exit_code == 0);
    CHECK(slurp(dir2 / "out" / "populations.csv") == populations);
  }

  SUBCASE("engine filter drops columns") {
    const fs::path dir3 = fresh_dir("simulate3");
    const fs::path config3 = dir3 / "config.json";
    std::ofstream(config3) << tiny_config_json((dir3 / "out").string());
    const CliResult filtered =
        run_cli("simulate --config " + config3.string() + " --engines exact,digital");
    CHECK(filtered.exit_code == 0);
    const std::string filtered_populations = slurp(dir3 / "out" / "populations.csv");
    CHECK(filtered_populations.find("p_analogue") == std::string::npos);
  }
}

TEST_CASE("cli: sweep writes distribution, resumes, and stays deterministic") {
  const fs::path dir = fresh_dir("sweep");
  const fs::path config = dir / "config.json";
  std::ofstream(config) << tiny_config_json((dir / "out").string());

  const CliResult result = run_cli("sweep --config " + config.string());
  CHECK(result.exit_code == 0);

  const fs::path dist_path = dir / "out" / "distribution.csv";
  const std::string distribution = slurp(dist_path);
  std::istringstream lines(distribution);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "realization,disorder_seed,i_p_digital,i_p_analogue");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("realizations") == 3);
  CHECK(summary.at("failed") == 0);
  CHECK(summary.at("engines").at("digital").contains("median"));
  CHECK(summary.at("engines").at("digital").at("histogram").contains("edges"));

  SUBCASE("interrupted sweep resumes to the same outputs") {
    // keep only the header + first row, then rerun
    std::istringstream full(distribution);
    std::string truncated, line;
    std::getline(full, line);
    truncated = line + "\n";
    std::getline(full, line);
    truncated += line + "\n";
    std::ofstream(dist_path, std::ios::binary | std::ios::trunc) << truncated;

    const CliResult resumed = run_cli("sweep --config " + config.string() + " -v");
    CHECK(resumed.exit_code == 0);
    CHECK(resumed.output.find("resuming") != std::string::npos);
    CHECK(slurp(dist_path) == distribution);
  }

  SUBCASE("completed sweep is a no-op that keeps files identical") {
    const std::string summary_before = slurp(dir / "out" / "summary.json");
    const CliResult rerun = run_cli("sweep --config " + config.string() + " --threads 4");
    CHECK(rerun.exit_code == 0);
    CHECK(slurp(dist_path) == distribution);
    CHECK(slurp(dir / "out" / "summary.json") == summary_before);
  }
}

TEST_CASE("cli: scan emits per-pair statistics") {
  const fs::path dir = fresh_dir("scan");
  const fs::path config = dir / "config.json";
  std::ofstream(config) << tiny_config_json((dir / "out").string());

  const CliResult result =
      run_cli("scan --config " + config.string() + " --pairs 2:8,4:16 --realizations 2");
  CHECK(result.exit_code == 0);

  const std::string scan = slurp(dir / "out" / "scan.csv");
  CHECK(scan.find("engine,num_windows,ensemble_size,mean_i_p,stderr_i_p,realizations") == 0);
  CHECK(scan.find("digital,2,8,") != std::string::npos);
  CHECK(scan.find("analogue,4,16,") != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "scan_summary.json"));
  CHECK(summary.at("points").size() == 4);

  const CliResult missing_pairs = run_cli("scan --preset fig2a");
  CHECK(missing_pairs.exit_code == 2);
}
