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

#include "dephasim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

namespace dephasim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

json summary_to_json(const DistributionSummary& summary) {
  json quantiles = json::object();
  for (std::size_t i = 0; i < summary.quantile_levels.size(); ++i) {
    quantiles[format_double(summary.quantile_levels[i])] = summary.quantile_values[i];
  }
  json fractions = json::object();
  for (std::size_t i = 0; i < summary.thresholds.size(); ++i) {
    fractions[format_double(summary.thresholds[i])] = summary.fraction_below[i];
  }
  return json{{"count", summary.count},
              {"min", summary.minimum},
              {"max", summary.maximum},
              {"median", summary.median},
              {"quantiles", quantiles},
              {"fraction_below", fractions},
              {"histogram", json{{"edges", summary.bin_edges},
                                 {"counts", summary.bin_counts}}}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ConfigError("short write to '" + path + "'");
}

}  // namespace

json spec_to_json(const ExperimentSpec& spec) {
  json engines;
  engines["exact"] = json{{"enabled", spec.exact_enabled},
                          {"base_step", spec.lindblad.base_step},
                          {"refinement_threshold", spec.lindblad.refinement_threshold},
                          {"max_refinements", spec.lindblad.max_refinements}};
  if (spec.digital) {
    engines["digital"] = json{{"num_windows", spec.digital->num_windows},
                              {"ensemble_size", spec.digital->ensemble_size}};
  }
  if (spec.analogue) {
    engines["analogue"] = json{{"num_windows", spec.analogue->num_windows},
                               {"ensemble_size", spec.analogue->ensemble_size},
                               {"krylov_tolerance", spec.propagator.krylov_tolerance},
                               {"krylov_max_dim", spec.propagator.krylov_max_dim}};
  }

  json stop;
  if (spec.stop.kind == StopRule::Kind::fixed_time) {
    stop = json{{"kind", "fixed_time"}};
  } else {
    stop = json{{"kind", "quarter_decay"},
                {"max_time", spec.stop.max_time},
                {"sample_interval", spec.stop.sample_interval}};
  }

  // threads and output_dir are execution knobs, not simulation settings:
  // outputs must be byte-identical across worker counts, so they are not
  // echoed here.
  json doc{{"name", spec.name},
           {"lattice", json{{"num_sites", spec.lattice.num_sites},
                            {"tunnelling_rate", spec.lattice.tunnelling_rate},
                            {"disorder_amplitude", spec.lattice.disorder_amplitude}}},
           {"gamma", spec.gamma},
           {"total_time", spec.total_time},
           {"stop_rule", stop},
           {"engines", engines},
           {"master_seed", spec.master_seed},
           {"realizations", spec.realizations},
           {"density", spec.density}};
  if (spec.disorder_seed) doc["disorder_seed"] = *spec.disorder_seed;
  return doc;
}

ExperimentSpec spec_from_json(const json& doc, const ExperimentSpec& base) {
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(doc,
             {"name", "lattice", "gamma", "total_time", "stop_rule", "engines",
              "master_seed", "disorder_seed", "realizations", "density", "threads",
              "output_dir", "scan_pairs"},
             "config root");

  ExperimentSpec spec = base;
  read_field(doc, "name", spec.name);

  if (doc.contains("lattice")) {
    const json& lattice = doc.at("lattice");
    check_keys(lattice, {"num_sites", "tunnelling_rate", "disorder_amplitude"},
               "lattice");
    int sites = spec.lattice.num_sites;
    double tau = spec.lattice.tunnelling_rate;
    double w = spec.lattice.disorder_amplitude;
    read_field(lattice, "num_sites", sites);
    read_field(lattice, "tunnelling_rate", tau);
    read_field(lattice, "disorder_amplitude", w);
    try {
      spec.lattice = LatticeSpec(sites, tau, w);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("lattice: ") + e.what());
    }
  }

  read_field(doc, "gamma", spec.gamma);
  read_field(doc, "total_time", spec.total_time);

  if (doc.contains("stop_rule")) {
    const json& stop = doc.at("stop_rule");
    check_keys(stop, {"kind", "max_time", "sample_interval"}, "stop_rule");
    std::string kind = "fixed_time";
    read_field(stop, "kind", kind);
    if (kind == "fixed_time") {
      spec.stop.kind = StopRule::Kind::fixed_time;
    } else if (kind == "quarter_decay") {
      spec.stop.kind = StopRule::Kind::quarter_decay;
    } else {
      throw ConfigError("stop_rule.kind must be 'fixed_time' or 'quarter_decay', got '" +
                        kind + "'");
    }
    read_field(stop, "max_time", spec.stop.max_time);
    read_field(stop, "sample_interval", spec.stop.sample_interval);
  }

  if (doc.contains("engines")) {
    const json& engines = doc.at("engines");
    check_keys(engines, {"exact", "digital", "analogue"}, "engines");
    if (engines.contains("exact")) {
      const json& exact = engines.at("exact");
      check_keys(exact,
                 {"enabled", "base_step", "refinement_threshold", "max_refinements"},
                 "engines.exact");
      read_field(exact, "enabled", spec.exact_enabled);
      read_field(exact, "base_step", spec.lindblad.base_step);
      read_field(exact, "refinement_threshold", spec.lindblad.refinement_threshold);
      read_field(exact, "max_refinements", spec.lindblad.max_refinements);
    }
    for (const char* name : {"digital", "analogue"}) {
      if (!engines.contains(name)) continue;
      const json& engine = engines.at(name);
      const bool is_analogue = std::string(name) == "analogue";
      if (is_analogue) {
        check_keys(engine,
                   {"num_windows", "ensemble_size", "krylov_tolerance", "krylov_max_dim"},
                   "engines.analogue");
        read_field(engine, "krylov_tolerance", spec.propagator.krylov_tolerance);
        read_field(engine, "krylov_max_dim", spec.propagator.krylov_max_dim);
      } else {
        check_keys(engine, {"num_windows", "ensemble_size"}, "engines.digital");
      }
      ProtocolParams params =
          is_analogue ? spec.analogue.value_or(ProtocolParams{})
                      : spec.digital.value_or(ProtocolParams{});
      read_field(engine, "num_windows", params.num_windows);
      read_field(engine, "ensemble_size", params.ensemble_size);
      if (is_analogue) {
        spec.analogue = params;
      } else {
        spec.digital = params;
      }
    }
  }

  read_field(doc, "master_seed", spec.master_seed);
  if (doc.contains("disorder_seed")) {
    spec.disorder_seed = doc.at("disorder_seed").get<std::uint64_t>();
  }
  read_field(doc, "realizations", spec.realizations);
  read_field(doc, "density", spec.density);
  read_field(doc, "threads", spec.threads);
  read_field(doc, "output_dir", spec.output_dir);
  return spec;
}

ExperimentSpec load_spec_file(const std::string& path, const ExperimentSpec& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  try {
    return spec_from_json(doc, base);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

std::vector<ProtocolParams> scan_pairs_from_json(const json& doc) {
  std::vector<ProtocolParams> pairs;
  if (!doc.contains("scan_pairs")) return pairs;
  for (const auto& entry : doc.at("scan_pairs")) {
    if (!entry.is_array() || entry.size() != 2) {
      throw ConfigError("scan_pairs entries must be [num_windows, ensemble_size]");
    }
    pairs.push_back(ProtocolParams{entry[0].get<int>(), entry[1].get<int>()});
  }
  return pairs;
}

void ensure_writable_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw OutputDirError("cannot create output directory '" + dir + "': " + ec.message());
  }
  const fs::path probe = fs::path(dir) / ".dephasim_probe";
  {
    std::ofstream out(probe);
    if (!out) throw OutputDirError("output directory '" + dir + "' is not writable");
    out << "probe";
  }
  fs::remove(probe, ec);
}

void write_populations_csv(const std::string& path, const ExperimentRecord& record) {
  std::ostringstream out;
  out << "site";
  if (record.exact) out << ",p_exact";
  if (record.digital) out << ",p_digital";
  if (record.analogue) out << ",p_analogue";
  out << "\n";
  const int n = record.spec.lattice.num_sites;
  for (int x = 0; x < n; ++x) {
    out << x;
    if (record.exact) out << "," << format_double(record.exact->populations[x]);
    if (record.digital) out << "," << format_double(record.digital->populations[x]);
    if (record.analogue) out << "," << format_double(record.analogue->populations[x]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_infidelities_json(const std::string& path, const ExperimentRecord& record) {
  json engines = json::object();
  if (record.exact) {
    engines["exact"] = json{{"step_used", record.exact->step_used},
                            {"refinements", record.exact->refinements},
                            {"wall_seconds", record.exact->wall_seconds}};
  }
  auto protocol_json = [](const ProtocolEngineOutput& engine) {
    return json{{"num_windows", engine.params.num_windows},
                {"ensemble_size", engine.params.ensemble_size},
                {"window", engine.window},
                {"sigma", engine.sigma},
                {"ensemble_seed", engine.ensemble_seed},
                {"wall_seconds", engine.wall_seconds}};
  };
  if (record.digital) engines["digital"] = protocol_json(*record.digital);
  if (record.analogue) engines["analogue"] = protocol_json(*record.analogue);

  json infidelities = json::object();
  auto report_json = [](const InfidelityReport& report) {
    json j{{"i_p", report.population_infidelity}};
    if (report.state_infidelity) j["i_s"] = *report.state_infidelity;
    return j;
  };
  if (record.digital_vs_exact) infidelities["digital"] = report_json(*record.digital_vs_exact);
  if (record.analogue_vs_exact) infidelities["analogue"] = report_json(*record.analogue_vs_exact);

  json doc{{"spec", spec_to_json(record.spec)},
           {"seeds", json{{"master_seed", record.spec.master_seed},
                          {"disorder_seed", record.disorder_seed_used}}},
           {"ground_state", json{{"energy", record.ground_energy},
                                 {"peak_site", record.peak_site},
                                 {"degenerate", record.degenerate_ground}}},
           {"total_time_used", record.total_time_used},
           {"engines", engines},
           {"infidelities", infidelities}};
  if (record.decay) {
    json decay{{"peak_site", record.decay->peak_site},
               {"final_ratio", record.decay->final_ratio}};
    if (record.decay->quarter_decay_time) {
      decay["quarter_decay_time"] = *record.decay->quarter_decay_time;
    } else {
      decay["quarter_decay_time"] = nullptr;
    }
    doc["decay"] = decay;
  }
  if (!record.engine_errors.empty()) {
    doc["engine_errors"] = record.engine_errors;
  }
  write_text_file(path, doc.dump(2) + "\n");
}

std::string DistributionWriter::header(bool digital, bool analogue) {
  std::string header = "realization,disorder_seed";
  if (digital) header += ",i_p_digital";
  if (analogue) header += ",i_p_analogue";
  return header;
}

DistributionWriter::DistributionWriter(const std::string& path, bool digital,
                                       bool analogue)
    : digital_(digital), analogue_(analogue) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw ConfigError("cannot open '" + path + "' for appending");
  if (fresh) out_ << header(digital, analogue) << "\n" << std::flush;
}

void DistributionWriter::append(const SweepRow& row) {
  out_ << row.realization << "," << row.disorder_seed;
  if (digital_) out_ << "," << (row.ip_digital ? format_double(*row.ip_digital) : "");
  if (analogue_) out_ << "," << (row.ip_analogue ? format_double(*row.ip_analogue) : "");
  out_ << "\n" << std::flush;
}

std::vector<SweepRow> read_distribution_csv(const std::string& path, bool digital,
                                            bool analogue) {
  std::vector<SweepRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line != DistributionWriter::header(digital, analogue)) {
    throw ConfigError("existing '" + path + "' has a different engine selection; "
                      "move it aside or change --out");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    SweepRow row;
    if (!std::getline(fields, field, ',')) continue;
    row.realization = std::stoi(field);
    if (!std::getline(fields, field, ',')) continue;
    row.disorder_seed = std::stoull(field);
    if (digital && std::getline(fields, field, ',') && !field.empty()) {
      row.ip_digital = std::stod(field);
    }
    if (analogue && std::getline(fields, field, ',') && !field.empty()) {
      row.ip_analogue = std::stod(field);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_json(const std::string& path, const ExperimentSpec& spec,
                        const SweepResult& result) {
  json engines = json::object();
  if (result.digital_summary) engines["digital"] = summary_to_json(*result.digital_summary);
  if (result.analogue_summary) engines["analogue"] = summary_to_json(*result.analogue_summary);
  json doc{{"spec", spec_to_json(spec)},
           {"realizations", spec.realizations},
           {"failed", result.failed},
           {"engines", engines}};
  write_text_file(path, doc.dump(2) + "\n");
}

void write_scan_csv(const std::string& path, const ScanResult& result) {
  std::ostringstream out;
  out << "engine,num_windows,ensemble_size,mean_i_p,stderr_i_p,realizations\n";
  for (const ScanPoint& point : result.points) {
    out << (point.mode == ProtocolMode::digital ? "digital" : "analogue") << ","
        << point.params.num_windows << "," << point.params.ensemble_size << ","
        << format_double(point.mean_ip) << "," << format_double(point.stderr_ip) << ","
        << point.realizations << "\n";
  }
  write_text_file(path, out.str());
}

void write_scan_json(const std::string& path, const ExperimentSpec& spec,
                     const ScanResult& result) {
  json points = json::array();
  for (const ScanPoint& point : result.points) {
    points.push_back(json{
        {"engine", point.mode == ProtocolMode::digital ? "digital" : "analogue"},
        {"num_windows", point.params.num_windows},
        {"ensemble_size", point.params.ensemble_size},
        {"mean_i_p", point.mean_ip},
        {"stderr_i_p", point.stderr_ip},
        {"realizations", point.realizations}});
  }
  json doc{{"spec", spec_to_json(spec)},
           {"points", points},
           {"digital_monotone", result.digital_monotone},
           {"analogue_monotone", result.analogue_monotone}};
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace dephasim
