#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "spingate/model.hpp"
#include "spingate/objective.hpp"
#include "spingate/optimize.hpp"
#include "spingate/robustness.hpp"

namespace spingate {

inline constexpr int kSchemaVersion = 1;
std::string_view library_version();

struct SystemConfig {
  std::string preset;  // empty, "one_qubit_n1", "one_qubit_nk" or "cnot_n1"
  int qubits = 1;
  int environment = 1;
  TopologyKind topology = TopologyKind::Star;
  double gamma = 0.02;
  double gamma_qubits = 0.0;
  std::vector<double> frequencies;  // empty: taken from the preset
  std::vector<double> dipoles;      // empty: all 1
  bool operator==(const SystemConfig &) const = default;
};

struct TargetConfig {
  std::string gate = "hadamard";
  std::string matrix_csv;    // custom gate, used when gate == "custom"
  double min_fidelity = 0.0;  // optimize exits with code 4 below this
  bool operator==(const TargetConfig &) const = default;
};

struct GridConfig {
  double t_final = 25.0;
  double dt = 0.025;  // largest step; the grid divides t_final evenly
  bool operator==(const GridConfig &) const = default;
};

struct FieldConfig {
  std::string source = "zero";  // "zero" or "csv"
  std::string path;
  bool operator==(const FieldConfig &) const = default;
};

struct DiagnosticsConfig {
  bool trajectory = true;
  int stride = 1;
  bool operator==(const DiagnosticsConfig &) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  SystemConfig system;
  TargetConfig target;
  GridConfig grid;
  FieldConfig field;
  bool run_ga = true;
  GaConfig ga;
  GeneBounds bounds;
  GradConfig gradient;
  DiagnosticsConfig diagnostics;
  EnsembleSpec robustness;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig &) const = default;
};

// Frequencies of the named parameter sets. `one_qubit_nk` needs n in {2, 4, 6}.
std::vector<double> preset_frequencies(const std::string &preset, int environment);

// Applies a preset's (m, n, topology, gamma, frequencies) to a system block.
// Explicit frequencies in the block are kept.
void apply_preset(SystemConfig &system, const std::string &preset);

SpinSystem build_system(const SystemConfig &config);
GateTarget build_gate(const TargetConfig &config);

// Throws ConfigError with the offending key path on any invalid entry.
ExperimentConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ExperimentConfig &config);
// Throws ConfigError with line and column for malformed JSON.
ExperimentConfig load_config(const std::filesystem::path &path);
ExperimentConfig parse_config_text(const std::string &text);
void validate_config(const ExperimentConfig &config);

// Propagates the master seed and thread cap into the module configs.
void distribute_seed(ExperimentConfig &config);

// 64-bit FNV-1a of the canonical config dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig &config);

nlohmann::json report_to_json(const OptimizationReport &report);
nlohmann::json ensemble_to_json(const EnsembleReport &report);

// Command drivers. Each writes its artifacts and a manifest into
// config.output_dir and returns the process exit code.
int cmd_simulate(const ExperimentConfig &config, std::ostream &log);
int cmd_optimize(const ExperimentConfig &config, std::ostream &log);
int cmd_crossapply(const ExperimentConfig &config, std::ostream &log);
int cmd_robustness(const ExperimentConfig &config, std::ostream &log);

}  // namespace spingate
