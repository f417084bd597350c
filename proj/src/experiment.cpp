#include "spingate/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "spingate/diagnostics.hpp"

#ifndef SPINGATE_VERSION
#define SPINGATE_VERSION "0.0.0"
#endif

namespace spingate {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view library_version() { return SPINGATE_VERSION; }

std::vector<double> preset_frequencies(const std::string &preset, int environment) {
  if (preset == "one_qubit_n1") return {1.0, 1.0 / (M_PI - 2.14)};
  if (preset == "cnot_n1") return {1.0, M_PI - 2.05, 1.0 / (M_PI - 2.14)};
  if (preset == "one_qubit_nk") {
    static const double ladder[] = {2.14, 2.1, 2.0};
    if (environment != 2 && environment != 4 && environment != 6)
      throw ConfigError("preset one_qubit_nk needs an environment of 2, 4 or 6 spins");
    std::vector<double> w{1.0};
    for (int p = 0; p < environment / 2; ++p) {
      w.push_back(1.0 / (M_PI - ladder[p]));
      w.push_back(M_PI - ladder[p]);
    }
    return w;
  }
  throw ConfigError("unknown preset '" + preset + "'");
}

void apply_preset(SystemConfig &system, const std::string &preset) {
  system.preset = preset;
  if (preset == "one_qubit_n1") {
    system.qubits = 1;
    system.environment = 1;
    system.topology = TopologyKind::Star;
  } else if (preset == "one_qubit_nk") {
    system.qubits = 1;
    system.topology = TopologyKind::Star;
  } else if (preset == "cnot_n1") {
    system.qubits = 2;
    system.environment = 1;
    system.topology = TopologyKind::TwoQubitTriangle;
    system.gamma = 0.01;
    system.gamma_qubits = 0.1;
  } else {
    throw ConfigError("unknown preset '" + preset + "'");
  }
  // For one-qubit presets gamma keeps its configured value (0.02 by default).
}

SpinSystem build_system(const SystemConfig &c) {
  std::vector<double> freqs = c.frequencies;
  if (freqs.empty()) {
    if (c.preset.empty()) throw ConfigError("system.frequencies: required without a preset");
    freqs = preset_frequencies(c.preset, c.environment);
  }
  try {
    const Topology topo =
        make_topology(c.topology, {c.gamma, c.gamma_qubits}, c.qubits, c.environment);
    SpinSystem s = make_system(c.qubits, c.environment, std::move(freqs), topo);
    if (!c.dipoles.empty()) {
      s.dipoles = c.dipoles;
      s.validate();
    }
    return s;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
}

GateTarget build_gate(const TargetConfig &c) {
  std::string lower;
  for (char ch : c.gate) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "custom") {
    if (c.matrix_csv.empty()) throw ConfigError("target.matrix_csv: required for a custom gate");
    return read_gate_csv(c.matrix_csv);
  }
  return gate_by_name(c.gate);
}

namespace {

// Reads one JSON object, recording which keys were consumed so that
// misspelt keys are reported instead of silently ignored.
class Reader {
 public:
  Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const char *key, T &out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception &) {
      throw ConfigError(where(key) + ": wrong type (" + it->dump() + ")");
    }
  }

  template <typename Enum, typename Parse>
  void get_enum(const char *key, Enum &out, Parse parse) {
    std::string name;
    used_.insert(key);
    if (!j_.contains(key)) return;
    get(key, name);
    try {
      out = parse(name);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void get_optional(const char *key, std::optional<double> &out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number()) throw ConfigError(where(key) + ": expected a number or null");
    out = it->get<double>();
  }

  bool has(const char *key) const { return j_.contains(key); }

  Reader child(const char *key) {
    used_.insert(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    return Reader(it == j_.end() ? empty : *it, where(key));
  }

  void finish() const {
    for (const auto &item : j_.items())
      if (!used_.count(item.key())) throw ConfigError(where(item.key().c_str()) + ": unknown key");
  }

 private:
  std::string where(const char *key = nullptr) const {
    std::string w = path_.empty() ? std::string("config") : path_;
    if (key) w = path_.empty() ? std::string(key) : path_ + "." + key;
    return w;
  }

  const json &j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_envelope(Reader r, Envelope &e) {
  r.get_enum("kind", e.kind, envelope_from_string);
  r.get("width", e.width);
  r.finish();
}

json envelope_json(const Envelope &e) { return {{"kind", to_string(e.kind)}, {"width", e.width}}; }

}  // namespace

ExperimentConfig config_from_json(const json &j) {
  ExperimentConfig c;
  Reader root(j, "");
  root.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(c.schema_version));

  {
    Reader r = root.child("system");
    std::string preset;
    r.get("preset", preset);
    if (!preset.empty()) apply_preset(c.system, preset);
    r.get("qubits", c.system.qubits);
    r.get("environment", c.system.environment);
    r.get_enum("topology", c.system.topology, topology_from_string);
    r.get("gamma", c.system.gamma);
    r.get("gamma_qubits", c.system.gamma_qubits);
    r.get("frequencies", c.system.frequencies);
    r.get("dipoles", c.system.dipoles);
    r.finish();
  }
  {
    Reader r = root.child("target");
    r.get("gate", c.target.gate);
    r.get("matrix_csv", c.target.matrix_csv);
    r.get("min_fidelity", c.target.min_fidelity);
    r.finish();
  }
  {
    Reader r = root.child("grid");
    r.get("t_final", c.grid.t_final);
    r.get("dt", c.grid.dt);
    r.finish();
  }
  {
    Reader r = root.child("field");
    r.get("source", c.field.source);
    r.get("path", c.field.path);
    r.finish();
  }
  {
    Reader r = root.child("ga");
    r.get("enabled", c.run_ga);
    r.get("population", c.ga.population);
    r.get("crossover_rate", c.ga.crossover_rate);
    r.get("mutation_rate", c.ga.mutation_rate);
    r.get("generations", c.ga.generations);
    r.get("fitness_threshold", c.ga.fitness_threshold);
    r.get("tournament_size", c.ga.tournament_size);
    r.get("elites", c.ga.elites);
    r.get("mutation_scale", c.ga.mutation_scale);
    if (r.has("envelope")) read_envelope(r.child("envelope"), c.ga.envelope);
    r.get("amplitude_max", c.bounds.amplitude_max);
    r.get("frequency_min", c.bounds.frequency_min);
    r.get("frequency_max", c.bounds.frequency_max);
    r.get("t_final_min", c.bounds.t_final_min);
    r.get("t_final_max", c.bounds.t_final_max);
    r.finish();
  }
  {
    Reader r = root.child("gradient");
    r.get_enum("method", c.gradient.method, descent_from_string);
    r.get("alpha", c.gradient.alpha);
    r.get("beta", c.gradient.beta);
    r.get("r", c.gradient.r);
    r.get("max_iterations", c.gradient.max_iterations);
    r.get("tolerance", c.gradient.tolerance);
    r.get("patience", c.gradient.patience);
    r.get("max_backtracks", c.gradient.max_backtracks);
    r.get("beta_growth", c.gradient.beta_growth);
    r.get("amplitude_clamp", c.gradient.amplitude_clamp);
    r.get("target_distance", c.gradient.target_distance);
    r.get("checkpoint_every", c.gradient.checkpoint_every);
    std::string checkpoint = c.gradient.checkpoint_path.string();
    r.get("checkpoint_path", checkpoint);
    c.gradient.checkpoint_path = checkpoint;
    r.finish();
  }
  {
    Reader r = root.child("diagnostics");
    r.get("trajectory", c.diagnostics.trajectory);
    r.get("stride", c.diagnostics.stride);
    r.finish();
  }
  {
    Reader r = root.child("robustness");
    r.get_enum("target", c.robustness.target, perturbation_from_string);
    r.get_optional("relative_sigma", c.robustness.relative_sigma);
    r.get("size", c.robustness.size);
    r.get("histogram_bins", c.robustness.histogram_bins);
    r.finish();
  }
  root.get("seed", c.seed);
  root.get("threads", c.threads);
  root.get("output_dir", c.output_dir);
  root.finish();
  distribute_seed(c);
  validate_config(c);
  return c;
}

json config_to_json(const ExperimentConfig &c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["system"] = {{"preset", c.system.preset},
                 {"qubits", c.system.qubits},
                 {"environment", c.system.environment},
                 {"topology", to_string(c.system.topology)},
                 {"gamma", c.system.gamma},
                 {"gamma_qubits", c.system.gamma_qubits},
                 {"frequencies", c.system.frequencies},
                 {"dipoles", c.system.dipoles}};
  j["target"] = {{"gate", c.target.gate},
                 {"matrix_csv", c.target.matrix_csv},
                 {"min_fidelity", c.target.min_fidelity}};
  j["grid"] = {{"t_final", c.grid.t_final}, {"dt", c.grid.dt}};
  j["field"] = {{"source", c.field.source}, {"path", c.field.path}};
  j["ga"] = {{"enabled", c.run_ga},
             {"population", c.ga.population},
             {"crossover_rate", c.ga.crossover_rate},
             {"mutation_rate", c.ga.mutation_rate},
             {"generations", c.ga.generations},
             {"fitness_threshold", c.ga.fitness_threshold},
             {"tournament_size", c.ga.tournament_size},
             {"elites", c.ga.elites},
             {"mutation_scale", c.ga.mutation_scale},
             {"envelope", envelope_json(c.ga.envelope)},
             {"amplitude_max", c.bounds.amplitude_max},
             {"frequency_min", c.bounds.frequency_min},
             {"frequency_max", c.bounds.frequency_max},
             {"t_final_min", c.bounds.t_final_min},
             {"t_final_max", c.bounds.t_final_max}};
  j["gradient"] = {{"method", to_string(c.gradient.method)},
                   {"alpha", c.gradient.alpha},
                   {"beta", c.gradient.beta},
                   {"r", c.gradient.r},
                   {"max_iterations", c.gradient.max_iterations},
                   {"tolerance", c.gradient.tolerance},
                   {"patience", c.gradient.patience},
                   {"max_backtracks", c.gradient.max_backtracks},
                   {"beta_growth", c.gradient.beta_growth},
                   {"amplitude_clamp", c.gradient.amplitude_clamp},
                   {"target_distance", c.gradient.target_distance},
                   {"checkpoint_every", c.gradient.checkpoint_every},
                   {"checkpoint_path", c.gradient.checkpoint_path.string()}};
  j["diagnostics"] = {{"trajectory", c.diagnostics.trajectory},
                      {"stride", c.diagnostics.stride}};
  j["robustness"] = {{"target", to_string(c.robustness.target)},
                     {"relative_sigma", c.robustness.relative_sigma
                                            ? json(*c.robustness.relative_sigma)
                                            : json(nullptr)},
                     {"size", c.robustness.size},
                     {"histogram_bins", c.robustness.histogram_bins}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig parse_config_text(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    // Convert the byte offset into a line and column.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void distribute_seed(ExperimentConfig &c) {
  c.ga.seed = c.seed;
  c.gradient.seed = c.seed;
  c.robustness.seed = c.seed;
  c.ga.threads = c.threads;
  c.robustness.threads = c.threads;
}

void validate_config(const ExperimentConfig &c) {
  const SpinSystem system = build_system(c.system);
  if (c.target.gate.empty()) throw ConfigError("target.gate: must not be empty");
  const GateTarget gate = build_gate(c.target);
  if (gate.qubits() != system.qubits)
    throw ConfigError("target.gate: '" + c.target.gate + "' acts on " +
                      std::to_string(gate.qubits()) + " qubit(s), system has " +
                      std::to_string(system.qubits));
  if (!(c.target.min_fidelity >= 0.0 && c.target.min_fidelity <= 1.0))
    throw ConfigError("target.min_fidelity: must lie in [0, 1]");
  if (!(c.grid.t_final > 0.0)) throw ConfigError("grid.t_final: must be positive");
  if (!(c.grid.dt > 0.0)) throw ConfigError("grid.dt: must be positive");
  if (c.field.source != "zero" && c.field.source != "csv")
    throw ConfigError("field.source: expected \"zero\" or \"csv\"");
  if (c.field.source == "csv" && c.field.path.empty())
    throw ConfigError("field.path: required when field.source is \"csv\"");
  if (c.diagnostics.stride < 1) throw ConfigError("diagnostics.stride: must be >= 1");
  const auto wrap = [](const char *block, auto &&fn) {
    try {
      fn();
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string(block) + ": " + e.what());
    }
  };
  wrap("ga", [&] { c.ga.validate(); });
  wrap("ga", [&] {
    const GeneBounds &b = c.bounds;
    if (b.amplitude_max < 0.0 || b.frequency_min > b.frequency_max ||
        !(b.t_final_min > 0.0) || b.t_final_min > b.t_final_max)
      throw std::invalid_argument("inconsistent gene bounds");
  });
  wrap("gradient", [&] { c.gradient.validate(); });
  wrap("robustness", [&] { c.robustness.validate(); });
}

std::string config_hash(const ExperimentConfig &c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json report_to_json(const OptimizationReport &r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["distance"] = r.distance;
  j["fidelity"] = r.fidelity;
  j["fluence"] = r.fluence;
  j["functional"] = r.functional;
  j["final_entropy"] = r.final_entropy;
  j["t_final"] = r.grid.t_final;
  j["steps"] = r.grid.steps;
  j["dt"] = r.grid.dt();
  double peak = 0.0;
  for (double c : r.field.samples) peak = std::max(peak, std::abs(c));
  j["max_amplitude"] = peak;
  j["termination"] = to_string(r.termination);
  j["iterations"] = r.iterations;
  j["rejections"] = r.rejections;
  j["singular_branch"] = r.singular_branch;
  j["clamp_bound"] = r.clamp_bound;
  j["wall_seconds"] = r.wall_seconds;
  if (r.parameters) {
    json comps = json::array();
    for (const auto &c : r.parameters->components)
      comps.push_back({{"amplitude", c.amplitude}, {"frequency", c.frequency}, {"phase", c.phase}});
    j["parameters"] = {{"envelope", envelope_json(r.parameters->envelope)},
                       {"t_final", r.parameters->t_final},
                       {"components", comps}};
  } else {
    j["parameters"] = nullptr;
  }
  j["generation_best"] = r.generation_best;
  json trace = json::array();
  for (const auto &t : r.trace)
    trace.push_back({{"iteration", t.iteration},
                     {"distance", t.distance},
                     {"functional", t.functional},
                     {"fluence", t.fluence},
                     {"beta", t.beta},
                     {"rejected", t.rejected}});
  j["trace"] = trace;
  return j;
}

json ensemble_to_json(const EnsembleReport &r) {
  auto hist = [](const Histogram &h) { return json{{"edges", h.edges}, {"counts", h.counts}}; };
  return {{"schema_version", kSchemaVersion},
          {"target", to_string(r.spec.target)},
          {"relative_sigma", r.spec.sigma_fraction()},
          {"size", r.spec.size},
          {"seed", r.spec.seed},
          {"nominal_fidelity", r.nominal_fidelity},
          {"nominal_entropy", r.nominal_entropy},
          {"mean_fidelity", r.fidelity.mean},
          {"std_fidelity", r.fidelity.stddev},
          {"mean_entropy", r.entropy.mean},
          {"std_entropy", r.entropy.stddev},
          {"redraws", r.redraws},
          {"wall_seconds", r.wall_seconds},
          {"fidelity_histogram", hist(r.fidelity_histogram)},
          {"entropy_histogram", hist(r.entropy_histogram)}};
}

namespace {

void write_json(const fs::path &path, const json &j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_output(const ExperimentConfig &c) {
  const fs::path dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir: cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const fs::path &dir, const ExperimentConfig &c, const std::string &command,
                    const std::vector<std::string> &outputs) {
  write_json(dir / "manifest.json",
             {{"tool", "spingate"},
              {"version", library_version()},
              {"command", command},
              {"config_hash", config_hash(c)},
              {"seed", c.seed},
              {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
              {"outputs", outputs},
              {"config", config_to_json(c)}});
}

std::pair<TimeGrid, ControlField> load_field(const ExperimentConfig &c) {
  if (c.field.source == "csv") return read_field_csv(c.field.path);
  const TimeGrid grid = TimeGrid::with_max_step(c.grid.t_final, c.grid.dt);
  return {grid, ControlField::zero(grid)};
}

std::pair<TimeGrid, ControlField> require_field(const ExperimentConfig &c, const char *command) {
  if (c.field.source != "csv")
    throw ConfigError(std::string(command) + " needs a field CSV (--field or field.path)");
  return read_field_csv(c.field.path);
}

}  // namespace

int cmd_simulate(const ExperimentConfig &c, std::ostream &log) {
  const SpinSystem system = build_system(c.system);
  const GateTarget gate = build_gate(c.target);
  const auto [grid, field] = load_field(c);
  const fs::path dir = prepare_output(c);
  const PropagationResult prop = propagate_forward(assemble_hamiltonian(system), field, grid);
  const auto rows =
      trajectory_diagnostics(prop, grid, gate.matrix, system.qubits, system.environment,
                             c.diagnostics.stride);
  write_trajectory_csv(dir / "trajectory.csv", rows);
  const TrajectoryRow &last = rows.back();
  write_json(dir / "summary.json", {{"schema_version", kSchemaVersion},
                                    {"t_final", grid.t_final},
                                    {"steps", grid.steps},
                                    {"fidelity", last.fidelity},
                                    {"distance", 1.0 - last.fidelity},
                                    {"final_entropy", last.entropy},
                                    {"kraus_norm", last.kraus_norm}});
  write_manifest(dir, c, "simulate", {"trajectory.csv", "summary.json"});
  log << "simulate: " << grid.steps << " steps, F(t_f) = " << last.fidelity
      << ", S_vN(t_f) = " << last.entropy << '\n';
  return 0;
}

int cmd_optimize(const ExperimentConfig &c, std::ostream &log) {
  const ControlProblem problem = make_problem(build_system(c.system), build_gate(c.target));
  const fs::path dir = prepare_output(c);
  GradConfig grad = c.gradient;
  if (grad.checkpoint_every > 0 && grad.checkpoint_path.empty())
    grad.checkpoint_path = dir / "checkpoint.csv";

  OptimizationReport report;
  if (c.field.source == "csv") {
    const auto [grid, field] = read_field_csv(c.field.path);
    report = grad_optimize(problem, field, grid, grad);
  } else if (c.run_ga) {
    const TimeGrid nominal = TimeGrid::with_max_step(c.grid.t_final, c.grid.dt);
    report = optimize(problem, c.ga, c.bounds, nominal.dt(), grad);
  } else {
    const TimeGrid grid = TimeGrid::with_max_step(c.grid.t_final, c.grid.dt);
    report = grad_optimize(problem, ControlField::zero(grid), grid, grad);
  }

  write_json(dir / "report.json", report_to_json(report));
  write_field_csv(dir / "field.csv", report.field, report.grid);
  std::vector<std::string> outputs{"report.json", "field.csv"};
  if (c.diagnostics.trajectory) {
    const PropagationResult prop = propagate_forward(problem.terms, report.field, report.grid);
    write_trajectory_csv(dir / "trajectory.csv",
                         trajectory_diagnostics(prop, report.grid, problem.target.matrix,
                                                problem.qubits(), problem.environment(),
                                                c.diagnostics.stride));
    outputs.push_back("trajectory.csv");
  }
  write_manifest(dir, c, "optimize", outputs);
  log << "optimize: F = " << report.fidelity << ", J = " << report.distance
      << ", E = " << report.fluence << ", S_vN(t_f) = " << report.final_entropy << " ("
      << to_string(report.termination) << ", " << report.iterations << " iterations)\n";
  if (report.fidelity < c.target.min_fidelity) {
    log << "optimize: fidelity below target.min_fidelity = " << c.target.min_fidelity << '\n';
    return 4;
  }
  return 0;
}

int cmd_crossapply(const ExperimentConfig &c, std::ostream &log) {
  const SpinSystem system = build_system(c.system);
  const GateTarget gate = build_gate(c.target);
  const auto [grid, field] = require_field(c, "crossapply");
  const fs::path dir = prepare_output(c);
  const CMatrix u = propagate_final(assemble_hamiltonian(system), field, grid);
  const DistanceResult d = distance(u, gate.matrix, system.qubits, system.environment);
  const double entropy = von_neumann_entropy(
      reduced_density(u, reference_initial_state(system.qubits, system.environment),
                      system.qubits, system.environment));
  write_json(dir / "crossapply.json", {{"schema_version", kSchemaVersion},
                                       {"gamma", c.system.gamma},
                                       {"gamma_qubits", c.system.gamma_qubits},
                                       {"t_final", grid.t_final},
                                       {"steps", grid.steps},
                                       {"distance", d.distance},
                                       {"fidelity", d.fidelity()},
                                       {"final_entropy", entropy}});
  write_manifest(dir, c, "crossapply", {"crossapply.json"});
  log << "crossapply: gamma = " << c.system.gamma << ", F = " << d.fidelity() << '\n';
  return 0;
}

int cmd_robustness(const ExperimentConfig &c, std::ostream &log) {
  const SpinSystem system = build_system(c.system);
  const GateTarget gate = build_gate(c.target);
  const auto [grid, field] = require_field(c, "robustness");
  const fs::path dir = prepare_output(c);
  const EnsembleReport r = evaluate_ensemble(system, field, grid, gate, c.robustness);
  write_json(dir / "robustness.json", ensemble_to_json(r));
  write_histogram_csv(dir / "hist_fidelity.csv", r.fidelity_histogram);
  write_histogram_csv(dir / "hist_entropy.csv", r.entropy_histogram);
  {
    std::ofstream out(dir / "samples.csv");
    out.precision(17);
    out << "index,F,S_vN\n";
    for (std::size_t i = 0; i < r.fidelities.size(); ++i)
      out << i << ',' << r.fidelities[i] << ',' << r.entropies[i] << '\n';
  }
  write_manifest(dir, c, "robustness",
                 {"robustness.json", "hist_fidelity.csv", "hist_entropy.csv", "samples.csv"});
  log << "robustness (" << to_string(r.spec.target) << ", L = " << r.spec.size
      << "): mean F = " << r.fidelity.mean << ", sigma_F = " << r.fidelity.stddev
      << ", nominal F = " << r.nominal_fidelity << '\n';
  return 0;
}

}  // namespace spingate
