#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "spingate/model.hpp"
#include "spingate/objective.hpp"
#include "spingate/propagation.hpp"

namespace spingate {

// System, target and derived Hamiltonian terms for one optimization problem.
struct ControlProblem {
  SpinSystem system;
  GateTarget target;
  HamiltonianTerms terms;

  int qubits() const { return system.qubits; }
  int environment() const { return system.environment; }
};

// Throws std::invalid_argument when the gate does not act on the system's qubits.
ControlProblem make_problem(const SpinSystem &system, const GateTarget &target);

enum class EnvelopeKind { Sin2, Flat, Gaussian };

std::string_view to_string(EnvelopeKind kind);
EnvelopeKind envelope_from_string(std::string_view name);

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::Sin2;
  double width = 0.0;  // Gaussian standard deviation; unused otherwise

  double operator()(double t, double t_final) const;
  bool operator==(const Envelope &) const = default;
};

struct FieldComponent {
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
  bool operator==(const FieldComponent &) const = default;
};

// C(t) = f(t) sum_i A_i cos(w_i t + theta_i), one component per qubit.
struct ParameterizedField {
  std::vector<FieldComponent> components;
  Envelope envelope;
  double t_final = 1.0;
  bool operator==(const ParameterizedField &) const = default;
};

// Throws std::invalid_argument when grid.t_final differs from p.t_final.
ControlField render_field(const ParameterizedField &p, const TimeGrid &grid);

// Trapezoidal integral of C(t)^2.
double fluence(const ControlField &field, const TimeGrid &grid);

// J, fluence and K = J + alpha/2 * E for a sampled field.
struct Evaluation {
  double distance = 1.0;
  double fluence = 0.0;
  double functional = 1.0;
  CMatrix final_unitary;
};

Evaluation evaluate_field(const ControlProblem &problem, const ControlField &field,
                          const TimeGrid &grid, double alpha);

// Exact derivative of the discretised K with respect to the field, obtained
// from one forward pass and one adjoint sweep that share step propagators.
struct ControlGradient {
  double distance = 1.0;
  double fluence = 0.0;
  double functional = 1.0;
  // dK/dC(t_k) per unit time (sample gradient divided by its quadrature weight);
  // in the small-step limit this is 2 Im Tr[mu U(t) B(t)] + alpha C(t).
  std::vector<double> functional_derivative;
  // dK/dC_k with respect to the raw samples.
  std::vector<double> sample_gradient;
  bool singular_branch = false;
  CMatrix final_unitary;
};

ControlGradient control_gradient(const ControlProblem &problem, const ControlField &field,
                                 const TimeGrid &grid, double alpha);
ControlGradient control_gradient(const ControlProblem &problem, const StepSequence &steps,
                                 const ControlField &field, const TimeGrid &grid, double alpha);

// 2 Im Tr[mu U(t_k) B(t_k)] + alpha C(t_k) from stored forward/adjoint
// trajectories, mu = -control. Agrees with the exact discrete derivative up to
// discretisation error.
std::vector<double> adjoint_field_derivative(const HamiltonianTerms &terms,
                                             const PropagationResult &forward,
                                             const AdjointState &adjoint,
                                             const ControlField &field, double alpha);

struct GeneBounds {
  double amplitude_max = 4.0;
  double frequency_min = 0.5;
  double frequency_max = 1.5;
  double t_final_min = 25.0;
  double t_final_max = 25.0;
  bool operator==(const GeneBounds &) const = default;
};

struct GaConfig {
  int population = 250;
  double crossover_rate = 0.3;
  double mutation_rate = 0.3;
  int generations = 40;
  double fitness_threshold = 1.0;  // stop early once the best F reaches this
  int tournament_size = 3;
  int elites = 2;
  double mutation_scale = 0.1;  // Gaussian sigma as a fraction of each gene's range
  Envelope envelope;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
  bool operator==(const GaConfig &) const = default;
};

// Steepest: C <- C - beta sin^r(pi t / t_f) dK/dC.
// Conjugate: the same weighted gradient combined with the previous direction
// (Polak-Ribiere, reset when it stops being a descent direction), followed by
// one quadratic refinement of beta per iteration.
enum class DescentMethod { Steepest, Conjugate };

std::string_view to_string(DescentMethod m);
DescentMethod descent_from_string(std::string_view name);

struct GradConfig {
  DescentMethod method = DescentMethod::Steepest;
  double alpha = 1e-4;
  double beta = 0.5;
  double r = 1.0;
  int max_iterations = 2000;
  double tolerance = 1e-9;
  int patience = 25;
  int max_backtracks = 40;
  double beta_growth = 2.0;       // step multiplier after an accepted step, capped at beta
  double amplitude_clamp = 0.0;   // |C| bound; 0 disables
  double target_distance = 0.0;   // stop once J <= this; 0 disables
  std::uint64_t seed = 1;
  int checkpoint_every = 0;       // accepted iterations between field dumps; 0 disables
  std::filesystem::path checkpoint_path;

  void validate() const;
  bool operator==(const GradConfig &) const = default;
};

enum class Termination {
  Converged,
  IterationCap,
  Stationary,
  LineSearchFailed,
  TargetReached,
  FitnessThreshold,
  GenerationBudget,
};

std::string_view to_string(Termination t);

struct TraceEntry {
  int iteration = 0;
  double distance = 1.0;
  double functional = 1.0;
  double fluence = 0.0;
  double beta = 0.0;
  bool rejected = false;  // line-search trial that did not lower K
};

struct OptimizationReport {
  TimeGrid grid;
  ControlField field;
  std::optional<ParameterizedField> parameters;
  double distance = 1.0;
  double fidelity = 0.0;
  double fluence = 0.0;
  double functional = 1.0;
  double final_entropy = 0.0;  // S_vN(t_f) for the reference initial state
  std::vector<TraceEntry> trace;
  std::vector<double> generation_best;  // GA only: best F in each generation's population
  double wall_seconds = 0.0;
  Termination termination = Termination::IterationCap;
  int iterations = 0;
  int rejections = 0;
  bool singular_branch = false;
  bool clamp_bound = false;
};

// Fills distance, fidelity, fluence, functional and final entropy from a
// fresh propagation of `report.field`.
void finalize_report(const ControlProblem &problem, OptimizationReport &report, double alpha);

// Genetic search over ParameterizedField genes (amplitude, frequency and phase
// per qubit plus the duration, quantised to multiples of dt). Fitness is F.
// A non-empty `initial_population` replaces the random initial draw.
OptimizationReport ga_optimize(const ControlProblem &problem, const GaConfig &ga,
                               const GeneBounds &bounds, double dt,
                               const std::vector<ParameterizedField> &initial_population = {});

// Gradient descent C <- C - beta sin^r(pi t / t_f) dK/dC with backtracking on beta.
OptimizationReport grad_optimize(const ControlProblem &problem, const ControlField &initial,
                                 const TimeGrid &grid, const GradConfig &grad);

// GA followed by gradient refinement of the GA's best field.
OptimizationReport optimize(const ControlProblem &problem, const GaConfig &ga,
                            const GeneBounds &bounds, double dt, const GradConfig &grad);

}  // namespace spingate
