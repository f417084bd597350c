#include "spingate/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "spingate/diagnostics.hpp"
#include "spingate/parallel.hpp"

namespace spingate {

ControlProblem make_problem(const SpinSystem &system, const GateTarget &target) {
  system.validate();
  if (target.matrix.rows() != pow2(system.qubits) || target.matrix.cols() != target.matrix.rows())
    throw std::invalid_argument("gate '" + target.name + "' does not act on " +
                                std::to_string(system.qubits) + " qubit(s)");
  return {system, target, assemble_hamiltonian(system)};
}

std::string_view to_string(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::Sin2: return "sin2";
    case EnvelopeKind::Flat: return "flat";
    case EnvelopeKind::Gaussian: return "gaussian";
  }
  return "?";
}

EnvelopeKind envelope_from_string(std::string_view name) {
  for (auto k : {EnvelopeKind::Sin2, EnvelopeKind::Flat, EnvelopeKind::Gaussian})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown envelope '" + std::string(name) + "'");
}

double Envelope::operator()(double t, double t_final) const {
  switch (kind) {
    case EnvelopeKind::Flat: return 1.0;
    case EnvelopeKind::Sin2: {
      const double x = t / t_final;
      if (x <= 0.0 || x >= 1.0) return 0.0;
      const double s = std::sin(M_PI * x);
      return s * s;
    }
    case EnvelopeKind::Gaussian: {
      const double z = (t - 0.5 * t_final) / width;
      return std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

ControlField render_field(const ParameterizedField &p, const TimeGrid &grid) {
  grid.validate();
  if (std::abs(grid.t_final - p.t_final) > 1e-9 * std::max(1.0, p.t_final))
    throw std::invalid_argument("field duration does not match the time grid");
  if (p.envelope.kind == EnvelopeKind::Gaussian && !(p.envelope.width > 0.0))
    throw std::invalid_argument("gaussian envelope needs a positive width");
  ControlField field = ControlField::zero(grid);
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    double sum = 0.0;
    for (const auto &c : p.components) sum += c.amplitude * std::cos(c.frequency * t + c.phase);
    field.samples[static_cast<std::size_t>(k)] = p.envelope(t, grid.t_final) * sum;
  }
  return field;
}

double fluence(const ControlField &field, const TimeGrid &grid) {
  check_field(field, grid);
  const auto &c = field.samples;
  double sum = 0.5 * (c.front() * c.front() + c.back() * c.back());
  for (std::size_t k = 1; k + 1 < c.size(); ++k) sum += c[k] * c[k];
  return sum * grid.dt();
}

namespace {

CMatrix final_from_steps(const StepSequence &steps) {
  CMatrix u = CMatrix::Identity(steps.dimension(), steps.dimension());
  for (const auto &s : steps.steps()) u = s.propagator * u;
  return u;
}

// Elementwise (e^{-i l_p dt} - e^{-i l_q dt}) / (l_p - l_q), written with a
// sinc so that near-degenerate pairs stay accurate.
CMatrix divided_differences(const RVector &energies, double dt) {
  const Eigen::Index d = energies.size();
  const CVector half_phase = (-0.5 * kI * dt * energies.cast<cplx>()).array().exp();
  CMatrix gamma(d, d);
  for (Eigen::Index q = 0; q < d; ++q)
    for (Eigen::Index p = 0; p < d; ++p) {
      const double half = 0.5 * (energies(p) - energies(q)) * dt;
      const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
      gamma(p, q) = -kI * dt * half_phase(p) * half_phase(q) * sinc;
    }
  return gamma;
}

double quadrature_weight(int k, const TimeGrid &grid) {
  return (k == 0 || k == grid.steps) ? 0.5 * grid.dt() : grid.dt();
}

}  // namespace

Evaluation evaluate_field(const ControlProblem &problem, const ControlField &field,
                          const TimeGrid &grid, double alpha) {
  Evaluation e;
  e.final_unitary = propagate_final(problem.terms, field, grid);
  e.distance = distance(e.final_unitary, problem.target.matrix, problem.qubits(),
                        problem.environment())
                   .distance;
  e.fluence = fluence(field, grid);
  e.functional = e.distance + 0.5 * alpha * e.fluence;
  return e;
}

ControlGradient control_gradient(const ControlProblem &problem, const StepSequence &steps,
                                 const ControlField &field, const TimeGrid &grid, double alpha) {
  check_field(field, grid);
  if (steps.size() != grid.steps) throw std::invalid_argument("step cache does not match the grid");
  ControlGradient out;
  out.final_unitary = final_from_steps(steps);
  const DistanceGradient dj = gradient_dJ_dU(out.final_unitary, problem.target.matrix,
                                             problem.qubits(), problem.environment());
  out.distance = dj.distance;
  out.singular_branch = dj.singular_branch;
  out.fluence = fluence(field, grid);
  out.functional = out.distance + 0.5 * alpha * out.fluence;

  // Derivative of J with respect to the amplitude of each step:
  // dJ/dc_j = -2 Re Tr[B(t_{j+1}) dP_j/dc U(t_j)], with M_j = U(t_j) B(t_j)
  // carried backward as M_j = P_j^dag M_{j+1} P_j.
  std::vector<double> step_grad(static_cast<std::size_t>(grid.steps), 0.0);
  if (!dj.at_optimum) {
    const double dt = grid.dt();
    const RMatrix control = require_real(problem.terms.control);
    CMatrix m = out.final_unitary * (-dj.d_distance.transpose());
    CMatrix y;
    RMatrix h_tilde;
    for (int j = grid.steps - 1; j >= 0; --j) {
      const StepPropagator &s = steps[j];
      const CVector back_phase = (kI * dt * s.energies.cast<cplx>()).array().exp();
      // V^T U(t_j) B(t_{j+1}) V
      y = back_phase.asDiagonal() * multiply(multiply(s.basis.transpose(), m), s.basis);
      h_tilde.noalias() = s.basis.transpose() * control * s.basis;
      const CMatrix gamma = divided_differences(s.energies, dt);
      const cplx tr = (y.transpose().array() * gamma.array() * h_tilde.cast<cplx>().array()).sum();
      step_grad[static_cast<std::size_t>(j)] = -2.0 * tr.real();
      m = multiply(multiply(s.basis, CMatrix(y * back_phase.conjugate().asDiagonal())),
                   s.basis.transpose());
    }
  }

  const auto points = static_cast<std::size_t>(grid.points());
  out.sample_gradient.assign(points, 0.0);
  out.functional_derivative.assign(points, 0.0);
  for (int k = 0; k < grid.points(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double g = 0.0;
    if (k > 0) g += 0.5 * step_grad[uk - 1];
    if (k < grid.steps) g += 0.5 * step_grad[uk];
    const double w = quadrature_weight(k, grid);
    g += alpha * w * field.samples[uk];
    out.sample_gradient[uk] = g;
    out.functional_derivative[uk] = g / w;
  }
  return out;
}

ControlGradient control_gradient(const ControlProblem &problem, const ControlField &field,
                                 const TimeGrid &grid, double alpha) {
  const StepSequence steps(problem.terms, field, grid);
  return control_gradient(problem, steps, field, grid, alpha);
}

std::vector<double> adjoint_field_derivative(const HamiltonianTerms &terms,
                                             const PropagationResult &forward,
                                             const AdjointState &adjoint,
                                             const ControlField &field, double alpha) {
  if (forward.unitaries.size() != adjoint.adjoints.size() ||
      forward.unitaries.size() != field.samples.size())
    throw std::invalid_argument("forward, adjoint and field lengths differ");
  const CMatrix mu = -terms.control;
  std::vector<double> out(field.samples.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = 2.0 * (mu * forward.unitaries[k] * adjoint.adjoints[k]).trace().imag() +
             alpha * field.samples[k];
  return out;
}

void GaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("GA population must be >= 2");
  auto rate = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!rate(crossover_rate) || !rate(mutation_rate))
    throw std::invalid_argument("GA crossover and mutation rates must lie in [0, 1]");
  if (generations < 1) throw std::invalid_argument("GA needs at least one generation");
  if (tournament_size < 1) throw std::invalid_argument("tournament size must be >= 1");
  if (elites < 0 || elites > population) throw std::invalid_argument("invalid elite count");
  if (mutation_scale < 0.0) throw std::invalid_argument("mutation scale must be >= 0");
}

std::string_view to_string(DescentMethod m) {
  return m == DescentMethod::Steepest ? "steepest" : "conjugate";
}

DescentMethod descent_from_string(std::string_view name) {
  if (name == "steepest") return DescentMethod::Steepest;
  if (name == "conjugate") return DescentMethod::Conjugate;
  throw std::invalid_argument("unknown descent method '" + std::string(name) + "'");
}

void GradConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
  if (!(r >= 0.5 && r <= 1.0)) throw std::invalid_argument("r must lie in [1/2, 1]");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (max_backtracks < 0) throw std::invalid_argument("max_backtracks must be >= 0");
  if (!(beta_growth >= 1.0)) throw std::invalid_argument("beta_growth must be >= 1");
  if (amplitude_clamp < 0.0) throw std::invalid_argument("amplitude_clamp must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::IterationCap: return "iteration_cap";
    case Termination::Stationary: return "stationary";
    case Termination::LineSearchFailed: return "line_search_failed";
    case Termination::TargetReached: return "target_reached";
    case Termination::FitnessThreshold: return "fitness_threshold";
    case Termination::GenerationBudget: return "generation_budget";
  }
  return "?";
}

void finalize_report(const ControlProblem &problem, OptimizationReport &report, double alpha) {
  const Evaluation e = evaluate_field(problem, report.field, report.grid, alpha);
  report.distance = e.distance;
  report.fidelity = 1.0 - e.distance;
  report.fluence = e.fluence;
  report.functional = e.functional;
  const CVector psi0 = reference_initial_state(problem.qubits(), problem.environment());
  report.final_entropy = von_neumann_entropy(
      reduced_density(e.final_unitary, psi0, problem.qubits(), problem.environment()));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Genes: (A, w, theta) per component, then t_f.
struct GeneLayout {
  int components;
  int size() const { return 3 * components + 1; }
};

std::vector<double> encode(const ParameterizedField &p) {
  std::vector<double> g;
  for (const auto &c : p.components) {
    g.push_back(c.amplitude);
    g.push_back(c.frequency);
    g.push_back(c.phase);
  }
  g.push_back(p.t_final);
  return g;
}

TimeGrid quantized_grid(double t_final, double dt) {
  const int steps = std::max(1, static_cast<int>(std::lround(t_final / dt)));
  return TimeGrid{steps * dt, steps};
}

ParameterizedField decode(const std::vector<double> &genes, const GeneLayout &layout,
                          const Envelope &envelope, double dt) {
  ParameterizedField p;
  p.envelope = envelope;
  for (int i = 0; i < layout.components; ++i)
    p.components.push_back({genes[3 * i], genes[3 * i + 1], genes[3 * i + 2]});
  p.t_final = quantized_grid(genes.back(), dt).t_final;
  return p;
}

struct GeneRange {
  double lo, hi;
  bool periodic;
};

std::vector<GeneRange> gene_ranges(const GeneLayout &layout, const GeneBounds &b) {
  std::vector<GeneRange> r;
  for (int i = 0; i < layout.components; ++i) {
    r.push_back({0.0, b.amplitude_max, false});
    r.push_back({b.frequency_min, b.frequency_max, false});
    r.push_back({0.0, 2.0 * M_PI, true});
  }
  r.push_back({b.t_final_min, b.t_final_max, false});
  return r;
}

double fix_gene(double x, const GeneRange &range) {
  if (range.periodic) {
    const double span = range.hi - range.lo;
    x = std::fmod(x - range.lo, span);
    if (x < 0.0) x += span;
    return range.lo + x;
  }
  return std::clamp(x, range.lo, range.hi);
}

}  // namespace

OptimizationReport ga_optimize(const ControlProblem &problem, const GaConfig &ga,
                               const GeneBounds &bounds, double dt,
                               const std::vector<ParameterizedField> &initial_population) {
  ga.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("GA time step must be positive");
  if (bounds.t_final_min > bounds.t_final_max || !(bounds.t_final_min > 0.0) ||
      bounds.frequency_min > bounds.frequency_max || bounds.amplitude_max < 0.0)
    throw std::invalid_argument("invalid GA gene bounds");
  const auto start = Clock::now();
  const GeneLayout layout{problem.qubits()};
  const auto ranges = gene_ranges(layout, bounds);
  std::mt19937_64 rng(ga.seed);

  std::vector<std::vector<double>> population;
  if (!initial_population.empty()) {
    for (const auto &p : initial_population) {
      if (static_cast<int>(p.components.size()) != layout.components)
        throw std::invalid_argument("initial individual needs one component per qubit");
      population.push_back(encode(p));
    }
  } else {
    for (int i = 0; i < ga.population; ++i) {
      std::vector<double> genes;
      for (const auto &r : ranges) genes.push_back(std::uniform_real_distribution<>(r.lo, r.hi)(rng));
      population.push_back(std::move(genes));
    }
  }
  const std::size_t pop_size = population.size();

  auto fitness_of = [&](const std::vector<double> &genes) {
    const ParameterizedField p = decode(genes, layout, ga.envelope, dt);
    const TimeGrid grid = quantized_grid(p.t_final, dt);
    const CMatrix u = propagate_final(problem.terms, render_field(p, grid), grid);
    return distance(u, problem.target.matrix, problem.qubits(), problem.environment()).fidelity();
  };

  OptimizationReport report;
  std::vector<double> fitness(pop_size);
  std::vector<double> best_genes;
  double best_fitness = -1.0;
  report.termination = Termination::GenerationBudget;

  for (int gen = 0; gen < ga.generations; ++gen) {
    parallel_for(pop_size, ga.threads, [&](std::size_t i) { fitness[i] = fitness_of(population[i]); });

    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
    if (fitness[order[0]] > best_fitness) {
      best_fitness = fitness[order[0]];
      best_genes = population[order[0]];
    }
    const double generation_best = fitness[order[0]];
    report.generation_best.push_back(generation_best);
    report.trace.push_back({gen, 1.0 - generation_best, 1.0 - generation_best, 0.0, 0.0, false});
    report.iterations = gen + 1;
    if (best_fitness >= ga.fitness_threshold) {
      report.termination = Termination::FitnessThreshold;
      break;
    }
    if (gen + 1 == ga.generations) break;

    auto tournament = [&]() -> const std::vector<double> & {
      std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
      std::size_t best = pick(rng);
      for (int t = 1; t < ga.tournament_size; ++t) {
        const std::size_t c = pick(rng);
        if (fitness[c] > fitness[best]) best = c;
      }
      return population[best];
    };

    std::vector<std::vector<double>> next;
    next.reserve(pop_size);
    for (int e = 0; e < ga.elites && next.size() < pop_size; ++e)
      next.push_back(population[order[static_cast<std::size_t>(e)]]);
    std::uniform_real_distribution<> unit(0.0, 1.0);
    while (next.size() < pop_size) {
      const auto &a = tournament();
      const auto &b = tournament();
      std::vector<double> child = a;
      if (unit(rng) < ga.crossover_rate) {
        const double lambda = unit(rng);
        for (std::size_t g = 0; g < child.size(); ++g) child[g] = b[g] + lambda * (a[g] - b[g]);
      }
      for (std::size_t g = 0; g < child.size(); ++g)
        if (unit(rng) < ga.mutation_rate) {
          const double sigma = ga.mutation_scale * (ranges[g].hi - ranges[g].lo);
          if (sigma > 0.0) child[g] += std::normal_distribution<>(0.0, sigma)(rng);
          child[g] = fix_gene(child[g], ranges[g]);
        }
      next.push_back(std::move(child));
    }
    population = std::move(next);
  }

  const ParameterizedField best = decode(best_genes, layout, ga.envelope, dt);
  report.grid = quantized_grid(best.t_final, dt);
  report.field = render_field(best, report.grid);
  report.parameters = best;
  finalize_report(problem, report, 0.0);
  report.wall_seconds = seconds_since(start);
  return report;
}

OptimizationReport grad_optimize(const ControlProblem &problem, const ControlField &initial,
                                 const TimeGrid &grid, const GradConfig &grad) {
  grad.validate();
  check_field(initial, grid);
  const auto start = Clock::now();

  std::vector<double> envelope(static_cast<std::size_t>(grid.points()), 0.0);
  for (int k = 1; k < grid.steps; ++k)
    envelope[static_cast<std::size_t>(k)] = std::pow(std::sin(M_PI * k / grid.steps), grad.r);

  OptimizationReport report;
  report.grid = grid;
  ControlField field = initial;
  double beta = grad.beta;
  auto steps = std::make_unique<StepSequence>(problem.terms, field, grid);
  ControlGradient current = control_gradient(problem, *steps, field, grid, grad.alpha);
  report.singular_branch = current.singular_branch;
  report.trace.push_back({0, current.distance, current.functional, current.fluence, beta, false});
  report.termination = Termination::IterationCap;

  const bool conjugate = grad.method == DescentMethod::Conjugate;
  std::vector<double> direction(field.samples.size(), 0.0);
  std::vector<double> weighted(field.samples.size()), previous_weighted, previous_gradient;

  auto make_trial = [&](double step, bool &clamped) {
    ControlField trial = field;
    for (std::size_t k = 0; k < direction.size(); ++k) {
      double c = field.samples[k] - step * direction[k];
      if (grad.amplitude_clamp > 0.0 && std::abs(c) > grad.amplitude_clamp) {
        c = std::copysign(grad.amplitude_clamp, c);
        clamped = true;
      }
      trial.samples[k] = c;
    }
    return trial;
  };
  struct Trial {
    ControlField field;
    std::unique_ptr<StepSequence> steps;
    double distance = 1.0, functional = 0.0, fluence = 0.0;
    bool finite = false, clamped = false;
  };
  auto run_trial = [&](double step) {
    Trial t;
    t.field = make_trial(step, t.clamped);
    t.finite = std::all_of(t.field.samples.begin(), t.field.samples.end(),
                           [](double c) { return std::isfinite(c); });
    if (!t.finite) return t;
    t.steps = std::make_unique<StepSequence>(problem.terms, t.field, grid);
    t.distance = distance(final_from_steps(*t.steps), problem.target.matrix, problem.qubits(),
                          problem.environment())
                     .distance;
    t.fluence = fluence(t.field, grid);
    t.functional = t.distance + 0.5 * grad.alpha * t.fluence;
    t.finite = std::isfinite(t.functional);
    return t;
  };

  int stall = 0;
  for (int iter = 1; iter <= grad.max_iterations; ++iter) {
    report.iterations = iter;
    if (grad.target_distance > 0.0 && current.distance <= grad.target_distance) {
      report.termination = Termination::TargetReached;
      break;
    }
    double largest = 0.0;
    for (std::size_t k = 0; k < weighted.size(); ++k) {
      weighted[k] = envelope[k] * current.functional_derivative[k];
      largest = std::max(largest, std::abs(weighted[k]));
    }
    if (largest == 0.0) {
      report.termination = Termination::Stationary;
      break;
    }
    const auto &gradient = current.sample_gradient;
    double coefficient = 0.0;
    if (conjugate && !previous_gradient.empty()) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < weighted.size(); ++k) {
        num += weighted[k] * (gradient[k] - previous_gradient[k]);
        den += previous_weighted[k] * previous_gradient[k];
      }
      coefficient = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    }
    for (std::size_t k = 0; k < direction.size(); ++k)
      direction[k] = weighted[k] + coefficient * direction[k];
    // dK/dbeta at beta = 0 along C - beta * direction
    double slope = 0.0;
    for (std::size_t k = 0; k < direction.size(); ++k) slope -= gradient[k] * direction[k];
    if (slope >= 0.0) {
      direction = weighted;
      slope = 0.0;
      for (std::size_t k = 0; k < direction.size(); ++k) slope -= gradient[k] * direction[k];
    }
    if (conjugate) {
      previous_weighted = weighted;
      previous_gradient = gradient;
    }

    Trial accepted;
    bool found = false;
    for (int bt = 0; bt <= grad.max_backtracks; ++bt) {
      Trial t = run_trial(beta);
      if (t.finite && t.functional < current.functional) {
        accepted = std::move(t);
        found = true;
        break;
      }
      if (t.finite) report.trace.push_back({iter, t.distance, t.functional, t.fluence, beta, true});
      ++report.rejections;
      beta *= 0.5;
    }
    if (!found) {
      report.termination = Termination::LineSearchFailed;
      break;
    }
    if (conjugate) {
      // Minimiser of the parabola through K(0), K'(0) and K(beta).
      const double curvature = accepted.functional - current.functional - slope * beta;
      if (curvature > 0.0) {
        const double refined = std::min(grad.beta, -slope * beta * beta / (2.0 * curvature));
        if (refined > 0.0 && std::abs(refined / beta - 1.0) > 0.1) {
          Trial t = run_trial(refined);
          if (t.finite && t.functional < accepted.functional) {
            accepted = std::move(t);
            beta = refined;
          } else if (t.finite) {
            report.trace.push_back({iter, t.distance, t.functional, t.fluence, refined, true});
          }
        }
      }
    }

    const double drop = current.functional - accepted.functional;
    report.clamp_bound = report.clamp_bound || accepted.clamped;
    field = std::move(accepted.field);
    steps = std::move(accepted.steps);
    current = control_gradient(problem, *steps, field, grid, grad.alpha);
    report.singular_branch = report.singular_branch || current.singular_branch;
    report.trace.push_back({iter, current.distance, current.functional, current.fluence, beta, false});
    beta = std::min(grad.beta, beta * grad.beta_growth);

    if (grad.checkpoint_every > 0 && !grad.checkpoint_path.empty() &&
        iter % grad.checkpoint_every == 0)
      write_field_csv(grad.checkpoint_path, field, grid);

    stall = drop < grad.tolerance ? stall + 1 : 0;
    if (stall >= grad.patience) {
      report.termination = Termination::Converged;
      break;
    }
  }

  report.field = std::move(field);
  finalize_report(problem, report, grad.alpha);
  report.wall_seconds = seconds_since(start);
  return report;
}

OptimizationReport optimize(const ControlProblem &problem, const GaConfig &ga,
                            const GeneBounds &bounds, double dt, const GradConfig &grad) {
  const auto start = Clock::now();
  const OptimizationReport seed = ga_optimize(problem, ga, bounds, dt);
  OptimizationReport out = grad_optimize(problem, seed.field, seed.grid, grad);
  out.parameters = seed.parameters;
  out.generation_best = seed.generation_best;
  out.wall_seconds = seconds_since(start);
  return out;
}

}  // namespace spingate
