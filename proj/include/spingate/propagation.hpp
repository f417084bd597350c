#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "spingate/linalg.hpp"
#include "spingate/model.hpp"

namespace spingate {

// Uniform grid t_k = k * dt, k = 0..steps.
struct TimeGrid {
  double t_final = 1.0;
  int steps = 1;

  double dt() const { return t_final / steps; }
  double time(int k) const { return t_final * static_cast<double>(k) / steps; }
  int points() const { return steps + 1; }
  void validate() const;

  // Grid whose step is the largest value <= dt that divides t_final evenly.
  static TimeGrid with_max_step(double t_final, double dt);

  bool operator==(const TimeGrid &) const = default;
};

// Control amplitude sampled at every grid point.
struct ControlField {
  std::vector<double> samples;

  // Linear interpolation at the midpoint of step k.
  double midpoint(int k) const { return 0.5 * (samples[k] + samples[k + 1]); }
  static ControlField zero(const TimeGrid &grid) {
    return {std::vector<double>(static_cast<std::size_t>(grid.points()), 0.0)};
  }
};

// Throws std::invalid_argument on a size mismatch, NumericalError on a
// non-finite sample.
void check_field(const ControlField &field, const TimeGrid &grid);

// exp(-i H dt) for one piecewise-constant step, kept in the eigenbasis of H so
// that the exact derivative with respect to the control amplitude is available.
// The spin Hamiltonians here are real symmetric in the S_z product basis, so
// the eigenbasis is real.
struct StepPropagator {
  RVector energies;
  RMatrix basis;
  CMatrix propagator;
};

StepPropagator make_step(const RMatrix &hamiltonian, double dt);
// Throws std::invalid_argument when the Hamiltonian has an imaginary part.
StepPropagator make_step(const CMatrix &hamiltonian, double dt);

// Step propagators for a field on a grid; H_k = drift + C_mid(k) * control.
// Shared by the forward pass, the backward pass and the gradient.
class StepSequence {
 public:
  StepSequence(const HamiltonianTerms &terms, const ControlField &field, const TimeGrid &grid);

  std::span<const StepPropagator> steps() const { return steps_; }
  const StepPropagator &operator[](int k) const { return steps_[static_cast<std::size_t>(k)]; }
  int size() const { return static_cast<int>(steps_.size()); }
  int dimension() const { return dimension_; }
  double dt() const { return dt_; }

 private:
  std::vector<StepPropagator> steps_;
  int dimension_ = 0;
  double dt_ = 0.0;
};

struct PropagationResult {
  std::vector<CMatrix> unitaries;  // U(t_0) .. U(t_K)
  const CMatrix &final_unitary() const { return unitaries.back(); }
};

struct AdjointState {
  std::vector<CMatrix> adjoints;  // B(t_0) .. B(t_K)
};

PropagationResult propagate_forward(const HamiltonianTerms &terms, const ControlField &field,
                                    const TimeGrid &grid);
// Forward pass from an arbitrary starting operator (identity for U(0)).
PropagationResult propagate_forward(const StepSequence &steps, const CMatrix &initial);

// U(t_K) only; no trajectory or step cache is stored.
CMatrix propagate_final(const HamiltonianTerms &terms, const ControlField &field,
                        const TimeGrid &grid);

// B(t_k) = B(t_{k+1}) exp(-i H_k dt) from B(t_K) = b_final.
AdjointState propagate_backward(const HamiltonianTerms &terms, const ControlField &field,
                                const TimeGrid &grid, const CMatrix &b_final);
AdjointState propagate_backward(const StepSequence &steps, const CMatrix &b_final);

// Closed-form dynamics of the uncontrolled one-qubit/one-spin system started in
// |-> (x) |+>. Amplitudes are in the basis |++>, |+->, |-+>, |-->.
struct TwoParticleSolution {
  CVector amplitudes;
  CMatrix reduced_density;  // qubit, basis |+>, |->
  double rabi_frequency = 0.0;
};

TwoParticleSolution analytic_two_particle(double omega1, double omega2, double gamma, double t);

double rabi_frequency(double omega1, double omega2, double gamma);
// Complete revivals t_k = k pi / Omega (non-degenerate frequencies).
double revival_time(double omega1, double omega2, double gamma, int k);
// Partial revivals (k - 1/2) pi / Omega, present when |omega1 - omega2| << gamma.
double partial_revival_time(double omega1, double omega2, double gamma, int k);
// Degenerate case omega1 = omega2: revivals at k pi / (2 Omega).
double degenerate_revival_time(double gamma, int k);

// Two-column CSV with header `t,C`, written at full double precision.
void write_field_csv(const std::filesystem::path &path, const ControlField &field,
                     const TimeGrid &grid);
// Throws ConfigError when the file is unreadable or the times are not a
// uniform grid starting at zero.
std::pair<TimeGrid, ControlField> read_field_csv(const std::filesystem::path &path);

}  // namespace spingate
