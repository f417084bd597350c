#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spingate/linalg.hpp"

namespace spingate {

// Composite system of `qubits` controlled two-level particles followed by
// `environment` uncontrolled ones. Tensor slot 0 is qubit 1; environment
// particles occupy the trailing slots. Units: hbar = omega_1 = mu_i = 1.
struct SpinSystem {
  int qubits = 1;
  int environment = 0;
  std::vector<double> frequencies;  // one per particle
  std::vector<double> dipoles;      // one per qubit
  RMatrix couplings;                // symmetric, zero diagonal, entries >= 0

  int particles() const { return qubits + environment; }
  int dimension() const { return pow2(particles()); }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class TopologyKind { Star, LinearChainNN, Lattice2D, Lattice3D, TwoQubitTriangle };

std::string_view to_string(TopologyKind kind);
TopologyKind topology_from_string(std::string_view name);

struct TopologyParams {
  double gamma = 0.0;        // qubit-environment (or chain) coupling
  double gamma_qubits = 0.0;  // qubit-qubit coupling, TwoQubitTriangle only
};

struct Topology {
  TopologyKind kind = TopologyKind::Star;
  TopologyParams params;
  RMatrix couplings;
};

// Coupling matrix for one of the supported layouts. Star, Lattice2D,
// Lattice3D and LinearChainNN require one qubit; the lattices ignore vertex
// particles and therefore coincide with Star (n = 4 and n = 6 respectively).
// TwoQubitTriangle requires m = 2, n = 1 and sets gamma_12 = gamma_qubits,
// gamma_13 = gamma_23 = gamma.
Topology make_topology(TopologyKind kind, const TopologyParams &params, int qubits,
                       int environment);

enum class Axis { X, Y, Z };

// I (x) ... (x) sigma_axis / 2 (x) ... (x) I with the spin half at `slot`
// (0-based, qubits first).
CMatrix spin_operator(int particles, int slot, Axis axis);

struct HamiltonianTerms {
  CMatrix drift;    // H_0 + H_int
  CMatrix control;  // operator multiplying C(t): -sum_i mu_i S_ix
};

HamiltonianTerms assemble_hamiltonian(const SpinSystem &system);

// Convenience constructor: default dipoles of 1 and the given topology.
SpinSystem make_system(int qubits, int environment, std::vector<double> frequencies,
                       const Topology &topology);

}  // namespace spingate
