#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spingate/linalg.hpp"

namespace spingate {

enum class GateKind { Hadamard, Identity, Pi8, CNOT, Custom };

struct GateTarget {
  GateKind kind = GateKind::Hadamard;
  std::string name;
  CMatrix matrix;  // 2^m x 2^m unitary

  int qubits() const;
};

GateTarget make_gate(GateKind kind);
// Accepts "hadamard", "identity", "pi8", "cnot" (case-insensitive).
GateTarget gate_by_name(std::string_view name);
// Rows of `re,im` pairs; throws ConfigError when malformed or not unitary.
GateTarget read_gate_csv(const std::filesystem::path &path);

// Inner quantity 1 - 2^-N sum(sigma) below this is treated as rounding noise.
inline constexpr double kDistanceRoundingFloor = 1e-14;
// Singular values of Q below this use the pseudo-inverse branch of dJ/dU.
inline constexpr double kSingularValueFloor = 1e-10;

struct DistanceResult {
  double distance = 1.0;       // J in [0, 1]
  double singular_sum = 0.0;   // Tr sqrt(Q^dag Q)
  CMatrix q;                   // 2^n x 2^n
  RVector singular_values;
  CMatrix environment_unitary;  // minimising Phi, polar factor of Q

  double fidelity() const { return 1.0 - distance; }
};

// Q_{nu nu'} = sum_{i i'} conj(G_{i i'}) <i, nu| U |i', nu'>, qubits-first ordering.
CMatrix build_q_matrix(const CMatrix &u, const CMatrix &gate, int qubits, int environment);

DistanceResult distance(const CMatrix &u, const CMatrix &gate, int qubits, int environment);

struct ClosedDistance {
  double distance = 1.0;  // J
  double squared = 1.0;   // J_cs = J^2
};

ClosedDistance distance_closed(const CMatrix &u_qubits, const CMatrix &gate);

struct DistanceGradient {
  CMatrix d_distance;          // (dJ/dU)_{ab}, Wirtinger derivative (conj(U) held fixed)
  double distance = 1.0;
  bool singular_branch = false;  // some singular value of Q fell below the floor
  bool at_optimum = false;       // J == 0, gradient reported as zero
};

DistanceGradient gradient_dJ_dU(const CMatrix &u, const CMatrix &gate, int qubits,
                                int environment);

// B(t_f) = -(dJ/dU)^T.
CMatrix adjoint_terminal(const CMatrix &u, const CMatrix &gate, int qubits, int environment);

}  // namespace spingate
