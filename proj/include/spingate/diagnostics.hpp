#pragma once

#include <filesystem>
#include <vector>

#include "spingate/linalg.hpp"
#include "spingate/propagation.hpp"

namespace spingate {

// |->^{(x) m} (x) |+>^{(x) n}, with |+> the S_z = +1/2 state (basis index 0).
CVector reference_initial_state(int qubits, int environment);

// Tr_env |psi><psi| for a composite pure state, qubits-first ordering.
CMatrix reduced_density(const CVector &state, int qubits, int environment);
CMatrix reduced_density(const CMatrix &u, const CVector &initial, int qubits, int environment);

// Tolerance on the unit-trace precondition of the entropy.
inline constexpr double kTraceTolerance = 1e-8;
// Eigenvalues below this are clipped to zero before taking logarithms.
inline constexpr double kEigenvalueClip = 1e-12;

// -Tr rho ln rho; throws std::invalid_argument when |Tr rho - 1| > 1e-8.
double von_neumann_entropy(const CMatrix &rho);
double purity(const CMatrix &rho);

// F(t_k) = 1 - J(U(t_k), G) along a trajectory.
std::vector<double> fidelity_trajectory(const PropagationResult &prop, const CMatrix &gate,
                                        int qubits, int environment);

// K_{nu nu'} = sqrt(p_nu') <nu| U |nu'> restricted to the qubit factor.
struct KrausSet {
  int qubits = 1;
  int environment = 0;
  std::vector<double> populations;  // initial environment populations p_nu
  std::vector<CMatrix> operators;    // row-major in (nu, nu'), 0-based

  const CMatrix &at(int nu, int nu_prime) const {
    return operators[static_cast<std::size_t>(nu * pow2(environment) + nu_prime)];
  }
  // max |sum K^dag K - I|
  double completeness_error() const;
  CMatrix apply(const CMatrix &rho_qubits) const;
};

KrausSet kraus_operators(const CMatrix &u, const std::vector<double> &populations, int qubits,
                         int environment);

double frobenius_norm(const CMatrix &x);

// Frobenius weight of the operators that move population between environment
// basis states: sqrt(sum_{nu != nu'} ||K_{nu nu'}||_Fr^2). For one qubit and
// one environment spin starting in |+> this is ||K_21||_Fr.
double kraus_nonunitarity(const KrausSet &ks);

struct TrajectoryRow {
  double t = 0.0;
  double entropy = 0.0;
  double fidelity = 0.0;
  double kraus_norm = 0.0;
};

// Diagnostics for the reference initial state along a propagated trajectory,
// sampled every `stride` grid points (the final point is always included).
std::vector<TrajectoryRow> trajectory_diagnostics(const PropagationResult &prop,
                                                  const TimeGrid &grid, const CMatrix &gate,
                                                  int qubits, int environment, int stride = 1);

// CSV with header `t,S_vN,F,K21_fr`.
void write_trajectory_csv(const std::filesystem::path &path, const std::vector<TrajectoryRow> &rows);

}  // namespace spingate
