#include "spingate/model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace spingate {

void SpinSystem::validate() const {
  if (qubits < 1) throw std::invalid_argument("system needs at least one qubit");
  if (environment < 0) throw std::invalid_argument("environment size must be non-negative");
  if (particles() > 12) throw std::invalid_argument("too many particles for dense simulation");
  const auto n = static_cast<std::size_t>(particles());
  if (frequencies.size() != n)
    throw std::invalid_argument("expected " + std::to_string(n) + " frequencies, got " +
                                std::to_string(frequencies.size()));
  if (dipoles.size() != static_cast<std::size_t>(qubits))
    throw std::invalid_argument("expected one dipole per qubit");
  if (couplings.rows() != particles() || couplings.cols() != particles())
    throw std::invalid_argument("coupling matrix must be N x N");
  for (int i = 0; i < particles(); ++i) {
    if (!std::isfinite(frequencies[i])) throw std::invalid_argument("non-finite frequency");
    if (couplings(i, i) != 0.0) throw std::invalid_argument("coupling diagonal must be zero");
    for (int j = 0; j < particles(); ++j) {
      if (couplings(i, j) != couplings(j, i))
        throw std::invalid_argument("coupling matrix must be symmetric");
      if (!(couplings(i, j) >= 0.0)) throw std::invalid_argument("couplings must be >= 0");
    }
  }
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Star: return "star";
    case TopologyKind::LinearChainNN: return "linear_chain_nn";
    case TopologyKind::Lattice2D: return "lattice_2d";
    case TopologyKind::Lattice3D: return "lattice_3d";
    case TopologyKind::TwoQubitTriangle: return "two_qubit_triangle";
  }
  return "?";
}

TopologyKind topology_from_string(std::string_view name) {
  for (auto k : {TopologyKind::Star, TopologyKind::LinearChainNN, TopologyKind::Lattice2D,
                 TopologyKind::Lattice3D, TopologyKind::TwoQubitTriangle})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

namespace {

void set_pair(RMatrix &g, int i, int j, double value) {
  g(i, j) = value;
  g(j, i) = value;
}

}  // namespace

Topology make_topology(TopologyKind kind, const TopologyParams &params, int qubits,
                       int environment) {
  if (qubits < 1 || environment < 0) throw std::invalid_argument("invalid (m, n)");
  if (params.gamma < 0.0 || params.gamma_qubits < 0.0)
    throw std::invalid_argument("coupling constants must be >= 0");
  const int n_total = qubits + environment;
  Topology topo{kind, params, RMatrix::Zero(n_total, n_total)};
  auto require = [&](bool ok, const char *what) {
    if (!ok)
      throw std::invalid_argument(std::string(to_string(kind)) + " topology requires " + what);
  };
  auto fill_star = [&] {
    for (int j = 1; j < n_total; ++j) set_pair(topo.couplings, 0, j, params.gamma);
  };

  switch (kind) {
    case TopologyKind::Star:
      require(qubits == 1, "m = 1");
      fill_star();
      break;
    case TopologyKind::Lattice2D:
      require(qubits == 1 && environment == 4, "m = 1, n = 4");
      fill_star();
      break;
    case TopologyKind::Lattice3D:
      require(qubits == 1 && environment == 6, "m = 1, n = 6");
      fill_star();
      break;
    case TopologyKind::LinearChainNN:
      // e_n ... e_4 - e_2 - q_1 - e_3 - e_5 ... : even labels extend one arm,
      // odd labels the other (1-based labels, slot = label - 1).
      require(qubits == 1, "m = 1");
      for (int label = 2; label <= n_total; ++label) {
        const int neighbour = label <= 3 ? 1 : label - 2;
        set_pair(topo.couplings, label - 1, neighbour - 1, params.gamma);
      }
      break;
    case TopologyKind::TwoQubitTriangle:
      require(qubits == 2 && environment == 1, "m = 2, n = 1");
      set_pair(topo.couplings, 0, 1, params.gamma_qubits);
      set_pair(topo.couplings, 0, 2, params.gamma);
      set_pair(topo.couplings, 1, 2, params.gamma);
      break;
  }
  return topo;
}

CMatrix spin_operator(int particles, int slot, Axis axis) {
  if (particles < 1 || slot < 0 || slot >= particles)
    throw std::invalid_argument("spin operator slot " + std::to_string(slot) +
                                " out of range for " + std::to_string(particles) + " particles");
  CMatrix half(2, 2);
  switch (axis) {
    case Axis::X: half << 0.0, 0.5, 0.5, 0.0; break;
    case Axis::Y: half << 0.0, cplx(0, -0.5), cplx(0, 0.5), 0.0; break;
    case Axis::Z: half << 0.5, 0.0, 0.0, -0.5; break;
  }
  const CMatrix left = CMatrix::Identity(pow2(slot), pow2(slot));
  const CMatrix right = CMatrix::Identity(pow2(particles - slot - 1), pow2(particles - slot - 1));
  return kron(kron(left, half), right);
}

HamiltonianTerms assemble_hamiltonian(const SpinSystem &system) {
  system.validate();
  const int n_total = system.particles();
  const int dim = system.dimension();
  HamiltonianTerms terms{CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim)};

  std::vector<std::array<CMatrix, 3>> spins(static_cast<std::size_t>(n_total));
  for (int i = 0; i < n_total; ++i)
    spins[i] = {spin_operator(n_total, i, Axis::X), spin_operator(n_total, i, Axis::Y),
                spin_operator(n_total, i, Axis::Z)};

  for (int i = 0; i < n_total; ++i) terms.drift += system.frequencies[i] * spins[i][2];
  for (int i = 0; i < n_total; ++i)
    for (int j = i + 1; j < n_total; ++j) {
      const double g = system.couplings(i, j);
      if (g == 0.0) continue;
      for (int a = 0; a < 3; ++a) terms.drift -= g * (spins[i][a] * spins[j][a]);
    }
  for (int i = 0; i < system.qubits; ++i) terms.control -= system.dipoles[i] * spins[i][0];
  return terms;
}

SpinSystem make_system(int qubits, int environment, std::vector<double> frequencies,
                       const Topology &topology) {
  SpinSystem s;
  s.qubits = qubits;
  s.environment = environment;
  s.frequencies = std::move(frequencies);
  s.dipoles.assign(static_cast<std::size_t>(qubits), 1.0);
  s.couplings = topology.couplings;
  s.validate();
  return s;
}

}  // namespace spingate
