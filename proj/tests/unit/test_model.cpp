#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "spingate/model.hpp"

using namespace spingate;

TEST_CASE("single spin z operator is diag(1/2, -1/2)") {
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = -0.5;
  CHECK(max_abs(spin_operator(1, 0, Axis::Z) - expected) == 0.0);
}

TEST_CASE("S_1z on |++> has eigenvalue +1/2") {
  CVector plus_plus = CVector::Zero(4);
  plus_plus(0) = 1.0;
  const CVector out = spin_operator(2, 0, Axis::Z) * plus_plus;
  CHECK(max_abs(out - 0.5 * plus_plus) == 0.0);
}

TEST_CASE("operators on different slots commute exactly") {
  const CMatrix a = spin_operator(2, 0, Axis::X), b = spin_operator(2, 1, Axis::Y);
  CHECK(max_abs(a * b - b * a) == 0.0);
}

TEST_CASE("spin operators are traceless and Hermitian") {
  for (int slot = 0; slot < 3; ++slot)
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
      const CMatrix s = spin_operator(3, slot, axis);
      CHECK(std::abs(s.trace()) == 0.0);
      CHECK(hermiticity_error(s) == 0.0);
    }
  CHECK_THROWS_AS(spin_operator(2, 2, Axis::X), std::invalid_argument);
  CHECK_THROWS_AS(spin_operator(2, -1, Axis::X), std::invalid_argument);
}

TEST_CASE("one qubit with one environment spin matches the explicit 4x4 form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double w1 = u(rng), w2 = u(rng), g = 0.1 * u(rng), c = u(rng) - 1.0, mu = u(rng);
    SpinSystem s = make_system(1, 1, {w1, w2}, make_topology(TopologyKind::Star, {g, 0}, 1, 1));
    s.dipoles = {mu};
    const HamiltonianTerms t = assemble_hamiltonian(s);
    const CMatrix h = t.drift + c * t.control;
    RMatrix expected(4, 4);
    expected << w1 + w2 - 0.5 * g, 0, -mu * c, 0,
                0, w1 - w2 + 0.5 * g, -g, -mu * c,
                -mu * c, -g, w2 - w1 + 0.5 * g, 0,
                0, -mu * c, 0, -w1 - w2 - 0.5 * g;
    expected *= 0.5;
    CHECK(max_abs(h - expected.cast<cplx>()) < 1e-15);
  }
}

TEST_CASE("without couplings the drift is diagonal") {
  const SpinSystem s =
      make_system(1, 3, {1.0, 0.9, 1.1, 1.2}, make_topology(TopologyKind::Star, {0.0, 0}, 1, 3));
  const HamiltonianTerms t = assemble_hamiltonian(s);
  CMatrix off = t.drift;
  off.diagonal().setZero();
  CHECK(max_abs(off) == 0.0);
}

TEST_CASE("degenerate pair: drift spectrum follows the singlet/triplet split") {
  const double w = 1.0, g = 0.02;
  const SpinSystem s = make_system(1, 1, {w, w}, make_topology(TopologyKind::Star, {g, 0}, 1, 1));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(assemble_hamiltonian(s).drift);
  // triplet S1.S2 = 1/4, singlet -3/4; H = w Sz_total - g S1.S2
  std::vector<double> expected{-w - g / 4, -g / 4, 3 * g / 4, w - g / 4};
  std::sort(expected.begin(), expected.end());
  for (int i = 0; i < 4; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("assembled terms are Hermitian and control acts on the qubit only") {
  const SpinSystem s = make_system(1, 2, {1.0, 0.95, 1.05},
                                   make_topology(TopologyKind::Star, {0.02, 0}, 1, 2));
  const HamiltonianTerms t = assemble_hamiltonian(s);
  CHECK(hermiticity_error(t.drift) <= 1e-12);
  CHECK(hermiticity_error(t.control) <= 1e-12);
  CMatrix sx(2, 2);
  sx << 0, 0.5, 0.5, 0;
  CHECK(max_abs(t.control - kron(-sx, CMatrix::Identity(4, 4))) == 0.0);
}

TEST_CASE("Heisenberg term is symmetric in its two labels") {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const CMatrix ij = spin_operator(3, 0, a) * spin_operator(3, 2, a);
    const CMatrix ji = spin_operator(3, 2, a) * spin_operator(3, 0, a);
    CHECK(max_abs(ij - ji) == 0.0);
  }
}

TEST_CASE("topologies") {
  SUBCASE("star row") {
    const Topology t = make_topology(TopologyKind::Star, {0.02, 0}, 1, 4);
    for (int j = 1; j < 5; ++j) CHECK(t.couplings(0, j) == 0.02);
    CHECK(t.couplings(0, 0) == 0.0);
    CHECK(t.couplings.bottomRightCorner(4, 4).isZero(0.0));
  }
  SUBCASE("linear chain pairs") {
    const Topology t = make_topology(TopologyKind::LinearChainNN, {0.02, 0}, 1, 4);
    std::set<std::pair<int, int>> pairs;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        if (t.couplings(i, j) != 0.0) pairs.insert({i + 1, j + 1});
    CHECK(pairs == std::set<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 4}, {3, 5}});
  }
  SUBCASE("two-qubit triangle") {
    const Topology t = make_topology(TopologyKind::TwoQubitTriangle, {0.01, 0.1}, 2, 1);
    CHECK(t.couplings(0, 1) == 0.1);
    CHECK(t.couplings(0, 2) == 0.01);
    CHECK(t.couplings(1, 2) == 0.01);
    CHECK(t.couplings == t.couplings.transpose());
  }
  SUBCASE("lattices coincide with the star") {
    CHECK(make_topology(TopologyKind::Lattice2D, {0.02, 0}, 1, 4).couplings ==
          make_topology(TopologyKind::Star, {0.02, 0}, 1, 4).couplings);
    CHECK(make_topology(TopologyKind::Lattice3D, {0.02, 0}, 1, 6).couplings ==
          make_topology(TopologyKind::Star, {0.02, 0}, 1, 6).couplings);
  }
  SUBCASE("incompatible sizes") {
    CHECK_THROWS_AS(make_topology(TopologyKind::Star, {0.02, 0}, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_topology(TopologyKind::TwoQubitTriangle, {0.01, 0.1}, 2, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_topology(TopologyKind::Lattice2D, {0.02, 0}, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_topology(TopologyKind::Star, {-0.1, 0}, 1, 1), std::invalid_argument);
  }
  SUBCASE("names round-trip") {
    for (auto k : {TopologyKind::Star, TopologyKind::LinearChainNN, TopologyKind::Lattice2D,
                   TopologyKind::Lattice3D, TopologyKind::TwoQubitTriangle})
      CHECK(topology_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(topology_from_string("ring"), std::invalid_argument);
  }
}

TEST_CASE("system validation") {
  SpinSystem s = make_system(1, 1, {1.0, 1.0}, make_topology(TopologyKind::Star, {0.02, 0}, 1, 1));
  SUBCASE("wrong frequency count") {
    s.frequencies = {1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("asymmetric couplings") {
    s.couplings(0, 1) = 0.03;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("negative coupling") {
    s.couplings(0, 1) = s.couplings(1, 0) = -0.01;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("nonzero diagonal") {
    s.couplings(0, 0) = 0.1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("missing dipole") {
    s.dipoles.clear();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("non-finite frequency") {
    s.frequencies[1] = std::nan("");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}
