#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "spingate/diagnostics.hpp"
#include "spingate/objective.hpp"

using namespace spingate;

namespace {

const double kOmega2 = 1.0 / (M_PI - 2.14);

HamiltonianTerms pair_terms(double gamma) {
  return assemble_hamiltonian(make_system(1, 1, {1.0, kOmega2},
                                          make_topology(TopologyKind::Star, {gamma, 0}, 1, 1)));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1 - p) * std::log(1 - p);
}

}  // namespace

TEST_CASE("reference initial state") {
  const CVector psi = reference_initial_state(1, 2);
  CHECK(psi.size() == 8);
  CHECK(psi(4) == cplx(1.0));  // |-++>
  CHECK(psi.norm() == 1.0);
  const CMatrix rho = reduced_density(psi, 1, 2);
  CHECK(rho(1, 1) == cplx(1.0));
  CHECK(std::abs(rho(0, 0)) == 0.0);
  CHECK(reference_initial_state(2, 1)(6) == cplx(1.0));  // |--+>
  CHECK_THROWS_AS(reference_initial_state(0, 1), std::invalid_argument);
}

TEST_CASE("reduced density against the explicit partial trace") {
  std::mt19937_64 rng(43);
  for (auto [m, n] : {std::pair{1, 1}, {1, 3}, {2, 2}}) {
    const CVector psi = oracle::random_state(1 << (m + n), rng);
    CHECK(max_abs(reduced_density(psi, m, n) - oracle::partial_trace(psi, m, n)) < 1e-14);
  }
  CHECK_THROWS_AS(reduced_density(CVector::Zero(6), 1, 1), std::invalid_argument);
}

TEST_CASE("uncontrolled trajectory follows the closed-form populations and entropy") {
  const HamiltonianTerms t = pair_terms(0.02);
  const TimeGrid g = TimeGrid::with_max_step(320.0, 0.02);
  const PropagationResult prop = propagate_forward(t, ControlField::zero(g), g);
  const auto rows = trajectory_diagnostics(prop, g, make_gate(GateKind::Hadamard).matrix, 1, 1, 40);
  double worst_s = 0.0, worst_k = 0.0;
  for (const auto &row : rows) {
    const TwoParticleSolution a = analytic_two_particle(1.0, kOmega2, 0.02, row.t);
    const double p = a.reduced_density(0, 0).real();
    worst_s = std::max(worst_s, std::abs(row.entropy - binary_entropy(p)));
    const double k21 = std::abs(std::sin(a.rabi_frequency * row.t)) * 0.02 / (2 * a.rabi_frequency);
    worst_k = std::max(worst_k, std::abs(row.kraus_norm - k21));
  }
  CHECK(worst_s < 1e-6);
  CHECK(worst_k < 1e-8);
  CHECK(rows.back().t == 320.0);
}

TEST_CASE("entropy returns to zero at the revival times") {
  const HamiltonianTerms t = pair_terms(0.02);
  const double t1 = revival_time(1.0, kOmega2, 0.02, 1);
  for (double tf : {t1, 2 * t1}) {
    const TimeGrid g = TimeGrid::with_max_step(tf, 0.02);
    const CMatrix u = propagate_final(t, ControlField::zero(g), g);
    const CMatrix rho = reduced_density(u, reference_initial_state(1, 1), 1, 1);
    CHECK(von_neumann_entropy(rho) < 1e-6);
    CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("no coupling keeps the qubit pure") {
  const HamiltonianTerms t = pair_terms(0.0);
  const TimeGrid g{50.0, 500};
  ControlField f = ControlField::zero(g);
  for (int k = 0; k < g.points(); ++k) f.samples[static_cast<std::size_t>(k)] = std::cos(g.time(k));
  const PropagationResult prop = propagate_forward(t, f, g);
  const CVector psi0 = reference_initial_state(1, 1);
  double worst = 0.0;
  for (const auto &u : prop.unitaries)
    worst = std::max(worst, std::abs(purity(reduced_density(u, psi0, 1, 1)) - 1.0));
  CHECK(worst < 1e-12);
}

TEST_CASE("von Neumann entropy") {
  CHECK(von_neumann_entropy(CMatrix::Identity(2, 2) / 2.0) == doctest::Approx(std::log(2.0)));
  CHECK(von_neumann_entropy(CMatrix::Identity(4, 4) / 4.0) == doctest::Approx(std::log(4.0)));
  CMatrix pure = CMatrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  CHECK(von_neumann_entropy(pure) == 0.0);
  CMatrix mixed = CMatrix::Zero(2, 2);
  mixed(0, 0) = 0.3;
  mixed(1, 1) = 0.7;
  CHECK(von_neumann_entropy(mixed) == doctest::Approx(binary_entropy(0.3)));
  CHECK_THROWS_AS(von_neumann_entropy(CMatrix::Identity(2, 2)), std::invalid_argument);
  std::mt19937_64 rng(47);
  for (int k = 0; k < 200; ++k) {
    const CMatrix rho = reduced_density(oracle::random_state(8, rng), 1, 2);
    const double s = von_neumann_entropy(rho);
    CHECK((s >= 0.0 && s <= std::log(2.0) + 1e-14));
  }
}

TEST_CASE("fidelity trajectory") {
  const HamiltonianTerms t = pair_terms(0.02);
  const TimeGrid g{5.0, 50};
  const PropagationResult prop = propagate_forward(t, ControlField::zero(g), g);
  const auto fid = fidelity_trajectory(prop, CMatrix::Identity(2, 2), 1, 1);
  CHECK(fid.size() == 51);
  CHECK(fid.front() == 1.0);
  const auto fh = fidelity_trajectory(prop, make_gate(GateKind::Hadamard).matrix, 1, 1);
  CHECK(fh.front() == doctest::Approx(0.0).epsilon(1e-15));
  for (std::size_t k = 0; k < fid.size(); ++k)
    CHECK(fid[k] == doctest::Approx(distance(prop.unitaries[k], CMatrix::Identity(2, 2), 1, 1).fidelity()));
}

TEST_CASE("Kraus operators") {
  const std::vector<double> pop{1.0, 0.0};
  SUBCASE("pure environment start") {
    const double tf = 60.0;
    const TimeGrid g = TimeGrid::with_max_step(tf, 0.02);
    const CMatrix u = propagate_final(pair_terms(0.02), ControlField::zero(g), g);
    const KrausSet ks = kraus_operators(u, pop, 1, 1);
    CHECK(ks.operators.size() == 4);
    CHECK(max_abs(ks.at(0, 1)) == 0.0);
    CHECK(max_abs(ks.at(1, 1)) == 0.0);
    double total = 0.0;
    for (const auto &k : ks.operators) total += std::pow(frobenius_norm(k), 2);
    CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ks.completeness_error() <= 1e-10);
    const TwoParticleSolution a = analytic_two_particle(1.0, kOmega2, 0.02, tf);
    CHECK(frobenius_norm(ks.at(1, 0)) ==
          doctest::Approx(std::abs(std::sin(a.rabi_frequency * tf)) * 0.02 / (2 * a.rabi_frequency))
              .epsilon(1e-7));
    CHECK(kraus_nonunitarity(ks) == doctest::Approx(frobenius_norm(ks.at(1, 0))));
  }
  SUBCASE("no coupling gives a single unitary operator") {
    const TimeGrid g{10.0, 100};
    const CMatrix u = propagate_final(pair_terms(0.0), ControlField::zero(g), g);
    const KrausSet ks = kraus_operators(u, pop, 1, 1);
    CHECK(unitarity_error(ks.at(0, 0)) < 1e-12);
    CHECK(frobenius_norm(ks.at(1, 0)) < 1e-14);
  }
  SUBCASE("channel reproduces the reduced dynamics") {
    std::mt19937_64 rng(53);
    const CMatrix u = oracle::random_unitary(8, rng);
    const std::vector<double> p2{0.4, 0.3, 0.2, 0.1};
    const KrausSet ks = kraus_operators(u, p2, 1, 2);
    CHECK(ks.completeness_error() <= 1e-10);
    const CVector q = oracle::random_state(2, rng);
    const CMatrix rho_q = q * q.adjoint();
    CMatrix rho_e = CMatrix::Zero(4, 4);
    for (int k = 0; k < 4; ++k) rho_e(k, k) = p2[static_cast<std::size_t>(k)];
    const CMatrix full = u * kron(rho_q, rho_e) * u.adjoint();
    CHECK(max_abs(ks.apply(rho_q) - oracle::partial_trace(full, 1, 2)) < 1e-13);
  }
  SUBCASE("Frobenius norm") {
    CHECK(frobenius_norm(CMatrix::Identity(2, 2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(frobenius_norm(CMatrix::Zero(3, 3)) == 0.0);
    CMatrix x(1, 2);
    x << cplx(3, 0), cplx(0, 4);
    CHECK(frobenius_norm(x) == doctest::Approx(5.0));
  }
  SUBCASE("invalid populations") {
    const CMatrix u = CMatrix::Identity(4, 4);
    CHECK_THROWS_AS(kraus_operators(u, {0.5, 0.4}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(kraus_operators(u, {1.5, -0.5}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(kraus_operators(u, {1.0}, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("trajectory stride and CSV") {
  const TimeGrid g{1.0, 10};
  const PropagationResult prop = propagate_forward(pair_terms(0.02), ControlField::zero(g), g);
  const auto rows = trajectory_diagnostics(prop, g, CMatrix::Identity(2, 2), 1, 1, 3);
  CHECK(rows.size() == 5);  // 0, 3, 6, 9 and the final point
  CHECK(rows.back().t == 1.0);
  CHECK_THROWS_AS(trajectory_diagnostics(prop, g, CMatrix::Identity(2, 2), 1, 1, 0),
                  std::invalid_argument);
  const auto path = std::filesystem::temp_directory_path() / "spingate_traj.csv";
  write_trajectory_csv(path, rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,S_vN,F,K21_fr");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 5);
}
