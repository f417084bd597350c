#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spingate/diagnostics.hpp"
#include "spingate/objective.hpp"
#include "spingate/optimize.hpp"
#include "spingate/propagation.hpp"

using namespace spingate;

namespace {

const double kOmega2 = 1.0 / (M_PI - 2.14);

SpinSystem pair_system(double w2, double gamma) {
  return make_system(1, 1, {1.0, w2}, make_topology(TopologyKind::Star, {gamma, 0}, 1, 1));
}

ControlField smooth_field(const TimeGrid &grid, double amp = 1.2) {
  ControlField f = ControlField::zero(grid);
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    f.samples[static_cast<std::size_t>(k)] =
        amp * std::sin(M_PI * t / grid.t_final) * std::cos(1.1 * t + 0.4);
  }
  return f;
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g = TimeGrid::with_max_step(25.0, 0.03);
  CHECK(g.dt() <= 0.03);
  CHECK(g.steps == 834);
  CHECK(g.time(g.steps) == 25.0);
  CHECK_THROWS_AS(TimeGrid::with_max_step(25.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{-1.0, 10}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{1.0, 0}.validate()), std::invalid_argument);
}

TEST_CASE("field checks") {
  const TimeGrid g{1.0, 4};
  ControlField f = ControlField::zero(g);
  CHECK_NOTHROW(check_field(f, g));
  f.samples[2] = std::nan("");
  CHECK_THROWS_AS(check_field(f, g), NumericalError);
  f.samples.pop_back();
  CHECK_THROWS_AS(check_field(f, g), std::invalid_argument);
}

TEST_CASE("free single spin evolution") {
  const double w = 1.3, tf = 7.0;
  const SpinSystem s = make_system(1, 0, {w}, make_topology(TopologyKind::Star, {0, 0}, 1, 0));
  const TimeGrid g{tf, 100};
  const CMatrix u = propagate_forward(assemble_hamiltonian(s), ControlField::zero(g), g).final_unitary();
  CHECK(std::abs(u(0, 0) - std::exp(cplx(0, -w * tf / 2))) < 1e-12);
  CHECK(std::abs(u(1, 1) - std::exp(cplx(0, w * tf / 2))) < 1e-12);
  CHECK(std::abs(u(0, 1)) < 1e-14);
}

TEST_CASE("uncontrolled pair matches the closed-form solution") {
  const SpinSystem s = pair_system(kOmega2, 0.02);
  const TimeGrid g = TimeGrid::with_max_step(350.0, 0.01);
  const PropagationResult prop = propagate_forward(assemble_hamiltonian(s), ControlField::zero(g), g);
  const CVector psi0 = reference_initial_state(1, 1);
  double worst_amp = 0.0, worst_pop = 0.0;
  for (int k = 0; k < g.points(); k += 7) {
    const TwoParticleSolution a = analytic_two_particle(1.0, kOmega2, 0.02, g.time(k));
    const CVector psi = prop.unitaries[static_cast<std::size_t>(k)] * psi0;
    worst_amp = std::max(worst_amp, (psi - a.amplitudes).cwiseAbs().maxCoeff());
    const CMatrix rho = reduced_density(psi, 1, 1);
    worst_pop = std::max(worst_pop, std::abs(rho(0, 0).real() - a.reduced_density(0, 0).real()));
    worst_pop = std::max(worst_pop, std::abs(rho(1, 1).real() - a.reduced_density(1, 1).real()));
  }
  CHECK(worst_amp <= 1e-8);
  CHECK(worst_pop <= 1e-8);
}

TEST_CASE("closed-form populations") {
  const TwoParticleSolution a = analytic_two_particle(1.0, kOmega2, 0.02, 40.0);
  const double omega = a.rabi_frequency;
  const double d = 1.0 - kOmega2;
  const double sin2 = std::pow(std::sin(omega * 40.0), 2);
  CHECK(a.reduced_density(0, 0).real() == doctest::Approx(sin2 * 0.02 * 0.02 / (4 * omega * omega)));
  CHECK(a.reduced_density(1, 1).real() ==
        doctest::Approx(1.0 - sin2 + sin2 * d * d / (4 * omega * omega)));
  CHECK(a.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("revival times") {
  CHECK(revival_time(1.0, kOmega2, 0.02, 1) == doctest::Approx(313.2).epsilon(5e-4));
  CHECK(revival_time(1.0, M_PI - 2.0, 0.02, 1) == doctest::Approx(43.9).epsilon(1e-3));
  CHECK(revival_time(1.0, 1.0 / (M_PI - 2.0), 0.02, 1) == doctest::Approx(50.0).epsilon(1e-3));
  CHECK(revival_time(1.0, 1.0 / (M_PI - 2.1), 0.02, 1) == doctest::Approx(140.7).epsilon(1e-3));
  CHECK(revival_time(1.0, M_PI - 2.1, 0.02, 1) == doctest::Approx(136.1).epsilon(1e-3));
  CHECK(partial_revival_time(1.0, kOmega2, 0.02, 1) == doctest::Approx(156.6).epsilon(5e-4));
  // Degenerate frequencies: Omega = gamma / 2 and revivals at k pi / (2 Omega).
  CHECK(rabi_frequency(1.0, 1.0, 0.02) == doctest::Approx(0.01));
  CHECK(degenerate_revival_time(0.02, 1) == doctest::Approx(M_PI / 0.02));
  const TwoParticleSolution at = analytic_two_particle(1.0, 1.0, 0.02, degenerate_revival_time(0.02, 1));
  // odd k: complete swap, the qubit is pure again in |+>
  CHECK(std::abs(at.reduced_density(0, 0) - 1.0) < 1e-12);
}

TEST_CASE("unitarity is preserved") {
  const SpinSystem s = make_system(1, 2, {1.0, 0.99, 1.02},
                                   make_topology(TopologyKind::Star, {0.02, 0}, 1, 2));
  const HamiltonianTerms t = assemble_hamiltonian(s);
  const TimeGrid g = TimeGrid::with_max_step(25.0, 0.025);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.5);
  ControlField f = ControlField::zero(g);
  for (double &c : f.samples) c = n(rng);
  const PropagationResult prop = propagate_forward(t, f, g);
  double worst = 0.0;
  for (const auto &u : prop.unitaries) worst = std::max(worst, unitarity_error(u));
  CHECK(worst <= 1e-9);
  CHECK(max_abs(prop.unitaries.front() - CMatrix::Identity(8, 8)) == 0.0);
  CHECK(max_abs(propagate_final(t, f, g) - prop.final_unitary()) < 1e-12);
}

TEST_CASE("long uncontrolled runs stay unitary") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.02));
  const TimeGrid g{1000.0, 100000};
  CHECK(unitarity_error(propagate_final(t, ControlField::zero(g), g)) <= 1e-9);
}

TEST_CASE("backward propagation with a constant Hamiltonian") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.05));
  const TimeGrid g{3.0, 60};
  const AdjointState b = propagate_backward(t, ControlField::zero(g), g, CMatrix::Identity(4, 4));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(t.drift);
  const CVector ph = (cplx(0, -1) * 3.0 * es.eigenvalues().cast<cplx>()).array().exp();
  const CMatrix closed = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  CHECK(max_abs(b.adjoints.front() - closed) < 1e-12);
}

TEST_CASE("backward then forward returns to the terminal value") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.02));
  const TimeGrid g{10.0, 500};
  const ControlField f = smooth_field(g);
  std::mt19937_64 rng(11);
  const CMatrix b_final = oracle::random_matrix(4, rng);
  const StepSequence steps(t, f, g);
  const AdjointState b = propagate_backward(steps, b_final);
  CMatrix x = b.adjoints.front();
  for (const auto &s : steps.steps()) x = x * s.propagator.adjoint();
  CHECK(max_abs(x - b_final) <= 1e-10);
  CHECK_THROWS_AS(propagate_backward(t, f, g, CMatrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("Tr[B U] is constant along the trajectory") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.02));
  const TimeGrid g{12.0, 400};
  const ControlField f = smooth_field(g);
  const PropagationResult u = propagate_forward(t, f, g);
  const AdjointState b = propagate_backward(t, f, g, u.final_unitary().adjoint());
  for (std::size_t k = 0; k < u.unitaries.size(); k += 25)
    CHECK(std::abs((b.adjoints[k] * u.unitaries[k]).trace() - cplx(4.0, 0.0)) < 1e-10);
}

TEST_CASE("composition of two half intervals") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.02));
  const TimeGrid g{20.0, 800};
  const ControlField f = smooth_field(g);
  const CMatrix full = propagate_final(t, f, g);
  const TimeGrid half{10.0, 400};
  ControlField first{std::vector<double>(f.samples.begin(), f.samples.begin() + 401)};
  ControlField second{std::vector<double>(f.samples.begin() + 400, f.samples.end())};
  const CMatrix u_half = propagate_forward(StepSequence(t, first, half), CMatrix::Identity(4, 4)).final_unitary();
  const CMatrix u_full = propagate_forward(StepSequence(t, second, half), u_half).final_unitary();
  CHECK(max_abs(u_full - full) <= 1e-10);
}

TEST_CASE("midpoint stepping converges at second order") {
  const HamiltonianTerms t = assemble_hamiltonian(pair_system(kOmega2, 0.02));
  const double tf = 10.0;
  auto field_on = [&](int steps) {
    const TimeGrid g{tf, steps};
    return std::make_pair(g, smooth_field(g, 2.0));
  };
  const auto [gref, fref] = field_on(64000);
  const CMatrix ref = propagate_final(t, fref, gref);
  double previous = 0.0;
  for (int steps : {250, 500, 1000}) {
    const auto [g, f] = field_on(steps);
    const double err = max_abs(propagate_final(t, f, g) - ref);
    if (previous > 0.0) {
      const double ratio = previous / err;
      CHECK(ratio > 3.5);
      CHECK(ratio < 4.5);
    }
    previous = err;
  }
}

TEST_CASE("step-level derivative of J matches finite differences") {
  const ControlProblem p = make_problem(pair_system(kOmega2, 0.02), make_gate(GateKind::Hadamard));
  const TimeGrid g{8.0, 400};
  const ControlField f = smooth_field(g);
  const ControlGradient grad = control_gradient(p, f, g, 0.0);
  for (int k : {37, 200, 311}) {
    const double eps = 1e-6;
    ControlField up = f, down = f;
    up.samples[static_cast<std::size_t>(k)] += eps;
    down.samples[static_cast<std::size_t>(k)] -= eps;
    const double fd = (evaluate_field(p, up, g, 0.0).distance - evaluate_field(p, down, g, 0.0).distance) / (2 * eps);
    const double an = grad.sample_gradient[static_cast<std::size_t>(k)];
    CHECK(std::abs(fd - an) <= 1e-5 * std::abs(an));
  }
}

TEST_CASE("field CSV round trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "spingate_field_csv";
  std::filesystem::create_directories(dir);
  const TimeGrid g{2.5, 10};
  const ControlField f = smooth_field(g);
  write_field_csv(dir / "f.csv", f, g);
  const auto [g2, f2] = read_field_csv(dir / "f.csv");
  CHECK(g2 == g);
  CHECK(f2.samples == f.samples);

  std::ofstream(dir / "bad.csv") << "t,C\n0,1\n0.1,2\n0.3,0\n";
  CHECK_THROWS_AS(read_field_csv(dir / "bad.csv"), ConfigError);
  std::ofstream(dir / "junk.csv") << "t,C\n0,1\nfoo,bar\n";
  CHECK_THROWS_AS(read_field_csv(dir / "junk.csv"), ConfigError);
  CHECK_THROWS_AS(read_field_csv(dir / "missing.csv"), ConfigError);
}

TEST_CASE("complex Hamiltonians are rejected by the real stepper") {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 1) = cplx(0, 1);
  h(1, 0) = cplx(0, -1);
  CHECK_THROWS_AS(make_step(h, 0.1), std::invalid_argument);
}
