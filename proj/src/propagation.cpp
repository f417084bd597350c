#include "spingate/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace spingate {

void TimeGrid::validate() const {
  if (steps < 1) throw std::invalid_argument("time grid needs at least one step");
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    throw std::invalid_argument("time grid needs a positive final time");
}

TimeGrid TimeGrid::with_max_step(double t_final, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  TimeGrid g{t_final, static_cast<int>(std::ceil(t_final / dt - 1e-9))};
  if (g.steps < 1) g.steps = 1;
  g.validate();
  return g;
}

void check_field(const ControlField &field, const TimeGrid &grid) {
  grid.validate();
  if (field.samples.size() != static_cast<std::size_t>(grid.points()))
    throw std::invalid_argument("control field has " + std::to_string(field.samples.size()) +
                                " samples, grid has " + std::to_string(grid.points()) + " points");
  for (std::size_t k = 0; k < field.samples.size(); ++k)
    if (!std::isfinite(field.samples[k]))
      throw NumericalError("non-finite control sample at index " + std::to_string(k));
}

StepPropagator make_step(const RMatrix &hamiltonian, double dt) {
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on step Hamiltonian");
  StepPropagator step{solver.eigenvalues(), solver.eigenvectors(), {}};
  const CVector phases = (-kI * dt * step.energies.cast<cplx>()).array().exp();
  const CMatrix scaled = phases.asDiagonal() * step.basis.transpose().cast<cplx>();
  step.propagator = multiply(step.basis, scaled);
  return step;
}

StepPropagator make_step(const CMatrix &hamiltonian, double dt) {
  return make_step(require_real(hamiltonian), dt);
}

StepSequence::StepSequence(const HamiltonianTerms &terms, const ControlField &field,
                           const TimeGrid &grid)
    : dimension_(static_cast<int>(terms.drift.rows())), dt_(grid.dt()) {
  check_field(field, grid);
  const RMatrix drift = require_real(terms.drift);
  const RMatrix control = require_real(terms.control);
  steps_.reserve(static_cast<std::size_t>(grid.steps));
  for (int k = 0; k < grid.steps; ++k)
    steps_.push_back(make_step(RMatrix(drift + field.midpoint(k) * control), dt_));
}

PropagationResult propagate_forward(const StepSequence &steps, const CMatrix &initial) {
  PropagationResult out;
  out.unitaries.reserve(static_cast<std::size_t>(steps.size()) + 1);
  out.unitaries.push_back(initial);
  for (const auto &step : steps.steps()) out.unitaries.push_back(step.propagator * out.unitaries.back());
  return out;
}

PropagationResult propagate_forward(const HamiltonianTerms &terms, const ControlField &field,
                                    const TimeGrid &grid) {
  const StepSequence steps(terms, field, grid);
  return propagate_forward(steps, CMatrix::Identity(steps.dimension(), steps.dimension()));
}

CMatrix propagate_final(const HamiltonianTerms &terms, const ControlField &field,
                        const TimeGrid &grid) {
  check_field(field, grid);
  const RMatrix drift = require_real(terms.drift);
  const RMatrix control = require_real(terms.control);
  const Eigen::Index dim = drift.rows();
  const double dt = grid.dt();
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(dim);
  // Real and imaginary parts of U are carried separately so that every
  // product is a real one.
  RMatrix re = RMatrix::Identity(dim, dim), im = RMatrix::Zero(dim, dim);
  RMatrix h(dim, dim), a(dim, dim), b(dim, dim);
  for (int k = 0; k < grid.steps; ++k) {
    h.noalias() = drift + field.midpoint(k) * control;
    solver.compute(h);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on step Hamiltonian");
    const RMatrix &v = solver.eigenvectors();
    a.noalias() = v.transpose() * re;
    b.noalias() = v.transpose() * im;
    for (Eigen::Index p = 0; p < dim; ++p) {
      const double phase = dt * solver.eigenvalues()(p);
      const double c = std::cos(phase), s = std::sin(phase);
      // (a + i b) * exp(-i phase)
      const Eigen::RowVectorXd ar = a.row(p), br = b.row(p);
      a.row(p) = c * ar + s * br;
      b.row(p) = c * br - s * ar;
    }
    re.noalias() = v * a;
    im.noalias() = v * b;
  }
  CMatrix u(dim, dim);
  u.real() = re;
  u.imag() = im;
  return u;
}

AdjointState propagate_backward(const StepSequence &steps, const CMatrix &b_final) {
  AdjointState out;
  out.adjoints.resize(static_cast<std::size_t>(steps.size()) + 1);
  out.adjoints.back() = b_final;
  for (int k = steps.size() - 1; k >= 0; --k)
    out.adjoints[static_cast<std::size_t>(k)] =
        out.adjoints[static_cast<std::size_t>(k) + 1] * steps[k].propagator;
  return out;
}

AdjointState propagate_backward(const HamiltonianTerms &terms, const ControlField &field,
                                const TimeGrid &grid, const CMatrix &b_final) {
  const StepSequence steps(terms, field, grid);
  if (b_final.rows() != steps.dimension() || b_final.cols() != steps.dimension())
    throw std::invalid_argument("terminal adjoint has the wrong dimension");
  return propagate_backward(steps, b_final);
}

double rabi_frequency(double omega1, double omega2, double gamma) {
  const double d = omega1 - omega2;
  return 0.5 * std::sqrt(d * d + gamma * gamma);
}

double revival_time(double omega1, double omega2, double gamma, int k) {
  return k * M_PI / rabi_frequency(omega1, omega2, gamma);
}

double partial_revival_time(double omega1, double omega2, double gamma, int k) {
  return (k - 0.5) * M_PI / rabi_frequency(omega1, omega2, gamma);
}

double degenerate_revival_time(double gamma, int k) {
  return k * M_PI / (2.0 * rabi_frequency(1.0, 1.0, gamma));
}

TwoParticleSolution analytic_two_particle(double omega1, double omega2, double gamma, double t) {
  TwoParticleSolution sol;
  const double omega = rabi_frequency(omega1, omega2, gamma);
  sol.rabi_frequency = omega;
  const double c = std::cos(omega * t);
  const double s = omega > 0.0 ? std::sin(omega * t) : 0.0;
  const double detuning = omega > 0.0 ? (omega1 - omega2) / (2.0 * omega) : 0.0;
  const double mixing = omega > 0.0 ? gamma / (2.0 * omega) : 0.0;
  const cplx phase = std::exp(-kI * gamma * t / 4.0);

  sol.amplitudes = CVector::Zero(4);
  sol.amplitudes(1) = phase * kI * s * mixing;             // |+->
  sol.amplitudes(2) = phase * (c + kI * s * detuning);     // |-+>
  sol.reduced_density = CMatrix::Zero(2, 2);
  sol.reduced_density(0, 0) = s * s * mixing * mixing;                 // |+><+|
  sol.reduced_density(1, 1) = c * c + s * s * detuning * detuning;     // |-><-|
  return sol;
}

void write_field_csv(const std::filesystem::path &path, const ControlField &field,
                     const TimeGrid &grid) {
  check_field(field, grid);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write field file " + path.string());
  out << "t,C\n";
  char buf[64];
  for (int k = 0; k < grid.points(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.time(k), field.samples[k]);
    out << buf;
  }
}

std::pair<TimeGrid, ControlField> read_field_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read field file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,C", 0) != 0)
    throw ConfigError(path.string() + ":1: expected header 't,C'");
  std::vector<double> times, values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    double t = 0.0, c = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> c) || comma != ',')
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    times.push_back(t);
    values.push_back(c);
  }
  if (times.size() < 2) throw ConfigError(path.string() + ": need at least two samples");
  TimeGrid grid{times.back(), static_cast<int>(times.size()) - 1};
  grid.validate();
  const double tol = 1e-9 * std::max(1.0, grid.t_final);
  for (int k = 0; k < grid.points(); ++k)
    if (std::abs(times[k] - grid.time(k)) > tol)
      throw ConfigError(path.string() + ":" + std::to_string(k + 2) +
                        ": times must form a uniform grid starting at 0");
  ControlField field{std::move(values)};
  check_field(field, grid);
  return {grid, field};
}

}  // namespace spingate
