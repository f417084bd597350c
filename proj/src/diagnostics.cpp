#include "spingate/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "spingate/objective.hpp"

namespace spingate {

CVector reference_initial_state(int qubits, int environment) {
  if (qubits < 1 || environment < 0) throw std::invalid_argument("invalid (m, n)");
  CVector minus = CVector::Zero(2), plus = CVector::Zero(2);
  minus(1) = 1.0;
  plus(0) = 1.0;
  CMatrix state = CMatrix::Ones(1, 1);
  for (int i = 0; i < qubits; ++i) state = kron(state, minus);
  for (int j = 0; j < environment; ++j) state = kron(state, plus);
  return state.col(0);
}

CMatrix reduced_density(const CVector &state, int qubits, int environment) {
  const int q_dim = pow2(qubits), env_dim = pow2(environment);
  if (state.size() != q_dim * env_dim) throw std::invalid_argument("state has the wrong dimension");
  // Row-major reshape: entry (i, nu) = state(i * 2^n + nu).
  const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      psi(state.data(), q_dim, env_dim);
  return psi * psi.adjoint();
}

CMatrix reduced_density(const CMatrix &u, const CVector &initial, int qubits, int environment) {
  return reduced_density(CVector(u * initial), qubits, environment);
}

double von_neumann_entropy(const CMatrix &rho) {
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance)
    throw std::invalid_argument("density matrix trace deviates from 1 by " +
                                std::to_string(std::abs(tr - 1.0)));
  const CMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double lambda = solver.eigenvalues()(k);
    if (lambda > kEigenvalueClip) s -= lambda * std::log(lambda);
  }
  return std::max(s, 0.0);
}

double purity(const CMatrix &rho) { return (rho * rho).trace().real(); }

std::vector<double> fidelity_trajectory(const PropagationResult &prop, const CMatrix &gate,
                                        int qubits, int environment) {
  std::vector<double> f;
  f.reserve(prop.unitaries.size());
  for (const auto &u : prop.unitaries) f.push_back(distance(u, gate, qubits, environment).fidelity());
  return f;
}

double KrausSet::completeness_error() const {
  const int q_dim = pow2(qubits);
  CMatrix sum = CMatrix::Zero(q_dim, q_dim);
  for (const auto &k : operators) sum += k.adjoint() * k;
  return max_abs(sum - CMatrix::Identity(q_dim, q_dim));
}

CMatrix KrausSet::apply(const CMatrix &rho_qubits) const {
  CMatrix out = CMatrix::Zero(rho_qubits.rows(), rho_qubits.cols());
  for (const auto &k : operators) out += k * rho_qubits * k.adjoint();
  return out;
}

KrausSet kraus_operators(const CMatrix &u, const std::vector<double> &populations, int qubits,
                         int environment) {
  const int q_dim = pow2(qubits), env_dim = pow2(environment);
  if (u.rows() != q_dim * env_dim || u.cols() != q_dim * env_dim)
    throw std::invalid_argument("composite operator has the wrong dimension");
  if (populations.size() != static_cast<std::size_t>(env_dim))
    throw std::invalid_argument("need one population per environment basis state");
  double total = 0.0;
  for (double p : populations) {
    if (p < 0.0) throw std::invalid_argument("environment populations must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("environment populations must sum to 1");

  KrausSet ks{qubits, environment, populations, {}};
  ks.operators.reserve(static_cast<std::size_t>(env_dim * env_dim));
  for (int nu = 0; nu < env_dim; ++nu)
    for (int nup = 0; nup < env_dim; ++nup) {
      CMatrix k(q_dim, q_dim);
      const double w = std::sqrt(populations[static_cast<std::size_t>(nup)]);
      for (int i = 0; i < q_dim; ++i)
        for (int ip = 0; ip < q_dim; ++ip) k(i, ip) = w * u(i * env_dim + nu, ip * env_dim + nup);
      ks.operators.push_back(std::move(k));
    }
  return ks;
}

double frobenius_norm(const CMatrix &x) { return std::sqrt((x.adjoint() * x).trace().real()); }

double kraus_nonunitarity(const KrausSet &ks) {
  const int env_dim = pow2(ks.environment);
  double sum = 0.0;
  for (int nu = 0; nu < env_dim; ++nu)
    for (int nup = 0; nup < env_dim; ++nup)
      if (nu != nup) sum += ks.at(nu, nup).squaredNorm();
  return std::sqrt(sum);
}

std::vector<TrajectoryRow> trajectory_diagnostics(const PropagationResult &prop,
                                                  const TimeGrid &grid, const CMatrix &gate,
                                                  int qubits, int environment, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (prop.unitaries.size() != static_cast<std::size_t>(grid.points()))
    throw std::invalid_argument("trajectory does not match the grid");
  const CVector psi0 = reference_initial_state(qubits, environment);
  std::vector<double> env_pop(static_cast<std::size_t>(pow2(environment)), 0.0);
  env_pop[0] = 1.0;

  std::vector<TrajectoryRow> rows;
  auto emit = [&](int k) {
    const CMatrix &u = prop.unitaries[static_cast<std::size_t>(k)];
    TrajectoryRow row;
    row.t = grid.time(k);
    row.entropy = von_neumann_entropy(reduced_density(u, psi0, qubits, environment));
    row.fidelity = distance(u, gate, qubits, environment).fidelity();
    row.kraus_norm = kraus_nonunitarity(kraus_operators(u, env_pop, qubits, environment));
    rows.push_back(row);
  };
  for (int k = 0; k < grid.points(); k += stride) emit(k);
  if (grid.steps % stride != 0) emit(grid.steps);
  return rows;
}

void write_trajectory_csv(const std::filesystem::path &path, const std::vector<TrajectoryRow> &rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory file " + path.string());
  out << "t,S_vN,F,K21_fr\n";
  char buf[128];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.entropy, r.fidelity,
                  r.kraus_norm);
    out << buf;
  }
}

}  // namespace spingate
