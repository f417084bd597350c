#include "spingate/objective.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace spingate {

int GateTarget::qubits() const {
  int m = 0;
  while (pow2(m) < matrix.rows()) ++m;
  return m;
}

GateTarget make_gate(GateKind kind) {
  GateTarget g;
  g.kind = kind;
  switch (kind) {
    case GateKind::Hadamard:
      g.name = "hadamard";
      g.matrix = CMatrix(2, 2);
      g.matrix << 1.0, 1.0, 1.0, -1.0;
      g.matrix /= std::sqrt(2.0);
      break;
    case GateKind::Identity:
      g.name = "identity";
      g.matrix = CMatrix::Identity(2, 2);
      break;
    case GateKind::Pi8:
      g.name = "pi8";
      g.matrix = CMatrix::Identity(2, 2);
      g.matrix(1, 1) = std::exp(kI * (M_PI / 4.0));
      break;
    case GateKind::CNOT:
      g.name = "cnot";
      g.matrix = CMatrix::Zero(4, 4);
      g.matrix(0, 0) = g.matrix(1, 1) = g.matrix(2, 3) = g.matrix(3, 2) = 1.0;
      break;
    case GateKind::Custom:
      throw std::invalid_argument("custom gates are loaded with read_gate_csv");
  }
  return g;
}

GateTarget gate_by_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "hadamard") return make_gate(GateKind::Hadamard);
  if (lower == "identity") return make_gate(GateKind::Identity);
  if (lower == "pi8") return make_gate(GateKind::Pi8);
  if (lower == "cnot") return make_gate(GateKind::CNOT);
  throw ConfigError("unknown gate '" + std::string(name) +
                    "' (expected hadamard, identity, pi8 or cnot)");
}

GateTarget read_gate_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read gate file " + path.string());
  std::vector<std::vector<cplx>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> nums;
    for (double x; ss >> x;) nums.push_back(x);
    if (nums.empty() || nums.size() % 2 != 0)
      throw ConfigError(path.string() + ": each row must hold re,im pairs");
    std::vector<cplx> row;
    for (std::size_t j = 0; j < nums.size(); j += 2) row.emplace_back(nums[j], nums[j + 1]);
    rows.push_back(std::move(row));
  }
  const auto dim = rows.size();
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw ConfigError(path.string() + ": gate dimension must be a power of two");
  GateTarget g{GateKind::Custom, "custom", CMatrix(dim, dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    if (rows[i].size() != dim) throw ConfigError(path.string() + ": gate matrix must be square");
    for (std::size_t j = 0; j < dim; ++j) g.matrix(i, j) = rows[i][j];
  }
  if (unitarity_error(g.matrix) > 1e-10) throw ConfigError(path.string() + ": gate is not unitary");
  return g;
}

namespace {

void check_dims(const CMatrix &u, const CMatrix &gate, int qubits, int environment) {
  if (qubits < 1 || environment < 0) throw std::invalid_argument("invalid (m, n)");
  const int dim = pow2(qubits + environment);
  if (u.rows() != dim || u.cols() != dim)
    throw std::invalid_argument("composite operator must be " + std::to_string(dim) + " x " +
                                std::to_string(dim));
  if (gate.rows() != pow2(qubits) || gate.cols() != pow2(qubits))
    throw std::invalid_argument("gate must act on " + std::to_string(qubits) + " qubit(s)");
}

}  // namespace

CMatrix build_q_matrix(const CMatrix &u, const CMatrix &gate, int qubits, int environment) {
  check_dims(u, gate, qubits, environment);
  const int env_dim = pow2(environment);
  const int q_dim = pow2(qubits);
  CMatrix q = CMatrix::Zero(env_dim, env_dim);
  for (int i = 0; i < q_dim; ++i)
    for (int ip = 0; ip < q_dim; ++ip) {
      const cplx g = std::conj(gate(i, ip));
      if (g == cplx(0.0)) continue;
      q += g * u.block(i * env_dim, ip * env_dim, env_dim, env_dim);
    }
  return q;
}

DistanceResult distance(const CMatrix &u, const CMatrix &gate, int qubits, int environment) {
  DistanceResult r;
  r.q = build_q_matrix(u, gate, qubits, environment);
  Eigen::JacobiSVD<CMatrix> svd(r.q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r.singular_values = svd.singularValues();
  r.singular_sum = r.singular_values.sum();
  r.environment_unitary = svd.matrixU() * svd.matrixV().adjoint();
  const double inner = 1.0 - std::ldexp(r.singular_sum, -(qubits + environment));
  r.distance = inner < kDistanceRoundingFloor ? 0.0 : std::sqrt(std::min(inner, 1.0));
  return r;
}

ClosedDistance distance_closed(const CMatrix &u_qubits, const CMatrix &gate) {
  if (u_qubits.rows() != gate.rows() || u_qubits.cols() != gate.cols())
    throw std::invalid_argument("closed-system distance needs matching dimensions");
  const int m = GateTarget{GateKind::Custom, "", gate}.qubits();
  const double overlap = std::abs((gate.adjoint() * u_qubits).trace());
  const double inner = 1.0 - std::ldexp(overlap, -m);
  ClosedDistance r;
  r.squared = inner < kDistanceRoundingFloor ? 0.0 : std::min(inner, 1.0);
  r.distance = std::sqrt(r.squared);
  return r;
}

DistanceGradient gradient_dJ_dU(const CMatrix &u, const CMatrix &gate, int qubits,
                                int environment) {
  const int dim = pow2(qubits + environment);
  DistanceGradient out;
  out.d_distance = CMatrix::Zero(dim, dim);

  const CMatrix q = build_q_matrix(u, gate, qubits, environment);
  Eigen::JacobiSVD<CMatrix> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector &sv = svd.singularValues();
  const double inner = 1.0 - std::ldexp(sv.sum(), -(qubits + environment));
  out.distance = inner < kDistanceRoundingFloor ? 0.0 : std::sqrt(std::min(inner, 1.0));
  if (out.distance == 0.0) {
    out.at_optimum = true;
    return out;
  }

  // (Q^dag Q)^{-1/2} Q^dag = V S^+ S W^dag; the pseudo-inverse drops directions
  // whose singular value is below the floor.
  const Eigen::Index env_dim = q.rows();
  RVector keep = RVector::Ones(env_dim);
  for (Eigen::Index k = 0; k < env_dim; ++k)
    if (sv(k) < kSingularValueFloor) {
      keep(k) = 0.0;
      out.singular_branch = true;
    }
  const CMatrix polar_adj =
      svd.matrixV() * keep.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();

  // dQ/dU_ab = conj(G_{i(a) i(b)}) |nu(a)><nu(b)|, so
  // Tr[M dQ/dU_ab] = conj(G_{i(a) i(b)}) M_{nu(b) nu(a)}.
  const double scale = -std::ldexp(1.0, -(qubits + environment)) / (4.0 * out.distance);
  const CMatrix polar_t = polar_adj.transpose();
  const int q_dim = pow2(qubits);
  for (int i = 0; i < q_dim; ++i)
    for (int ip = 0; ip < q_dim; ++ip) {
      const cplx g = std::conj(gate(i, ip));
      if (g == cplx(0.0)) continue;
      out.d_distance.block(i * env_dim, ip * env_dim, env_dim, env_dim) = (scale * g) * polar_t;
    }
  return out;
}

CMatrix adjoint_terminal(const CMatrix &u, const CMatrix &gate, int qubits, int environment) {
  return -gradient_dJ_dU(u, gate, qubits, environment).d_distance.transpose();
}

}  // namespace spingate
