#include "spingate/linalg.hpp"

#include <algorithm>

namespace spingate {

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double max_abs(const CMatrix &m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double hermiticity_error(const CMatrix &m) { return max_abs(m - m.adjoint()); }

double unitarity_error(const CMatrix &u) {
  return max_abs(u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols()));
}

CMatrix multiply(const RMatrix &a, const CMatrix &b) {
  const RMatrix re = a * b.real();
  const RMatrix im = a * b.imag();
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

CMatrix multiply(const CMatrix &a, const RMatrix &b) {
  const RMatrix re = a.real() * b;
  const RMatrix im = a.imag() * b;
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

RMatrix require_real(const CMatrix &m, double tol) {
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  if (m.size() && m.imag().cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("matrix is expected to be real in the computational basis");
  return m.real();
}

}  // namespace spingate
