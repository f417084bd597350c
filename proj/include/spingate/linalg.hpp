#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spingate {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Raised for malformed configuration or user input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical computation cannot proceed (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CMatrix kron(const CMatrix &a, const CMatrix &b);

// Largest entry modulus.
double max_abs(const CMatrix &m);
double hermiticity_error(const CMatrix &m);
// max |U^dag U - I|
double unitarity_error(const CMatrix &u);

// Products of a real and a complex matrix, done as two real products.
CMatrix multiply(const RMatrix &a, const CMatrix &b);
CMatrix multiply(const CMatrix &a, const RMatrix &b);

// Real part of a matrix whose imaginary part must vanish to `tol`; throws
// std::invalid_argument otherwise.
RMatrix require_real(const CMatrix &m, double tol = 1e-14);

// 2^k as an int; k is small (< 31) everywhere in this code base.
constexpr int pow2(int k) { return 1 << k; }

}  // namespace spingate
