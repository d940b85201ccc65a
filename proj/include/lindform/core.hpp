// Copyright 2026 The lindform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex linear algebra over finite-dimensional Hilbert spaces.
//
// Units: hbar = k_B = 1. Every frequency, energy and temperature is expressed
// in one caller-chosen angular-frequency unit.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

#include "lindform/error.hpp"

namespace lindform {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kDefaultValidationTol = 1e-9;
/// Largest row count tensor_product will produce.
inline constexpr std::size_t kMaxTensorDim = 4096;

/// Largest |entry|; 0 for an empty matrix.
double max_abs(const Matrix& m);
/// max |m - m^dagger|.
double hermiticity_defect(const Matrix& m);
bool is_square(const Matrix& m);
bool all_finite(const Matrix& m);

Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);

/// Kronecker product a (x) b; entry (i1*db + i2, j1*db + j2) = a(i1,j1) b(i2,j2).
Matrix tensor_product(const Matrix& a, const Matrix& b, std::size_t max_dim = kMaxTensorDim);

/// Tr_B of an operator on H_A (x) H_B (system index major).
Matrix partial_trace_bath(const Matrix& rho_ab, std::size_t dim_a, std::size_t dim_b);
/// Tr_A of an operator on H_A (x) H_B.
Matrix partial_trace_system(const Matrix& rho_ab, std::size_t dim_a, std::size_t dim_b);

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // columns are orthonormal eigenvectors
};

/// h = V diag(values) V^dagger. Throws ContractViolation if h is not hermitian
/// within `hermiticity_tol`.
EigenDecomposition hermitian_eigendecomposition(const Matrix& h,
                                                double hermiticity_tol = kDefaultValidationTol);

/// exp(-i h t) for hermitian h.
Matrix matrix_exponential_unitary(const Matrix& h, double t);

/// Rebuilds V f(lambda) V^dagger from a decomposition.
Matrix spectral_function(const EigenDecomposition& eig, const Vector& f_of_values);

struct ValidationReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;
  double tolerance = kDefaultValidationTol;

  bool hermitian() const { return hermiticity_defect <= tolerance; }
  bool unit_trace() const { return trace_defect <= tolerance; }
  bool positive() const { return min_eigenvalue >= -tolerance; }
  bool passed() const { return hermitian() && unit_trace() && positive(); }
};

/// Never throws on numeric content; a non-square input yields a failing report.
ValidationReport validate_density_matrix(const Matrix& rho, double tol = kDefaultValidationTol);

/// A validated density operator.
class DensityMatrix {
 public:
  /// Throws ContractViolation when `rho` fails validation at `tol`.
  explicit DensityMatrix(Matrix rho, double tol = kDefaultValidationTol);

  const Matrix& matrix() const { return rho_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  double tolerance() const { return tol_; }

  /// rho_1 (x) rho_2 as a density matrix.
  static DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b);

 private:
  Matrix rho_;
  double tol_;
};

/// Column-stacking vectorization: vec(rho)[i + j*d] = rho(i, j).
Vector vec(const Matrix& rho);
Matrix unvec(const Vector& v, std::size_t dim);

/// A linear map on d x d matrices acting on column-stacked vectors.
struct Superoperator {
  std::size_t dim = 0;
  Matrix matrix;  // d^2 x d^2

  Matrix apply(const Matrix& rho) const { return unvec(matrix * vec(rho), dim); }
};

/// (1/2) || a - b ||_1 for hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

/// Smallest eigenvalue of the hermitian part of m.
double min_hermitian_eigenvalue(const Matrix& m);

}  // namespace lindform
