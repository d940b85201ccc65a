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

#include "lindform/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace lindform {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Matrix& m) {
  if (!is_square(m)) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(m - m.adjoint());
}

bool is_square(const Matrix& m) { return m.rows() == m.cols(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

Matrix tensor_product(const Matrix& a, const Matrix& b, std::size_t max_dim) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (rows > max_dim || cols > max_dim) {
    std::ostringstream msg;
    msg << "tensor product of " << a.rows() << "x" << a.cols() << " and " << b.rows() << "x"
        << b.cols() << " exceeds the maximum dimension " << max_dim;
    throw SizeError(msg.str());
  }
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

void check_bipartite(const Matrix& rho_ab, std::size_t dim_a, std::size_t dim_b) {
  const auto n = static_cast<Eigen::Index>(dim_a * dim_b);
  if (dim_a == 0 || dim_b == 0 || rho_ab.rows() != n || rho_ab.cols() != n) {
    std::ostringstream msg;
    msg << "operator of shape " << rho_ab.rows() << "x" << rho_ab.cols()
        << " does not act on a " << dim_a << " x " << dim_b << " bipartite space";
    throw StructuralError(msg.str());
  }
}

}  // namespace

Matrix partial_trace_bath(const Matrix& rho_ab, std::size_t dim_a, std::size_t dim_b) {
  check_bipartite(rho_ab, dim_a, dim_b);
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  Matrix out = Matrix::Zero(da, da);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out(i, j) = rho_ab.block(i * db, j * db, db, db).trace();
    }
  }
  return out;
}

Matrix partial_trace_system(const Matrix& rho_ab, std::size_t dim_a, std::size_t dim_b) {
  check_bipartite(rho_ab, dim_a, dim_b);
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  Matrix out = Matrix::Zero(db, db);
  for (Eigen::Index i = 0; i < da; ++i) {
    out += rho_ab.block(i * db, i * db, db, db);
  }
  return out;
}

EigenDecomposition hermitian_eigendecomposition(const Matrix& h, double hermiticity_tol) {
  if (!is_square(h)) {
    throw StructuralError("eigendecomposition requires a square matrix");
  }
  const double defect = hermiticity_defect(h);
  if (!(defect <= hermiticity_tol)) {
    std::ostringstream msg;
    msg << "matrix is not hermitian: max |h - h^dagger| = " << defect << " exceeds "
        << hermiticity_tol;
    throw ContractViolation(msg.str());
  }
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("hermitian eigensolver did not converge");
  }
  // Eigen returns ascending eigenvalues; a stable sort fixes the order of
  // exact ties by column index.
  const auto n = sym.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  const RealVector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return raw(x) < raw(y); });
  EigenDecomposition out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = raw(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Matrix spectral_function(const EigenDecomposition& eig, const Vector& f_of_values) {
  return eig.vectors * f_of_values.asDiagonal() * eig.vectors.adjoint();
}

Matrix matrix_exponential_unitary(const Matrix& h, double t) {
  const EigenDecomposition eig = hermitian_eigendecomposition(h);
  Vector phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::exp(-kI * eig.values(k) * t);
  }
  return spectral_function(eig, phases);
}

double min_hermitian_eigenvalue(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  const Matrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

ValidationReport validate_density_matrix(const Matrix& rho, double tol) {
  ValidationReport report;
  report.tolerance = tol;
  if (!is_square(rho) || rho.size() == 0 || !all_finite(rho)) {
    const double inf = std::numeric_limits<double>::infinity();
    report.hermiticity_defect = inf;
    report.trace_defect = inf;
    report.min_eigenvalue = -inf;
    return report;
  }
  report.hermiticity_defect = hermiticity_defect(rho);
  report.trace_defect = std::abs(rho.trace() - 1.0);
  report.min_eigenvalue = min_hermitian_eigenvalue(rho);
  return report;
}

DensityMatrix::DensityMatrix(Matrix rho, double tol) : rho_(std::move(rho)), tol_(tol) {
  const ValidationReport report = validate_density_matrix(rho_, tol_);
  if (!report.passed()) {
    std::ostringstream msg;
    msg << "not a density matrix: hermiticity defect " << report.hermiticity_defect
        << ", trace defect " << report.trace_defect << ", min eigenvalue "
        << report.min_eigenvalue << " (tolerance " << tol_ << ")";
    throw ContractViolation(msg.str());
  }
}

DensityMatrix DensityMatrix::product(const DensityMatrix& a, const DensityMatrix& b) {
  const std::size_t cap = a.dim() * b.dim();
  return DensityMatrix(tensor_product(a.matrix(), b.matrix(), std::max(cap, kMaxTensorDim)),
                       std::max(a.tolerance(), b.tolerance()));
}

Vector vec(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvec(const Vector& v, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (v.size() != d * d) {
    throw StructuralError("vector length does not match dim^2");
  }
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

double trace_distance(const Matrix& a, const Matrix& b) {
  const Matrix diff = a - b;
  const Matrix sym = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace lindform
