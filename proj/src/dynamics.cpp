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

#include "lindform/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string_view>

namespace lindform {

Superoperator liouvillian_superoperator(const Generator& g, std::size_t max_dim) {
  if (g.dim > max_dim) {
    std::ostringstream msg;
    msg << "superoperator for dimension " << g.dim << " exceeds the cap " << max_dim;
    throw SizeError(msg.str());
  }
  const auto d = static_cast<Eigen::Index>(g.dim);
  const std::size_t cap = g.dim * g.dim;
  const Matrix id = Matrix::Identity(d, d);
  Superoperator s{g.dim, Matrix::Zero(d * d, d * d)};
  // vec(A rho B) = (B^T (x) A) vec(rho)
  s.matrix += -kI * (tensor_product(id, g.h_eff, cap) - tensor_product(g.h_eff.transpose(), id, cap));
  for (const auto& [l, r] : g.sandwich) {
    s.matrix += tensor_product(r.conjugate(), l, cap);
    if (g.symmetric) {
      s.matrix += tensor_product(l.conjugate(), r, cap);
    }
  }
  s.matrix -= tensor_product(id, g.left_decay, cap);
  s.matrix -= tensor_product(g.left_decay.conjugate(), id, cap);
  return s;
}

const char* to_string(Method method) {
  switch (method) {
    case Method::kExpm:
      return "expm";
    case Method::kRk4:
      return "rk4";
    case Method::kAuto:
      break;
  }
  return "auto";
}

double rhs_norm_bound(const Generator& g) {
  double bound = 2.0 * g.h_eff.norm() + 2.0 * g.left_decay.norm();
  for (const auto& [l, r] : g.sandwich) {
    bound += (g.symmetric ? 2.0 : 1.0) * l.norm() * r.norm();
  }
  return bound;
}

std::vector<double> time_grid(double t_max, std::size_t samples) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) {
    throw DomainError("t_max must be finite and non-negative");
  }
  if (samples == 0) {
    throw DomainError("at least one sample is required");
  }
  std::vector<double> t(samples, 0.0);
  for (std::size_t k = 1; k < samples; ++k) {
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(samples - 1);
  }
  return t;
}

namespace {

void check_times(std::span<const double> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1]))) {
      std::ostringstream msg;
      msg << "times must be finite, non-negative and strictly increasing (index " << k << ")";
      throw DomainError(msg.str());
    }
  }
}

SampleDiagnostics diagnose(const Matrix& rho) {
  const ValidationReport r = validate_density_matrix(rho);
  return {r.trace_defect, r.hermiticity_defect, r.min_eigenvalue};
}

// Appends a sample; false (and a failure record) when positivity is lost.
bool record(Trajectory& traj, double t, Matrix rho, double validity_tol) {
  const SampleDiagnostics diag = diagnose(rho);
  if (!(diag.min_eigenvalue >= -validity_tol)) {
    std::ostringstream msg;
    msg << "state left the density-matrix region at t=" << t << ": min eigenvalue "
        << diag.min_eigenvalue;
    traj.failure = PropagationFailure{t, diag.min_eigenvalue, msg.str()};
    return false;
  }
  traj.times.push_back(t);
  traj.states.push_back(std::move(rho));
  traj.diagnostics.push_back(diag);
  return true;
}

Matrix rk4_advance(const Generator& g, Matrix rho, double span, double max_step) {
  if (span <= 0.0) {
    return rho;
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / max_step)));
  const double h = span / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const Matrix k1 = g.rhs(rho);
    const Matrix k2 = g.rhs(rho + 0.5 * h * k1);
    const Matrix k3 = g.rhs(rho + 0.5 * h * k2);
    const Matrix k4 = g.rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

}  // namespace

Trajectory propagate_partial(const DensityMatrix& rho0, const Generator& g,
                             std::span<const double> times, const PropagationOptions& options) {
  if (rho0.dim() != g.dim) {
    std::ostringstream msg;
    msg << "initial state has dimension " << rho0.dim() << ", generator " << g.dim;
    throw StructuralError(msg.str());
  }
  check_times(times);
  Method method = options.method;
  if (method == Method::kAuto) {
    method = g.dim <= options.expm_max_dim ? Method::kExpm : Method::kRk4;
  }
  Trajectory traj;
  traj.method = method;
  if (times.empty()) {
    return traj;
  }

  if (method == Method::kExpm) {
    const Matrix l = liouvillian_superoperator(g).matrix;
    Vector v = vec(rho0.matrix());
    double t_prev = 0.0;
    double cached_dt = -1.0;
    Matrix step;
    for (double t : times) {
      const double dt = t - t_prev;
      if (dt > 0.0) {
        if (std::abs(dt - cached_dt) > 1e-14 * std::max(1.0, std::abs(dt))) {
          step = (l * dt).exp();
          cached_dt = dt;
        }
        v = step * v;
      }
      t_prev = t;
      if (!record(traj, t, unvec(v, g.dim), options.validity_tol)) {
        break;
      }
    }
    return traj;
  }

  const double bound = rhs_norm_bound(g);
  const double max_step = bound > 0.0 ? options.step_fraction / bound
                                      : std::numeric_limits<double>::infinity();
  Matrix rho = rho0.matrix();
  double t_prev = 0.0;
  for (double t : times) {
    rho = rk4_advance(g, std::move(rho), t - t_prev, max_step);
    t_prev = t;
    if (!record(traj, t, rho, options.validity_tol)) {
      break;
    }
  }
  return traj;
}

Trajectory propagate(const DensityMatrix& rho0, const Generator& g, std::span<const double> times,
                     const PropagationOptions& options) {
  Trajectory traj = propagate_partial(rho0, g, times, options);
  if (traj.failure) {
    throw PropagationError(traj.failure->message, traj.failure->time,
                           traj.failure->min_eigenvalue);
  }
  return traj;
}

std::size_t oracle_dim_cap() {
  const char* env = std::getenv("LF_MAX_DIM");
  if (env == nullptr) {
    return kDefaultOracleDim;
  }
  const std::string_view text(env);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    return kDefaultOracleDim;
  }
  return value;
}

Trajectory exact_oracle(const Matrix& h_a, const FiniteBath& bath, std::span<const Matrix> a_ops,
                        const DensityMatrix& rho_a0, std::span<const double> times,
                        std::optional<std::size_t> max_dim) {
  check_times(times);
  const std::size_t da = static_cast<std::size_t>(h_a.rows());
  const std::size_t db = bath.dim();
  const std::size_t cap = max_dim.value_or(oracle_dim_cap());
  if (da * db > cap) {
    std::ostringstream msg;
    msg << "oracle dimension " << da << " x " << db << " = " << da * db << " exceeds the cap "
        << cap << "; use a smaller bath or raise LF_MAX_DIM";
    throw SizeError(msg.str());
  }
  if (!is_square(h_a) || rho_a0.dim() != da) {
    throw StructuralError("system hamiltonian and initial state disagree on the dimension");
  }
  if (a_ops.size() != bath.channel_count()) {
    std::ostringstream msg;
    msg << a_ops.size() << " system operators for " << bath.channel_count() << " bath channels";
    throw StructuralError(msg.str());
  }
  const std::size_t total = da * db;
  const auto dai = static_cast<Eigen::Index>(da);
  const auto dbi = static_cast<Eigen::Index>(db);
  Matrix h = tensor_product(h_a, Matrix::Identity(dbi, dbi), total) +
             tensor_product(Matrix::Identity(dai, dai), bath.hamiltonian(), total);
  for (std::size_t k = 0; k < a_ops.size(); ++k) {
    h += tensor_product(a_ops[k], bath.couplings()[k], total);
  }
  const double defect = hermiticity_defect(h);
  if (defect > 1e-10 * std::max(1.0, max_abs(h))) {
    std::ostringstream msg;
    msg << "total hamiltonian is not hermitian (defect " << defect
        << "); add the adjoint partner channels";
    throw ContractViolation(msg.str());
  }
  const EigenDecomposition eig = hermitian_eigendecomposition(h, 1e-10 * std::max(1.0, max_abs(h)));

  // rho_AB(0) = C C^dag with C = (E_A sqrt(p_A)) (x) (Z sqrt(p_B)); zero-weight
  // columns are dropped.
  const EigenDecomposition sys = hermitian_eigendecomposition(rho_a0.matrix(), 1e-8);
  std::vector<Eigen::Index> keep_a, keep_b;
  for (Eigen::Index i = 0; i < dai; ++i) {
    if (sys.values(i) > 1e-15) {
      keep_a.push_back(i);
    }
  }
  for (Eigen::Index i = 0; i < dbi; ++i) {
    if (bath.populations()(i) > 1e-300) {
      keep_b.push_back(i);
    }
  }
  const auto rank = static_cast<Eigen::Index>(keep_a.size() * keep_b.size());
  Matrix c(static_cast<Eigen::Index>(total), rank);
  Eigen::Index col = 0;
  for (Eigen::Index i : keep_a) {
    const Vector left = std::sqrt(sys.values(i)) * sys.vectors.col(i);
    for (Eigen::Index j : keep_b) {
      const Vector right = std::sqrt(bath.populations()(j)) * bath.eigenbasis().col(j);
      for (Eigen::Index x = 0; x < dai; ++x) {
        c.col(col).segment(x * dbi, dbi) = left(x) * right;
      }
      ++col;
    }
  }
  const Matrix w = eig.vectors.adjoint() * c;

  Trajectory traj;
  traj.method = Method::kExpm;
  Matrix y;
  for (double t : times) {
    Vector phase(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
      phase(k) = std::exp(-kI * eig.values(k) * t);
    }
    y.noalias() = eig.vectors * (phase.asDiagonal() * w);
    Matrix rho = Matrix::Zero(dai, dai);
    for (Eigen::Index i = 0; i < dai; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        // Tr(Y_i Y_j^dag) over the bath rows of blocks i and j.
        const Complex v = (y.middleRows(i * dbi, dbi).cwiseProduct(
                               y.middleRows(j * dbi, dbi).conjugate()))
                              .sum();
        rho(i, j) = v;
        rho(j, i) = std::conj(v);
      }
    }
    traj.times.push_back(t);
    traj.diagnostics.push_back(diagnose(rho));
    traj.states.push_back(std::move(rho));
  }
  return traj;
}

Matrix interaction_picture(const Matrix& op, const Matrix& h0, double t,
                           PictureDirection direction) {
  const Matrix u = matrix_exponential_unitary(h0, t);  // e^{-i h0 t}
  if (direction == PictureDirection::kTo) {
    return u.adjoint() * op * u;
  }
  return u * op * u.adjoint();
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kWarn:
      return "warn";
    case Verdict::kFail:
      break;
  }
  return "fail";
}

Verdict classify_two_scale_ratio(double ratio) {
  if (ratio < 0.1) {
    return Verdict::kPass;
  }
  if (ratio < 1.0) {
    return Verdict::kWarn;
  }
  return Verdict::kFail;
}

TimescaleReport timescale_report(double tau_b, double v_strength) {
  TimescaleReport r;
  r.tau_b = tau_b;
  r.v_strength = v_strength;
  const double rate = v_strength * v_strength * tau_b;
  r.t_a_estimate = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  r.two_scale_ratio = v_strength * tau_b;
  if (std::isnan(r.two_scale_ratio)) {
    r.two_scale_ratio = 0.0;  // 0 * inf: no coupling
  }
  r.verdict = classify_two_scale_ratio(r.two_scale_ratio);
  return r;
}

TimescaleReport timescale_report(const FiniteBath& bath, std::span<const Matrix> a_ops) {
  if (a_ops.size() != bath.channel_count()) {
    throw StructuralError("timescale report needs one system operator per bath channel");
  }
  double x2 = 0.0;
  double a_norm = 0.0;
  for (std::size_t k = 0; k < a_ops.size(); ++k) {
    const Matrix& x = bath.couplings()[k];
    x2 = std::max(x2, (x.adjoint() * x * bath.gibbs()).trace().real());
    if (a_ops[k].size() > 0) {
      Eigen::JacobiSVD<Matrix> svd(a_ops[k]);
      a_norm = std::max(a_norm, svd.singularValues()(0));
    }
  }
  const double v = std::sqrt(std::max(x2, 0.0)) * a_norm;
  const CorrelationTime tau = estimate_correlation_time(bath);
  TimescaleReport r = timescale_report(v > 0.0 ? tau.tau_b : 0.0, v);
  r.tau_b_non_decaying = tau.non_decaying;
  return r;
}

double max_trace_distance(const Trajectory& a, const Trajectory& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    worst = std::max(worst, trace_distance(a.states[k], b.states[k]));
  }
  return worst;
}

}  // namespace lindform
