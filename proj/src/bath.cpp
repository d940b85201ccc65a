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

#include "lindform/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lindform {

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0.0)) {
    std::ostringstream msg;
    msg << "temperature must be positive (or +inf), got " << temperature;
    throw DomainError(msg.str());
  }
}

// Weighted sum over bath transitions z -> xi:
//   sum_{z,xi} p(z) <z|X_a^dagger|xi><xi|X_b|z> f(w_z - w_xi).
template <typename F>
Complex transition_sum(const FiniteBath& bath, std::size_t alpha, std::size_t beta, F&& f) {
  const Matrix& xa = bath.coupling_in_eigenbasis(alpha);
  const Matrix& xb = bath.coupling_in_eigenbasis(beta);
  const RealVector& e = bath.energies();
  const RealVector& p = bath.populations();
  const auto n = static_cast<Eigen::Index>(bath.dim());
  Complex total = 0.0;
  for (Eigen::Index z = 0; z < n; ++z) {
    if (p(z) == 0.0) {
      continue;
    }
    Complex row = 0.0;
    for (Eigen::Index xi = 0; xi < n; ++xi) {
      const Complex w = std::conj(xa(xi, z)) * xb(xi, z);
      if (w != 0.0) {
        row += w * f(e(z) - e(xi));
      }
    }
    total += p(z) * row;
  }
  return total;
}

void check_channel(const FiniteBath& bath, std::size_t channel) {
  if (channel >= bath.channel_count()) {
    std::ostringstream msg;
    msg << "channel " << channel << " out of range (bath has " << bath.channel_count() << ")";
    throw StructuralError(msg.str());
  }
}

}  // namespace

RealVector boltzmann_weights(const RealVector& energies, double temperature) {
  check_temperature(temperature);
  const auto n = energies.size();
  RealVector p(n);
  if (n == 0) {
    return p;
  }
  if (std::isinf(temperature)) {
    p.setConstant(1.0 / static_cast<double>(n));
    return p;
  }
  const double e0 = energies.minCoeff();
  for (Eigen::Index z = 0; z < n; ++z) {
    p(z) = std::exp(-(energies(z) - e0) / temperature);
  }
  p /= p.sum();
  return p;
}

DensityMatrix gibbs_state(const Matrix& h_b, double temperature) {
  check_temperature(temperature);
  const EigenDecomposition eig = hermitian_eigendecomposition(h_b);
  const RealVector p = boltzmann_weights(eig.values, temperature);
  return DensityMatrix(spectral_function(eig, p.cast<Complex>()));
}

double default_broadening(const RealVector& energies) {
  const auto n = energies.size();
  std::vector<double> bohr;
  bohr.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      bohr.push_back(energies(i) - energies(j));
    }
  }
  std::sort(bohr.begin(), bohr.end());
  const double scale = n == 0 ? 0.0 : energies.cwiseAbs().maxCoeff();
  const double tol = std::max(1e-9 * scale, 1e-14);
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < bohr.size(); ++i) {
    if (i == 0 || bohr[i] - bohr[i - 1] > tol) {
      ++distinct;
    }
  }
  if (distinct < 2) {
    return 1.0;
  }
  const double spacing = (bohr.back() - bohr.front()) / static_cast<double>(distinct - 1);
  return 4.0 * spacing;
}

FiniteBath::FiniteBath(Matrix h_b, double temperature, std::vector<Matrix> couplings,
                       std::optional<double> broadening)
    : h_b_(std::move(h_b)), temperature_(temperature), couplings_(std::move(couplings)) {
  check_temperature(temperature_);
  if (!is_square(h_b_) || h_b_.size() == 0) {
    throw StructuralError("bath hamiltonian must be a non-empty square matrix");
  }
  eig_ = hermitian_eigendecomposition(h_b_, std::max(kDefaultValidationTol, 1e-12 * max_abs(h_b_)));
  populations_ = boltzmann_weights(eig_.values, temperature_);
  gibbs_ = spectral_function(eig_, populations_.cast<Complex>());
  broadening_ = broadening.value_or(default_broadening(eig_.values));
  if (!(broadening_ > 0.0) || !std::isfinite(broadening_)) {
    std::ostringstream msg;
    msg << "broadening must be positive and finite, got " << broadening_;
    throw DomainError(msg.str());
  }
  couplings_eig_.reserve(couplings_.size());
  for (std::size_t k = 0; k < couplings_.size(); ++k) {
    if (couplings_[k].rows() != h_b_.rows() || couplings_[k].cols() != h_b_.cols()) {
      std::ostringstream msg;
      msg << "bath coupling " << k << " has shape " << couplings_[k].rows() << "x"
          << couplings_[k].cols() << ", expected " << h_b_.rows() << "x" << h_b_.cols();
      throw StructuralError(msg.str());
    }
    couplings_eig_.push_back(eig_.vectors.adjoint() * couplings_[k] * eig_.vectors);
  }
}

FiniteBath FiniteBath::with_couplings(std::vector<Matrix> couplings) const {
  return FiniteBath(h_b_, temperature_, std::move(couplings), broadening_);
}

FiniteBath FiniteBath::with_broadening(double broadening) const {
  return FiniteBath(h_b_, temperature_, couplings_, broadening);
}

AnalyticBath flat_thermal_bath(double gamma, double temperature, double dephasing,
                               std::size_t channels, double zero_tol) {
  if (!(temperature >= 0.0) || std::isinf(temperature)) {
    throw DomainError("flat-thermal bath needs a finite temperature >= 0");
  }
  if (!(gamma >= 0.0) || !(dephasing >= 0.0)) {
    throw DomainError("flat-thermal rates must be non-negative");
  }
  AnalyticBath bath;
  bath.channel_count = channels;
  bath.model = "flat-thermal";
  bath.gamma_fn = [=](double omega) -> Matrix {
    double rate = dephasing;
    if (std::abs(omega) > zero_tol) {
      const double x = std::abs(omega);
      const double nbar = temperature == 0.0 ? 0.0 : 1.0 / std::expm1(x / temperature);
      rate = omega > 0.0 ? gamma * (nbar + 1.0) : gamma * nbar;
    }
    return Matrix::Identity(static_cast<Eigen::Index>(channels),
                            static_cast<Eigen::Index>(channels)) *
           rate;
  };
  return bath;
}

AnalyticBath table_bath(std::vector<SpectralTableEntry> entries, double matching_tol) {
  if (entries.empty()) {
    throw StructuralError("spectral table is empty");
  }
  const auto channels = static_cast<std::size_t>(entries.front().gamma.rows());
  for (const auto& entry : entries) {
    if (static_cast<std::size_t>(entry.gamma.rows()) != channels ||
        static_cast<std::size_t>(entry.gamma.cols()) != channels ||
        (entry.delta && (static_cast<std::size_t>(entry.delta->rows()) != channels ||
                         static_cast<std::size_t>(entry.delta->cols()) != channels))) {
      std::ostringstream msg;
      msg << "table entry at omega=" << entry.omega << " is not " << channels << "x"
          << channels;
      throw StructuralError(msg.str());
    }
  }
  auto lookup = [entries, matching_tol](double omega) -> const SpectralTableEntry& {
    const SpectralTableEntry* best = nullptr;
    double best_gap = matching_tol;
    for (const auto& entry : entries) {
      const double gap = std::abs(entry.omega - omega);
      if (gap <= best_gap) {
        best_gap = gap;
        best = &entry;
      }
    }
    if (best == nullptr) {
      std::ostringstream msg;
      msg << "spectral table has no entry at omega=" << omega;
      throw ContractViolation(msg.str());
    }
    // entries is captured by value, so the reference stays valid for the
    // lifetime of the closure that calls us.
    return *best;
  };
  AnalyticBath bath;
  bath.channel_count = channels;
  bath.model = "table";
  bath.gamma_fn = [lookup](double omega) -> Matrix { return lookup(omega).gamma; };
  bath.delta_fn = [lookup, channels](double omega) -> Matrix {
    const auto& entry = lookup(omega);
    if (entry.delta) {
      return *entry.delta;
    }
    return Matrix::Zero(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(channels));
  };
  return bath;
}

std::size_t channel_count(const Bath& bath) {
  return std::visit(
      [](const auto& b) -> std::size_t {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, FiniteBath>) {
          return b.channel_count();
        } else {
          return b.channel_count;
        }
      },
      bath);
}

Complex half_fourier_w(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                       double omega) {
  check_channel(bath, alpha);
  check_channel(bath, beta);
  const double eps = bath.broadening();
  return transition_sum(bath, alpha, beta, [&](double w_zx) {
    return kI / Complex(omega + w_zx, eps);
  });
}

namespace {

Matrix finite_gamma(const FiniteBath& bath, double omega) {
  const auto n = bath.channel_count();
  const double eps = bath.broadening();
  Matrix g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          transition_sum(bath, a, b, [&](double w_zx) {
            const double x = omega + w_zx;
            return Complex(2.0 * eps / (x * x + eps * eps), 0.0);
          });
    }
  }
  return g;
}

Matrix finite_delta(const FiniteBath& bath, double omega) {
  const auto n = bath.channel_count();
  const double eps = bath.broadening();
  Matrix d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          transition_sum(bath, a, b, [&](double w_zx) {
            const double x = omega + w_zx;
            return Complex(x / (x * x + eps * eps), 0.0);
          });
    }
  }
  return d;
}

void check_shape(const Matrix& m, std::size_t channels, const char* what, double omega) {
  if (static_cast<std::size_t>(m.rows()) != channels ||
      static_cast<std::size_t>(m.cols()) != channels) {
    std::ostringstream msg;
    msg << what << "(" << omega << ") has shape " << m.rows() << "x" << m.cols() << ", expected "
        << channels << "x" << channels;
    throw StructuralError(msg.str());
  }
}

}  // namespace

Matrix evaluate_gamma(const Bath& bath, double omega) {
  if (const auto* fb = std::get_if<FiniteBath>(&bath)) {
    return finite_gamma(*fb, omega);
  }
  const auto& ab = std::get<AnalyticBath>(bath);
  Matrix g = ab.gamma_fn(omega);
  check_shape(g, ab.channel_count, "Gamma", omega);
  return g;
}

Matrix gamma_matrix(const Bath& bath, double omega) {
  Matrix g = evaluate_gamma(bath, omega);
  const double scale = max_abs(g);
  const double defect = hermiticity_defect(g);
  if (defect > 1e-12 * std::max(1.0, scale)) {
    std::ostringstream msg;
    msg << "Gamma(" << omega << ") is not hermitian: defect " << defect;
    throw ContractViolation(msg.str());
  }
  if (g.size() > 0) {
    const double lowest = min_hermitian_eigenvalue(g);
    if (lowest < -1e-8 * scale) {
      std::ostringstream msg;
      msg << "Gamma(" << omega << ") is not positive semidefinite: lowest eigenvalue " << lowest;
      throw PsdViolation(msg.str(), omega, lowest);
    }
  }
  return g;
}

Matrix delta_matrix(const Bath& bath, double omega) {
  if (const auto* fb = std::get_if<FiniteBath>(&bath)) {
    return finite_delta(*fb, omega);
  }
  const auto& ab = std::get<AnalyticBath>(bath);
  const auto n = static_cast<Eigen::Index>(ab.channel_count);
  if (!ab.delta_fn) {
    return Matrix::Zero(n, n);
  }
  Matrix d = ab.delta_fn(omega);
  check_shape(d, ab.channel_count, "Delta", omega);
  const double defect = hermiticity_defect(d);
  if (defect > 1e-12 * std::max(1.0, max_abs(d))) {
    std::ostringstream msg;
    msg << "Delta(" << omega << ") is not hermitian: defect " << defect;
    throw ContractViolation(msg.str());
  }
  return d;
}

Matrix w_matrix(const Bath& bath, double omega) {
  if (const auto* fb = std::get_if<FiniteBath>(&bath)) {
    const auto n = fb->channel_count();
    Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            half_fourier_w(*fb, a, b, omega);
      }
    }
    return w;
  }
  return 0.5 * gamma_matrix(bath, omega) + kI * delta_matrix(bath, omega);
}

std::vector<CouplingPair> hermitize_coupling(std::span<const CouplingPair> pairs) {
  std::vector<CouplingPair> out;
  if (pairs.empty()) {
    return out;
  }
  const auto da = pairs.front().a.rows();
  const auto db = pairs.front().x.rows();
  for (const auto& pair : pairs) {
    if (!is_square(pair.a) || !is_square(pair.x) || pair.a.rows() != da || pair.x.rows() != db) {
      throw StructuralError("coupling pairs must share square system and bath dimensions");
    }
  }
  const std::size_t cap = static_cast<std::size_t>(da * db);
  auto assemble = [&](const std::vector<CouplingPair>& terms, bool partnered) {
    Matrix v = Matrix::Zero(da * db, da * db);
    for (const auto& t : terms) {
      if (partnered) {
        v += tensor_product(t.a, t.x.adjoint(), cap) + tensor_product(t.a.adjoint(), t.x, cap);
      } else {
        v += tensor_product(t.a, t.x, cap);
      }
    }
    return v;
  };
  const std::vector<CouplingPair> input(pairs.begin(), pairs.end());
  const Matrix v_in = assemble(input, true);
  const double defect = hermiticity_defect(v_in);
  if (!(defect <= 1e-12 * std::max(1.0, max_abs(v_in)))) {
    std::ostringstream msg;
    msg << "interaction hamiltonian is not hermitian: defect " << defect;
    throw ContractViolation(msg.str());
  }
  const double r = 1.0 / std::numbers::sqrt2;
  for (const auto& pair : pairs) {
    // A (x) X^dagger + A^dagger (x) X = q (x) Q + p (x) P
    CouplingPair qq{r * (pair.a + pair.a.adjoint()), r * (pair.x + pair.x.adjoint())};
    CouplingPair pp{kI * r * (pair.a - pair.a.adjoint()), kI * r * (pair.x - pair.x.adjoint())};
    for (auto* c : {&qq, &pp}) {
      if (max_abs(c->a) >= kDefaultValidationTol * 1e-5 &&
          max_abs(c->x) >= kDefaultValidationTol * 1e-5) {
        out.push_back(std::move(*c));
      }
    }
  }
  return out;
}

CenteredCouplings center_couplings(const FiniteBath& bath, std::span<const Matrix> a_ops) {
  if (a_ops.size() != bath.channel_count()) {
    std::ostringstream msg;
    msg << a_ops.size() << " system operators for " << bath.channel_count() << " bath channels";
    throw StructuralError(msg.str());
  }
  std::vector<Matrix> shifted;
  std::vector<Complex> means;
  Matrix shift;
  const auto db = static_cast<Eigen::Index>(bath.dim());
  for (std::size_t k = 0; k < bath.channel_count(); ++k) {
    const Complex mean = (bath.couplings()[k] * bath.gibbs()).trace();
    means.push_back(mean);
    shifted.push_back(bath.couplings()[k] - mean * Matrix::Identity(db, db));
    if (shift.size() == 0) {
      shift = Matrix::Zero(a_ops[k].rows(), a_ops[k].cols());
    }
    shift += mean * a_ops[k];
  }
  return {bath.with_couplings(std::move(shifted)), std::move(means), std::move(shift)};
}

Complex correlation_function(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                             double tau) {
  check_channel(bath, alpha);
  check_channel(bath, beta);
  return transition_sum(bath, alpha, beta,
                        [&](double w_zx) { return std::exp(kI * w_zx * tau); });
}

Complex correlation_two_time(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                             double t1, double t2) {
  check_channel(bath, alpha);
  check_channel(bath, beta);
  const Matrix& h = bath.hamiltonian();
  const Matrix u1 = matrix_exponential_unitary(h, t1);  // e^{-iH t1}
  const Matrix u2 = matrix_exponential_unitary(h, t2);
  const Matrix xa = u1.adjoint() * bath.couplings()[alpha].adjoint() * u1;
  const Matrix xb = u2.adjoint() * bath.couplings()[beta] * u2;
  return (xa * xb * bath.gibbs()).trace();
}

CorrelationTime estimate_correlation_time(const FiniteBath& bath) {
  CorrelationTime out;
  const std::size_t nc = bath.channel_count();
  const auto n = static_cast<Eigen::Index>(bath.dim());
  const RealVector& e = bath.energies();
  const RealVector& p = bath.populations();

  // Weight matrices M_ab(z, xi) = p(z) conj(X_a(xi,z)) X_b(xi,z), so that
  // G_ab(tau) = sum_{z,xi} e^{i E_z tau} M_ab(z,xi) e^{-i E_xi tau}.
  std::vector<Matrix> weights;
  double peak = 0.0;
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = 0; b < nc; ++b) {
      const Matrix& xa = bath.coupling_in_eigenbasis(a);
      const Matrix& xb = bath.coupling_in_eigenbasis(b);
      Matrix m = (xa.conjugate().cwiseProduct(xb)).transpose();
      for (Eigen::Index z = 0; z < n; ++z) {
        m.row(z) *= p(z);
      }
      peak = std::max(peak, max_abs(m));
      weights.push_back(std::move(m));
    }
  }
  if (peak == 0.0) {
    return out;  // no coupling: tau_B = 0 by convention
  }
  const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
  double w_max = 0.0;
  double w_slow = std::numeric_limits<double>::infinity();
  std::vector<double> lines;
  for (const auto& m : weights) {
    for (Eigen::Index z = 0; z < n; ++z) {
      for (Eigen::Index xi = 0; xi < n; ++xi) {
        if (std::abs(m(z, xi)) <= 1e-12 * peak) {
          continue;
        }
        lines.push_back(e(z) - e(xi));
        const double w = std::abs(lines.back());
        w_max = std::max(w_max, w);
        if (w > 1e-9 * scale) {
          w_slow = std::min(w_slow, w);
        }
      }
    }
  }
  // The closest pair of spectral lines sets the first recurrence.
  std::sort(lines.begin(), lines.end());
  double w_beat = w_slow;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const double gap = lines[k] - lines[k - 1];
    if (gap > 1e-9 * scale) {
      w_beat = std::min(w_beat, gap);
    }
  }
  if (w_max == 0.0 || !std::isfinite(w_slow)) {
    // Only static contributions: the correlation never decays.
    out.tau_b = std::numeric_limits<double>::infinity();
    out.non_decaying = true;
    return out;
  }
  const double pi = std::numbers::pi;
  const double horizon = 2.0 * pi / w_beat;
  constexpr std::size_t kMaxSamples = 200000;
  // The step resolves the fastest frequency; the scan stops at the first
  // recurrence or kMaxSamples, whichever comes first.
  const double step = pi / (4.0 * w_max);
  const auto samples = static_cast<std::size_t>(
      std::min(std::ceil(horizon / step), static_cast<double>(kMaxSamples)));
  out.grid_step = step;

  Vector u = Vector::Ones(n);
  Vector v = Vector::Ones(n);
  Vector du(n), dv(n);
  for (Eigen::Index z = 0; z < n; ++z) {
    du(z) = std::exp(kI * e(z) * step);
    dv(z) = std::conj(du(z));
  }
  std::vector<double> g;  // max_ab |G_ab| per grid point
  g.reserve(1024);
  auto evaluate_next = [&]() {
    double worst = 0.0;
    for (const auto& m : weights) {
      worst = std::max(worst, std::abs(u.cwiseProduct(m * v).sum()));
    }
    g.push_back(worst);
    u = u.cwiseProduct(du);
    v = v.cwiseProduct(dv);
  };
  evaluate_next();
  const double threshold = 0.05 * g.front();

  std::size_t candidate = 1;
  while (2 * candidate <= samples) {
    while (g.size() <= 2 * candidate) {
      evaluate_next();
    }
    std::size_t violation = 0;
    for (std::size_t j = candidate; j <= 2 * candidate; ++j) {
      if (g[j] > threshold) {
        violation = j;
      }
    }
    if (violation == 0) {
      out.tau_b = static_cast<double>(candidate) * step;
      return out;
    }
    candidate = violation + 1;
  }
  out.tau_b = pi / w_slow;
  out.non_decaying = true;
  return out;
}

CorrelationTable correlation_table(const FiniteBath& bath, std::span<const double> taus) {
  CorrelationTable table;
  const std::size_t nc = bath.channel_count();
  table.taus.assign(taus.begin(), taus.end());
  for (double tau : taus) {
    Matrix g(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
    for (std::size_t a = 0; a < nc; ++a) {
      for (std::size_t b = 0; b < nc; ++b) {
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            correlation_function(bath, a, b, tau);
      }
    }
    table.values.push_back(std::move(g));
  }
  const CorrelationTime est = estimate_correlation_time(bath);
  table.tau_b_estimate = est.tau_b;
  table.non_decaying = est.non_decaying;
  return table;
}

}  // namespace lindform
