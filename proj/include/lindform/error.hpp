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

#pragma once

#include <stdexcept>
#include <string>

namespace lindform {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// A dimension exceeds a configured cap.
class SizeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "size"; }
};

/// Operand shapes do not fit together.
class StructuralError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "structural"; }
};

/// A precondition on operand values failed (hermiticity, positivity, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

/// A scalar parameter is outside its domain (T <= 0, broadening <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A spectral matrix Gamma(omega) is not positive semidefinite.
class PsdViolation : public ContractViolation {
 public:
  PsdViolation(const std::string& what, double omega, double min_eigenvalue)
      : ContractViolation(what), omega_(omega), min_eigenvalue_(min_eigenvalue) {}
  const char* kind() const noexcept override { return "psd"; }
  double omega() const noexcept { return omega_; }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double omega_;
  double min_eigenvalue_;
};

/// The propagated state left the density-matrix validity region.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, double time, double defect)
      : Error(what), time_(time), defect_(defect) {}
  const char* kind() const noexcept override { return "propagation"; }
  double time() const noexcept { return time_; }
  double defect() const noexcept { return defect_; }

 private:
  double time_;
  double defect_;
};

/// Malformed scenario input; `field()` is a JSON path such as "couplings[0].A".
class InputError : public Error {
 public:
  InputError(const std::string& field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(field) {}
  const char* kind() const noexcept override { return "input"; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace lindform
