/*
 * Copyright 2026 The lattice-ctrl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LATTICE_CTRL_ERRORS_HPP_
#define LATTICE_CTRL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lattice_ctrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid cryptosystem or quantization parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Operand out of range, or shapes/moduli that do not match.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A required modulus or intermediate does not fit the supported word size.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by the unreduced integer runtime when a value leaves int64.
class IntegerOverflowError : public Error {
 public:
  IntegerOverflowError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_ERRORS_HPP_
