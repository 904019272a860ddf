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

#ifndef LATTICE_CTRL_SECURITY_HPP_
#define LATTICE_CTRL_SECURITY_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>

#include "lattice_ctrl/errors.hpp"

namespace lattice_ctrl {

// Lattice-reduction sizing rule
//   n * ln q >= ((lambda + 110) / 7.2) * (ln(sqrt(2 pi) sigma / q))^2.

namespace detail {

inline void check_security_inputs(unsigned log2_q, double sigma) {
  if (!(sigma > 0.0) || log2_q == 0 || log2_q > 1023 ||
      std::log2(sigma) >= static_cast<double>(log2_q)) {
    throw ParameterError("security sizing requires q > sigma > 0");
  }
}

inline double log_noise_ratio(unsigned log2_q, double sigma) {
  return std::log(std::sqrt(2.0 * std::numbers::pi) * sigma) -
         static_cast<double>(log2_q) * std::numbers::ln2;
}

}  // namespace detail

// Security level lambda reached by dimension n.
inline double security_estimate(std::size_t n, unsigned log2_q, double sigma) {
  detail::check_security_inputs(log2_q, sigma);
  const double ln_q = static_cast<double>(log2_q) * std::numbers::ln2;
  const double r = detail::log_noise_ratio(log2_q, sigma);
  return 7.2 * static_cast<double>(n) * ln_q / (r * r) - 110.0;
}

// Real-valued dimension at which the rule holds with equality.
inline double min_n_threshold(double lambda, unsigned log2_q, double sigma) {
  detail::check_security_inputs(log2_q, sigma);
  const double ln_q = static_cast<double>(log2_q) * std::numbers::ln2;
  const double r = detail::log_noise_ratio(log2_q, sigma);
  return ((lambda + 110.0) / 7.2) * r * r / ln_q;
}

// Smallest integer dimension satisfying the rule.
inline std::size_t min_n(double lambda, unsigned log2_q, double sigma) {
  return static_cast<std::size_t>(std::ceil(min_n_threshold(lambda, log2_q, sigma)));
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_SECURITY_HPP_
