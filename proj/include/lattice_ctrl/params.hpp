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

#ifndef LATTICE_CTRL_PARAMS_HPP_
#define LATTICE_CTRL_PARAMS_HPP_

#include <cstddef>
#include <string>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl {

// Cryptosystem parameters. Ciphertexts live in Z_q^(n+1).
struct Params {
  std::size_t n = 0;
  Modulus q{48};
  NoiseSpec noise;
  GadgetSpec gadget;

  static Params make(std::size_t n, unsigned log2_q, double sigma,
                     unsigned n0 = 6, unsigned log2_nu = 16) {
    Params p{n, Modulus(log2_q), NoiseSpec{sigma, n0}, {}};
    p.gadget = GadgetSpec::for_modulus(p.q, log2_nu);
    p.validate();
    return p;
  }

  // Ciphertext width n+1.
  std::size_t width() const { return n + 1; }
  bool insecure() const { return noise.sigma == 0.0; }

  void validate() const {
    if (n == 0) throw ParameterError("key dimension n must be positive");
    noise.validate();
    gadget.validate(q);
    if (noise.bound() >= static_cast<double>(q.value()) / 2) {
      throw ParameterError("noise bound n0*sigma must be below q/2");
    }
  }

  bool operator==(const Params& o) const {
    return n == o.n && q == o.q && noise.sigma == o.noise.sigma &&
           noise.n0 == o.noise.n0 && gadget == o.gadget;
  }
};

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_PARAMS_HPP_
