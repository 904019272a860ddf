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

// Scalar controller run three ways: floating point, naive integer scaling,
// and the conversion pipeline that keeps every value inside Z_q.

#include <cstdint>
#include <iostream>

#include "lattice_ctrl/lattice_ctrl.hpp"

int main() {
  using namespace lattice_ctrl;

  const auto ref = example_reference_outputs(6);
  std::cout << "t   u (float)     naive integer u\n";
  try {
    const auto naive = example_naive_outputs(6);
    for (std::size_t t = 0; t < ref.size(); ++t)
      std::cout << t + 1 << "   " << ref[t] << "\t" << static_cast<long long>(naive[t]) << "\n";
  } catch (const IntegerOverflowError& e) {
    std::cout << "naive scaling overflowed: " << e.what() << "\n";
  }
  if (const auto t = example_first_overflow(std::uint64_t{1} << 48, 64))
    std::cout << "naive state leaves [0, 2^48) at t = " << *t << "\n";

  const ControllerSpec spec = controller_from_json(read_json_file(LATTICE_CTRL_DATA_DIR "/example_scalar.json"));
  const Conversion cv = convert_controller(spec.controller, Scales{*spec.r, *spec.s, *spec.L}, *spec.band);
  std::cout << "converted controller runs on q = 2^" << cv.modular.q.log2() << "\n";

  ReferenceRuntime plain(spec.controller);
  ModularRuntime mod(cv.modular);
  for (int t = 1; t <= 6; ++t) {
    const std::vector<double> y{1.0};
    const double u = plain.step(detail::to_eigen(y))[0];
    const ZqVector yq = quantize_input(y, cv.modular.scales.r, cv.modular.scales.L, cv.modular.q);
    const double g = recover_output(mod.step(yq), cv.modular)[0];
    std::cout << "t=" << t << "  u=" << u << "  g(u)=" << g << "\n";
  }
}
