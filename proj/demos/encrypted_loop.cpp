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

// Encrypted closed loop on the double integrator fixture, then one
// two-party product.

#include <iostream>

#include "lattice_ctrl/lattice_ctrl.hpp"

int main() {
  using namespace lattice_ctrl;

  const RunConfig rc = load_run_config(LATTICE_CTRL_DATA_DIR "/double_integrator.json");
  const OutputBand band =
      estimate_output_band(*rc.plant, rc.controller.controller, rc.horizon, rc.margin, rc.epsilon);
  const Conversion cv = convert_controller(rc.controller.controller, rc.scales(), band);
  const Params p = Params::make(rc.crypto.n, cv.modular.q.log2(), rc.crypto.sigma);
  const SimTrace tr = closed_loop_simulate({*rc.plant, cv, p, rc.horizon, rc.seed});

  std::cout << "q = 2^" << cv.modular.q.log2() << ", n = " << p.n << ", sigma = " << p.noise.sigma << "\n"
            << "sup |g(u) - u|, modular loop:   " << tr.summary.sup_err_modq << "\n"
            << "sup |g(Dec u) - u|, encrypted:  " << tr.summary.sup_err_enc << "\n"
            << "mean error added by encryption: " << tr.summary.mean_gap_enc << "\n";

  const Params mp = Params::make(16, 5, 0.0);
  SeededRng rng(5);
  mpc::KeyHolder unit1(keygen(mp, rng), mp, 1);
  mpc::Evaluator unit2(mp, 2);
  mpc::Channel ch;
  const auto c = mpc::two_party_mult(6, 7, unit1, unit2, ch);
  std::cout << "two-party 6 * 7 mod 32 = " << unit1.reveal(c) << "\n";
}
