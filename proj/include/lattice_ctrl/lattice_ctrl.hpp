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

#ifndef LATTICE_CTRL_LATTICE_CTRL_HPP_
#define LATTICE_CTRL_LATTICE_CTRL_HPP_

#include "lattice_ctrl/container.hpp"
#include "lattice_ctrl/convert.hpp"
#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/gsw.hpp"
#include "lattice_ctrl/io.hpp"
#include "lattice_ctrl/lwe.hpp"
#include "lattice_ctrl/matrix.hpp"
#include "lattice_ctrl/mpc.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"
#include "lattice_ctrl/runtime.hpp"
#include "lattice_ctrl/security.hpp"

#endif  // LATTICE_CTRL_LATTICE_CTRL_HPP_
