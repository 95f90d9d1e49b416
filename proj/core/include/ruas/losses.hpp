// Copyright 2026 The RUAS Authors. All rights reserved.
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

// Reference-free objectives. The illumination loss keeps the final refined
// map close to the stage-0 warm start while smoothing texture through a
// relative total variation term; the denoising loss keeps the output close
// to the brightened image under a standard total variation penalty. No
// ground-truth image is consumed anywhere.

#pragma once

#include "ruas/autodiff.hpp"
#include "ruas/tensor.hpp"

namespace ruas {

struct LossWeights {
  double eta_t = 0.01;  ///< relative-TV weight in the illumination loss
  double eta_n = 0.05;  ///< TV weight in the denoising loss
  double beta = 1.0;    ///< cooperation trade-off (>= 0)
};

struct RtvConfig {
  int window = 3;      ///< local region side (odd, >= 3)
  double sigma_g = 1.0;  ///< Gaussian weight width
  double eps_s = 1e-3;   ///< stabilizer in the D/L ratio
};

/// Anisotropic total variation: sum over pixels and channels of
/// |forward x-difference| + |forward y-difference|; border differences are
/// zero.
double tv(const Tensor& x);

/// Relative total variation of a single-channel map: per pixel and
/// direction, windowed-Gaussian total variation D divided by the magnitude
/// of the windowed-Gaussian net variation L (plus a stabilizer). Oscillating
/// texture yields large D with small L and is penalized harder than coherent
/// structure.
double rtv(const Tensor& t, const RtvConfig& cfg);

/// 0.5 * sum((t_K - hat_t0)^2) + eta_t * rtv(t_K).
double iem_loss(const Tensor& t_K, const Tensor& hat_t0, const LossWeights& w, const RtvConfig& cfg);

/// 0.5 * sum((x_N - u_K)^2) + eta_n * tv(x_N).
double nrm_loss(const Tensor& x_N, const Tensor& u_K, const LossWeights& w);

/// l_t + beta * l_n.
double cooperative_val_loss(double l_t, double l_n, double beta);

// Tape counterparts (return scalar node ids).
Tape::Id tv_tape(Tape& t, Tape::Id x);
Tape::Id rtv_tape(Tape& t, Tape::Id map, const RtvConfig& cfg);
Tape::Id iem_loss_tape(Tape& t, Tape::Id t_K, Tape::Id hat_t0, const LossWeights& w, const RtvConfig& cfg);
Tape::Id nrm_loss_tape(Tape& t, Tape::Id x_N, Tape::Id u_K, const LossWeights& w);

}  // namespace ruas
