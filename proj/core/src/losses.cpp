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

#include "ruas/losses.hpp"

#include <cmath>

#include "kernels.hpp"
#include "ruas/error.hpp"

namespace ruas {

namespace k = kernels;

double tv(const Tensor& x) {
  if (!x.all_finite()) throw PreconditionError("tv: non-finite input");
  const Tensor dx = k::diff_x(x);
  const Tensor dy = k::diff_y(x);
  double s = 0.0;
  for (size_t i = 0; i < dx.size(); ++i) s += std::fabs(dx[i]) + std::fabs(dy[i]);
  return s;
}

double rtv(const Tensor& t, const RtvConfig& cfg) {
  if (!t.all_finite()) throw PreconditionError("rtv: non-finite input");
  if (t.dim(2) != 1) throw DimensionError("rtv: expects a single-channel map");
  double total = 0.0;
  for (const bool horizontal : {true, false}) {
    const Tensor d = horizontal ? k::diff_x(t) : k::diff_y(t);
    Tensor ad = d;
    for (size_t i = 0; i < ad.size(); ++i) ad[i] = std::fabs(ad[i]);
    const Tensor D = k::gauss_window_sum(ad, cfg.window, cfg.sigma_g);
    const Tensor L = k::gauss_window_sum(d, cfg.window, cfg.sigma_g);
    for (size_t i = 0; i < D.size(); ++i) total += D[i] / (std::fabs(L[i]) + cfg.eps_s);
  }
  return total;
}

double iem_loss(const Tensor& t_K, const Tensor& hat_t0, const LossWeights& w, const RtvConfig& cfg) {
  check_same_shape(t_K, hat_t0, "iem_loss");
  double fid = 0.0;
  for (size_t i = 0; i < t_K.size(); ++i) {
    const double d = t_K[i] - hat_t0[i];
    fid += d * d;
  }
  return 0.5 * fid + w.eta_t * rtv(t_K, cfg);
}

double nrm_loss(const Tensor& x_N, const Tensor& u_K, const LossWeights& w) {
  check_same_shape(x_N, u_K, "nrm_loss");
  double fid = 0.0;
  for (size_t i = 0; i < x_N.size(); ++i) {
    const double d = x_N[i] - u_K[i];
    fid += d * d;
  }
  return 0.5 * fid + w.eta_n * tv(x_N);
}

double cooperative_val_loss(double l_t, double l_n, double beta) {
  if (!std::isfinite(l_t) || !std::isfinite(l_n)) throw PreconditionError("cooperative_val_loss: non-finite");
  return l_t + beta * l_n;
}

Tape::Id tv_tape(Tape& t, Tape::Id x) {
  const Tape::Id sx = t.sum(t.abs(t.diff_x(x)));
  const Tape::Id sy = t.sum(t.abs(t.diff_y(x)));
  return t.add(sx, sy);
}

Tape::Id rtv_tape(Tape& t, Tape::Id map, const RtvConfig& cfg) {
  Tape::Id total = -1;
  for (const bool horizontal : {true, false}) {
    const Tape::Id d = horizontal ? t.diff_x(map) : t.diff_y(map);
    const Tape::Id D = t.gauss_window_sum(t.abs(d), cfg.window, cfg.sigma_g);
    const Tape::Id L = t.abs(t.gauss_window_sum(d, cfg.window, cfg.sigma_g));
    const Tape::Id term = t.sum(t.div_eps(D, L, cfg.eps_s));
    total = (total < 0) ? term : t.add(total, term);
  }
  return total;
}

Tape::Id iem_loss_tape(Tape& t, Tape::Id t_K, Tape::Id hat_t0, const LossWeights& w, const RtvConfig& cfg) {
  const Tape::Id fid = t.half_sum_sq_diff(t_K, hat_t0);
  return t.add(fid, t.scale(rtv_tape(t, t_K, cfg), w.eta_t));
}

Tape::Id nrm_loss_tape(Tape& t, Tape::Id x_N, Tape::Id u_K, const LossWeights& w) {
  const Tape::Id fid = t.half_sum_sq_diff(x_N, u_K);
  return t.add(fid, t.scale(tv_tape(t, x_N), w.eta_n));
}

}  // namespace ruas
