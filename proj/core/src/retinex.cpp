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

#include "ruas/retinex.hpp"

#include <algorithm>

#include "kernels.hpp"
#include "ruas/error.hpp"

namespace ruas {

Image compose(const Image& x, const IlluminationMap& t) {
  const Tensor& xd = x.data;
  const Tensor& td = t.data;
  if (xd.dim(0) != td.dim(0) || xd.dim(1) != td.dim(1))
    throw DimensionError("compose: image and illumination sizes differ");
  Tensor out = xd;
  const int c = xd.dim(2);
  for (size_t p = 0; p < td.size(); ++p) {
    for (int ch = 0; ch < c; ++ch) {
      out[p * c + ch] = std::clamp(out[p * c + ch] * td[p], 0.0, 1.0);
    }
  }
  return Image(std::move(out));
}

Tensor decompose(const Image& y, const IlluminationMap& t) {
  if (y.data.dim(0) != t.data.dim(0) || y.data.dim(1) != t.data.dim(1))
    throw DimensionError("decompose: image and illumination sizes differ");
  if (t.data.min() < t.floor)
    throw PreconditionError("decompose: illumination below floor; clamp it first");
  return kernels::div_broadcast(y.data, t.data);
}

IlluminationMap warm_start(const Image& y, const std::optional<IlluminationState>& state,
                           const WarmStartConfig& cfg) {
  Tensor map;
  if (!state.has_value()) {
    map = kernels::window_channel_max(y.data, cfg.window, nullptr);
  } else {
    map = kernels::window_channel_max(state->u, cfg.window, nullptr);
    const Tensor rmean = kernels::channel_mean(state->r);
    map.axpy(-cfg.gamma, rmean);
  }
  map = kernels::clamp(map, cfg.eps_t, 1.0);
  return IlluminationMap(std::move(map), cfg.eps_t);
}

}  // namespace ruas
