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

#pragma once

#include <optional>

#include "ruas/image.hpp"
#include "ruas/tensor.hpp"

namespace ruas {

/// Parameters of the illumination warm start.
struct WarmStartConfig {
  /// Residual rectification strength, in (0, 1].
  double gamma = 0.5;
  /// Side of the square neighborhood the channel max runs over (odd, >= 1).
  int window = 3;
  /// Illumination floor; maps are clamped to [eps_t, 1].
  double eps_t = 1e-3;
};

/// Per-stage propagation bundle for stages k >= 1.
struct IlluminationState {
  Tensor u;  ///< y / t_k, not clipped; {h,w,3}, may exceed 1.
  Tensor r;  ///< overexposure residual u - y; {h,w,3}.
  int stage = 0;
};

/// Retinex composition y = x (*) t, broadcast over channels, clipped to [0,1].
Image compose(const Image& x, const IlluminationMap& t);

/// Elementwise division u = y (/) t. The result is intentionally not clipped.
/// Requires every t value to be at least t.floor.
Tensor decompose(const Image& y, const IlluminationMap& t);

/// Illumination warm start. With no state (stage 0) this is the windowed
/// channel max of y; with a state it is the windowed channel max of u minus
/// gamma times the channel mean of the residual. Output is clamped to
/// [eps_t, 1].
IlluminationMap warm_start(const Image& y, const std::optional<IlluminationState>& state,
                           const WarmStartConfig& cfg);

}  // namespace ruas
