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

#include <cstdint>
#include <string>
#include <vector>

#include "ruas/image.hpp"

namespace ruas {

/// Parameters of the synthetic low-light generator.
struct SynthConfig {
  int count = 16;
  int size = 64;               ///< square images
  double noise_sigma = 0.0;    ///< Gaussian noise added after darkening
  double illum_lo = 0.05;      ///< illumination field range
  double illum_hi = 0.5;
  uint64_t seed = 1;
};

/// A generated triple. The reference is for metrics only; training code
/// receives input images exclusively.
struct SynthSample {
  std::string name;
  Image input;           ///< reference (*) illumination (+ noise), clipped
  Image reference;       ///< clean well-lit image
  Tensor illumination;   ///< true smooth field, {h,w,1}
};

/// Clean images are smooth random gradients with a few soft shapes; inputs
/// are darkened by a smooth illumination field and optionally corrupted by
/// Gaussian noise. Byte-identical for a fixed config.
std::vector<SynthSample> synth_lowlight(const SynthConfig& cfg);

}  // namespace ruas
