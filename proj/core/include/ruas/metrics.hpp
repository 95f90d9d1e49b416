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
#include "ruas/pipeline.hpp"

namespace ruas {

/// Peak PSNR reported for identical images (zero MSE).
inline constexpr double kPsnrCap = 100.0;

/// 10*log10(1 / MSE) over all pixels and channels, capped at 100 dB.
double psnr(const Image& a, const Image& b);

/// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, window centers restricted to the valid
/// region, averaged over channels. Throws if the image is smaller than the
/// window.
double ssim(const Image& a, const Image& b);

/// Exact count of trainable scalars, from closed-form per-primitive counts.
int64_t count_params(const RuasModel& model);
/// Same count, by enumerating every weight tensor.
int64_t count_params_enumerated(const RuasModel& model);

/// Analytic FLOPs of one enhancement pass at the given resolution.
/// Convention: 2 FLOPs per multiply-accumulate; a kxk convolution costs
/// 2*k*k*c_in*c_out*h*w; skip connections are free; each warm start is
/// counted as window*h*w comparisons. Stated in every report.
int64_t count_flops(const RuasModel& model, int height, int width);

inline constexpr const char* kFlopConvention =
    "2 FLOPs per multiply-accumulate (conv only); warm start counted as window*h*w comparisons";

/// Quality and complexity summary for a set of image pairs.
struct MetricReport {
  struct PerImage {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
  };
  std::vector<PerImage> per_image;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int64_t params = 0;
  int64_t flops = 0;
  int flops_height = 0;
  int flops_width = 0;
  double seconds_per_image = 0.0;
  std::string flop_convention = kFlopConvention;
};

/// PSNR/SSIM over matched pairs; aggregates are plain means.
MetricReport evaluate_pairs(const std::vector<std::string>& names, const std::vector<Image>& outputs,
                            const std::vector<Image>& references);

}  // namespace ruas
