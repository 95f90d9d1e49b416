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

#include "ruas/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ruas/error.hpp"
#include "ruas/rng.hpp"

namespace ruas {

namespace {

// Smooth field in [0,1]: a few random low-frequency cosine waves, min-max
// normalized per image.
Tensor smooth_field(int size, Rng& rng) {
  Tensor f({size, size, 1});
  const int waves = 3;
  std::vector<double> fx(waves), fy(waves), ph(waves), amp(waves);
  for (int i = 0; i < waves; ++i) {
    fx[static_cast<size_t>(i)] = rng.uniform(-2.0, 2.0);
    fy[static_cast<size_t>(i)] = rng.uniform(-2.0, 2.0);
    ph[static_cast<size_t>(i)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    amp[static_cast<size_t>(i)] = rng.uniform(0.4, 1.0);
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = 0.0;
      for (int i = 0; i < waves; ++i) {
        v += amp[static_cast<size_t>(i)] *
             std::cos(2.0 * std::numbers::pi *
                          (fx[static_cast<size_t>(i)] * x + fy[static_cast<size_t>(i)] * y) /
                          size +
                      ph[static_cast<size_t>(i)]);
      }
      f.at(y, x, 0) = v;
    }
  }
  const double lo = f.min(), hi = f.max();
  const double span = hi > lo ? hi - lo : 1.0;
  for (size_t i = 0; i < f.size(); ++i) f[i] = (f[i] - lo) / span;
  return f;
}

double smoothstep(double edge, double softness, double d) {
  // 1 inside (d < edge), falling to 0 across [edge, edge + softness].
  const double t = std::clamp((d - edge) / softness, 0.0, 1.0);
  return 1.0 - t * t * (3.0 - 2.0 * t);
}

// Well-exposed scenes: brightness (the per-pixel channel max) stays high
// while hue and saturation vary, the statistics the Retinex division
// recovers. Intrinsic darkness lives in the saturated color channels, not
// in the envelope.
Image clean_image(int size, Rng& rng) {
  const Tensor value = smooth_field(size, rng);
  Tensor hue[3] = {smooth_field(size, rng), smooth_field(size, rng), smooth_field(size, rng)};
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double v = 0.78 + 0.22 * value.at(y, x, 0);
      double w[3];
      double wmax = 0.0;
      for (int c = 0; c < 3; ++c) {
        w[c] = 0.25 + 0.75 * hue[c].at(y, x, 0);
        wmax = std::max(wmax, w[c]);
      }
      for (int c = 0; c < 3; ++c) img.data.at(y, x, c) = v * (w[c] / wmax);
    }
  }
  // A few soft disks and rectangles; their colors keep one channel bright.
  const int shapes = 2 + static_cast<int>(rng.below(3));
  for (int s = 0; s < shapes; ++s) {
    const bool disk = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.15, 0.85) * size;
    const double cy = rng.uniform(0.15, 0.85) * size;
    const double radius = rng.uniform(0.08, 0.22) * size;
    double color[3];
    double cmax = 0.0;
    for (double& c : color) {
      c = rng.uniform(0.3, 1.0);
      cmax = std::max(cmax, c);
    }
    const double peak = rng.uniform(0.82, 1.0);
    for (double& c : color) c *= peak / cmax;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double d;
        if (disk) {
          d = std::hypot(x - cx, y - cy);
        } else {
          d = std::max(std::fabs(x - cx), std::fabs(y - cy));
        }
        const double m = smoothstep(radius, 2.0, d);
        if (m <= 0.0) continue;
        for (int c = 0; c < 3; ++c) {
          double& px = img.data.at(y, x, c);
          px = (1.0 - m) * px + m * color[c];
        }
      }
    }
  }
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = std::clamp(img.data[i], 0.0, 1.0);
  return img;
}

}  // namespace

std::vector<SynthSample> synth_lowlight(const SynthConfig& cfg) {
  if (cfg.count < 1) throw ConfigError("synth_lowlight: count must be >= 1");
  if (cfg.size < 4) throw ConfigError("synth_lowlight: size must be >= 4");
  if (cfg.illum_lo <= 0.0 || cfg.illum_hi > 1.0 || cfg.illum_lo > cfg.illum_hi)
    throw ConfigError("synth_lowlight: illumination range must satisfy 0 < lo <= hi <= 1");

  Rng root(cfg.seed);
  std::vector<SynthSample> out;
  out.reserve(static_cast<size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng = root.fork(static_cast<uint64_t>(i));
    SynthSample s;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth_%04d", i);
    s.name = buf;
    s.reference = clean_image(cfg.size, rng);

    const Tensor field = smooth_field(cfg.size, rng);
    s.illumination = Tensor({cfg.size, cfg.size, 1});
    for (size_t p = 0; p < field.size(); ++p)
      s.illumination[p] = cfg.illum_lo + (cfg.illum_hi - cfg.illum_lo) * field[p];

    s.input = Image(cfg.size, cfg.size);
    for (int y = 0; y < cfg.size; ++y) {
      for (int x = 0; x < cfg.size; ++x) {
        const double t = s.illumination.at(y, x, 0);
        for (int c = 0; c < 3; ++c) {
          double v = s.reference.data.at(y, x, c) * t;
          if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.normal();
          s.input.data.at(y, x, c) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ruas
