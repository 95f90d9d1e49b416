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

#include "kernels.hpp"

#include <algorithm>
#include <cmath>

#include "ruas/error.hpp"

namespace ruas::kernels {

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int dilation) {
  const int h = x.dim(0), wd = x.dim(1), ci = x.dim(2);
  const int k = w.dim(0), co = w.dim(3);
  if (w.dim(2) != ci) throw DimensionError("conv2d: input channels do not match kernel");
  const int ck = k / 2;
  Tensor out({h, wd, co});
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < wd; ++xx) {
      double* op = &out.at(y, xx, 0);
      for (int o = 0; o < co; ++o) op[o] = b[static_cast<size_t>(o)];
      for (int ky = 0; ky < k; ++ky) {
        const int yy = y + (ky - ck) * dilation;
        if (yy < 0 || yy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int xj = xx + (kx - ck) * dilation;
          if (xj < 0 || xj >= wd) continue;
          const double* ip = &x.at(yy, xj, 0);
          for (int i = 0; i < ci; ++i) {
            const double xi = ip[i];
            const double* wp = &w.at4(ky, kx, i, 0);
            for (int o = 0; o < co; ++o) op[o] += xi * wp[o];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gout, int dilation,
                     Tensor* gx, Tensor* gw, Tensor* gb) {
  const int h = x.dim(0), wd = x.dim(1), ci = x.dim(2);
  const int k = w.dim(0), co = w.dim(3);
  const int ck = k / 2;
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < wd; ++xx) {
      const double* gp = &gout.at(y, xx, 0);
      if (gb) {
        for (int o = 0; o < co; ++o) (*gb)[static_cast<size_t>(o)] += gp[o];
      }
      for (int ky = 0; ky < k; ++ky) {
        const int yy = y + (ky - ck) * dilation;
        if (yy < 0 || yy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int xj = xx + (kx - ck) * dilation;
          if (xj < 0 || xj >= wd) continue;
          const double* ip = &x.at(yy, xj, 0);
          double* gip = gx ? &gx->at(yy, xj, 0) : nullptr;
          for (int i = 0; i < ci; ++i) {
            const double xi = ip[i];
            const double* wp = &w.at4(ky, kx, i, 0);
            double* gwp = gw ? &gw->at4(ky, kx, i, 0) : nullptr;
            double acc = 0.0;
            for (int o = 0; o < co; ++o) {
              const double g = gp[o];
              if (gwp) gwp[o] += xi * g;
              acc += wp[o] * g;
            }
            if (gip) gip[i] += acc;
          }
        }
      }
    }
  }
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] *= slope;
  }
  return out;
}

void leaky_relu_backward(const Tensor& x, const Tensor& gout, double slope, Tensor* gx) {
  for (size_t i = 0; i < x.size(); ++i) (*gx)[i] += gout[i] * (x[i] >= 0.0 ? 1.0 : slope);
}

Tensor scaled_sigmoid(const Tensor& x, double gain, double center) {
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-gain * (out[i] - center)));
  return out;
}

void scaled_sigmoid_backward(const Tensor& out, const Tensor& gout, double gain, Tensor* gx) {
  for (size_t i = 0; i < out.size(); ++i) (*gx)[i] += gout[i] * gain * out[i] * (1.0 - out[i]);
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(hi, std::max(lo, out[i]));
  return out;
}

void clamp_backward(const Tensor& x, const Tensor& gout, double lo, double hi, Tensor* gx) {
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= lo && x[i] <= hi) (*gx)[i] += gout[i];
  }
}

Tensor window_channel_max(const Tensor& x, int window, std::vector<uint32_t>* argmax) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int r = window / 2;
  Tensor out({h, w, 1});
  if (argmax) argmax->assign(static_cast<size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double best = -1e300;
      uint32_t best_idx = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          const int xj = std::clamp(xx + dx, 0, w - 1);
          const double* p = &x.at(yy, xj, 0);
          for (int ch = 0; ch < c; ++ch) {
            if (p[ch] > best) {
              best = p[ch];
              best_idx = static_cast<uint32_t>((static_cast<size_t>(yy) * w + xj) * c + ch);
            }
          }
        }
      }
      out.at(y, xx, 0) = best;
      if (argmax) (*argmax)[static_cast<size_t>(y) * w + xx] = best_idx;
    }
  }
  return out;
}

void window_channel_max_backward(const Tensor& gout, const std::vector<uint32_t>& argmax, Tensor* gx) {
  for (size_t p = 0; p < argmax.size(); ++p) (*gx)[argmax[p]] += gout[p];
}

Tensor channel_mean(const Tensor& x) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({h, w, 1});
  const double inv = 1.0 / c;
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const double* p = &x.at(y, xx, 0);
      double s = 0.0;
      for (int ch = 0; ch < c; ++ch) s += p[ch];
      out.at(y, xx, 0) = s * inv;
    }
  }
  return out;
}

void channel_mean_backward(const Tensor& gout, int channels, Tensor* gx) {
  const double inv = 1.0 / channels;
  for (size_t p = 0; p < gout.size(); ++p) {
    for (int ch = 0; ch < channels; ++ch) (*gx)[p * channels + ch] += gout[p] * inv;
  }
}

Tensor div_broadcast(const Tensor& num, const Tensor& den) {
  const int h = num.dim(0), w = num.dim(1), c = num.dim(2);
  if (den.dim(0) != h || den.dim(1) != w || den.dim(2) != 1)
    throw DimensionError("div_broadcast: denominator must be {h,w,1}");
  Tensor out({h, w, c});
  for (size_t p = 0; p < den.size(); ++p) {
    const double inv = 1.0 / den[p];
    for (int ch = 0; ch < c; ++ch) out[p * c + ch] = num[p * c + ch] * inv;
  }
  return out;
}

void div_broadcast_backward(const Tensor& num, const Tensor& den, const Tensor& gout,
                            Tensor* gnum, Tensor* gden) {
  const int c = num.dim(2);
  for (size_t p = 0; p < den.size(); ++p) {
    const double d = den[p];
    const double inv = 1.0 / d;
    double acc = 0.0;
    for (int ch = 0; ch < c; ++ch) {
      const double g = gout[p * c + ch];
      if (gnum) (*gnum)[p * c + ch] += g * inv;
      acc += g * num[p * c + ch];
    }
    if (gden) (*gden)[p] -= acc * inv * inv;
  }
}

Tensor diff_x(const Tensor& x) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({h, w, c});
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx + 1 < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) out.at(y, xx, ch) = x.at(y, xx + 1, ch) - x.at(y, xx, ch);
    }
  }
  return out;
}

void diff_x_backward(const Tensor& gout, Tensor* gx) {
  const int h = gout.dim(0), w = gout.dim(1), c = gout.dim(2);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx + 1 < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) {
        const double g = gout.at(y, xx, ch);
        gx->at(y, xx + 1, ch) += g;
        gx->at(y, xx, ch) -= g;
      }
    }
  }
}

Tensor diff_y(const Tensor& x) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({h, w, c});
  for (int y = 0; y + 1 < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) out.at(y, xx, ch) = x.at(y + 1, xx, ch) - x.at(y, xx, ch);
    }
  }
  return out;
}

void diff_y_backward(const Tensor& gout, Tensor* gx) {
  const int h = gout.dim(0), w = gout.dim(1), c = gout.dim(2);
  for (int y = 0; y + 1 < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      for (int ch = 0; ch < c; ++ch) {
        const double g = gout.at(y, xx, ch);
        gx->at(y + 1, xx, ch) += g;
        gx->at(y, xx, ch) -= g;
      }
    }
  }
}

namespace {
// Unnormalized Gaussian taps for a window x window neighborhood.
std::vector<double> gauss_taps(int window, double sigma) {
  const int r = window / 2;
  std::vector<double> taps(static_cast<size_t>(window) * window);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      taps[static_cast<size_t>(dy + r) * window + (dx + r)] =
          std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
    }
  }
  return taps;
}
}  // namespace

Tensor gauss_window_sum(const Tensor& x, int window, double sigma) {
  const int h = x.dim(0), w = x.dim(1);
  if (x.dim(2) != 1) throw DimensionError("gauss_window_sum: expects a single-channel map");
  const int r = window / 2;
  const std::vector<double> taps = gauss_taps(window, sigma);
  Tensor out({h, w, 1});
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double s = 0.0, norm = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xj = xx + dx;
          if (xj < 0 || xj >= w) continue;
          const double g = taps[static_cast<size_t>(dy + r) * window + (dx + r)];
          s += g * x.at(yy, xj, 0);
          norm += g;
        }
      }
      out.at(y, xx, 0) = s / norm;
    }
  }
  return out;
}

void gauss_window_sum_backward(const Tensor& gout, int window, double sigma, Tensor* gx) {
  const int h = gout.dim(0), w = gout.dim(1);
  const int r = window / 2;
  const std::vector<double> taps = gauss_taps(window, sigma);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double norm = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xj = xx + dx;
          if (xj < 0 || xj >= w) continue;
          norm += taps[static_cast<size_t>(dy + r) * window + (dx + r)];
        }
      }
      const double g = gout.at(y, xx, 0) / norm;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -r; dx <= r; ++dx) {
          const int xj = xx + dx;
          if (xj < 0 || xj >= w) continue;
          gx->at(yy, xj, 0) += g * taps[static_cast<size_t>(dy + r) * window + (dx + r)];
        }
      }
    }
  }
}

Tensor softmax_vec(const Tensor& logits) {
  Tensor out = logits;
  double mx = out.max();
  double sum = 0.0;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(out[i] - mx);
    sum += out[i];
  }
  for (size_t i = 0; i < out.size(); ++i) out[i] /= sum;
  return out;
}

void softmax_vec_backward(const Tensor& out, const Tensor& gout, Tensor* glogits) {
  double dot = 0.0;
  for (size_t i = 0; i < out.size(); ++i) dot += gout[i] * out[i];
  for (size_t i = 0; i < out.size(); ++i) (*glogits)[i] += out[i] * (gout[i] - dot);
}

}  // namespace ruas::kernels
