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

// Internal numerical kernels. Each forward has a matching backward used by
// the autodiff tape; the eager pipeline calls the forwards directly.

#pragma once

#include <cstdint>
#include <vector>

#include "ruas/tensor.hpp"

namespace ruas::kernels {

// 2-D convolution, stride 1, zero padding chosen so spatial size is
// preserved. x {h,w,ci}, w {k,k,ci,co}, b {co} -> {h,w,co}.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int dilation);
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gout, int dilation,
                     Tensor* gx, Tensor* gw, Tensor* gb);

Tensor leaky_relu(const Tensor& x, double slope);
void leaky_relu_backward(const Tensor& x, const Tensor& gout, double slope, Tensor* gx);

/// logistic(gain * (x - center)), elementwise.
Tensor scaled_sigmoid(const Tensor& x, double gain, double center);
void scaled_sigmoid_backward(const Tensor& out, const Tensor& gout, double gain, Tensor* gx);

Tensor clamp(const Tensor& x, double lo, double hi);
void clamp_backward(const Tensor& x, const Tensor& gout, double lo, double hi, Tensor* gx);

/// Max over a window x window neighborhood (replicate border) and over all
/// channels: {h,w,c} -> {h,w,1}. argmax records the winning flat index.
Tensor window_channel_max(const Tensor& x, int window, std::vector<uint32_t>* argmax);
void window_channel_max_backward(const Tensor& gout, const std::vector<uint32_t>& argmax, Tensor* gx);

/// Mean over channels: {h,w,c} -> {h,w,1}.
Tensor channel_mean(const Tensor& x);
void channel_mean_backward(const Tensor& gout, int channels, Tensor* gx);

/// num {h,w,c} / den {h,w,1}, broadcasting den over channels.
Tensor div_broadcast(const Tensor& num, const Tensor& den);
void div_broadcast_backward(const Tensor& num, const Tensor& den, const Tensor& gout,
                            Tensor* gnum, Tensor* gden);

/// Forward differences along x / y; last column / row is zero.
Tensor diff_x(const Tensor& x);
void diff_x_backward(const Tensor& gout, Tensor* gx);
Tensor diff_y(const Tensor& x);
void diff_y_backward(const Tensor& gout, Tensor* gx);

/// Gaussian-weighted window sum on a single-channel map {h,w,1}; weights are
/// renormalized over the part of the window inside the image.
Tensor gauss_window_sum(const Tensor& x, int window, double sigma);
void gauss_window_sum_backward(const Tensor& gout, int window, double sigma, Tensor* gx);

/// Row-wise numerically stable softmax of a {n} vector.
Tensor softmax_vec(const Tensor& logits);
void softmax_vec_backward(const Tensor& out, const Tensor& gout, Tensor* glogits);

}  // namespace ruas::kernels
