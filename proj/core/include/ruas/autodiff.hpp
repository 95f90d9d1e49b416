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
#include <functional>
#include <vector>

#include "ruas/tensor.hpp"

namespace ruas {

/// Reverse-mode autodiff over a single forward pass. A tape is built, the
/// scalar root is backpropagated once, leaf gradients are read out, and the
/// tape is discarded. Tapes are cheap to construct and not thread-safe.
class Tape {
 public:
  using Id = int32_t;

  Id leaf(Tensor v);

  const Tensor& value(Id id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& grad(Id id) const { return nodes_[static_cast<size_t>(id)].grad; }
  size_t node_count() const { return nodes_.size(); }

  /// Backpropagates from a scalar node. May be called once per tape.
  void backward(Id root);

  // Elementwise algebra (shapes must match).
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id scale(Id a, double s);
  Id add_const(Id a, double s);
  Id abs(Id a);
  /// num / (den + eps), elementwise, same shapes.
  Id div_eps(Id num, Id den, double eps);

  // Neural ops.
  Id conv2d(Id x, Id w, Id b, int dilation);
  Id leaky_relu(Id x, double slope);
  Id scaled_sigmoid(Id x, double gain, double center);
  Id clamp(Id x, double lo, double hi);

  // Illumination ops.
  Id window_channel_max(Id x, int window);
  Id channel_mean(Id x);
  Id div_broadcast(Id num, Id den);

  // Loss building blocks.
  Id diff_x(Id x);
  Id diff_y(Id x);
  Id gauss_window_sum(Id x, int window, double sigma);
  Id sum(Id x);
  /// 0.5 * sum((a - b)^2) as a scalar.
  Id half_sum_sq_diff(Id a, Id b);

  // Architecture mixing.
  /// Extracts row r of a {m,n} tensor as a {n} vector.
  Id row(Id matrix, int r);
  Id softmax_vec(Id logits);
  /// sum_i weights[i] * terms[i]; weights is a {n} vector node.
  Id weighted_sum(Id weights, const std::vector<Id>& terms);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back;
  };

  Id push(Tensor value, std::function<void(Tape&)> back);
  Tensor& grad_mut(Id id) { return nodes_[static_cast<size_t>(id)].grad; }

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace ruas
