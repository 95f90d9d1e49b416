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
#include <vector>

#include "ruas/tensor.hpp"

namespace ruas {

/// Gradient descent with heavy-ball momentum: v = m*v + g; p -= lr*v.
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

  std::vector<Tensor>& velocity() { return velocity_; }
  const std::vector<Tensor>& velocity() const { return velocity_; }

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

/// Adaptive-moment optimizer with L2 weight decay folded into the gradient.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double weight_decay)
      : lr_(lr), beta1_(beta1), beta2_(beta2), weight_decay_(weight_decay) {}

  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

  int64_t steps() const { return t_; }
  std::vector<Tensor>& moment1() { return m_; }
  std::vector<Tensor>& moment2() { return v_; }
  void restore(std::vector<Tensor> m, std::vector<Tensor> v, int64_t t);

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double weight_decay_;
  double eps_ = 1e-8;
  int64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// Cosine decay from lr0 to 0 across total_epochs (evaluated per epoch).
double cosine_lr(double lr0, int epoch, int total_epochs);

}  // namespace ruas
