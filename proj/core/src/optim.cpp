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

#include "ruas/optim.hpp"

#include <cmath>
#include <numbers>

#include "ruas/error.hpp"

namespace ruas {

void SgdMomentum::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw DimensionError("SgdMomentum::step: param/grad count");
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const Tensor* p : params) velocity_.emplace_back(p->dims());
  }
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& v = velocity_[i];
    const Tensor& g = *grads[i];
    Tensor& p = *params[i];
    for (size_t j = 0; j < p.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j];
      p[j] -= lr_ * v[j];
    }
  }
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw DimensionError("Adam::step: param/grad count");
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
      m_.emplace_back(p->dims());
      v_.emplace_back(p->dims());
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] + weight_decay_ * p[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * gj;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * gj * gj;
      p[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
    }
  }
}

void Adam::restore(std::vector<Tensor> m, std::vector<Tensor> v, int64_t t) {
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

double cosine_lr(double lr0, int epoch, int total_epochs) {
  if (total_epochs <= 1) return lr0;
  const double phase = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return 0.5 * lr0 * (1.0 + std::cos(std::numbers::pi * phase));
}

}  // namespace ruas
