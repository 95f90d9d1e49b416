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

#include <vector>

#include "ruas/cell.hpp"
#include "ruas/tensor.hpp"

namespace ruas {

inline std::vector<Tensor> snapshot_params(const std::vector<NamedParam>& refs) {
  std::vector<Tensor> out;
  out.reserve(refs.size());
  for (const NamedParam& p : refs) out.push_back(*p.tensor);
  return out;
}

inline void load_params(const std::vector<NamedParam>& refs, const std::vector<Tensor>& values) {
  for (size_t i = 0; i < refs.size(); ++i) *refs[i].tensor = values[i];
}

inline std::vector<Tensor*> param_ptrs(const std::vector<NamedParam>& refs) {
  std::vector<Tensor*> out;
  out.reserve(refs.size());
  for (const NamedParam& p : refs) out.push_back(p.tensor);
  return out;
}

inline std::vector<const Tensor*> grad_ptrs(const std::vector<Tensor>& grads) {
  std::vector<const Tensor*> out;
  out.reserve(grads.size());
  for (const Tensor& g : grads) out.push_back(&g);
  return out;
}

inline std::vector<Tensor> vec_zeros_like(const std::vector<Tensor>& v) {
  std::vector<Tensor> out;
  out.reserve(v.size());
  for (const Tensor& t : v) out.emplace_back(t.dims());
  return out;
}

inline std::vector<Tensor> vec_combine(const std::vector<Tensor>& a, double s, const std::vector<Tensor>& b) {
  std::vector<Tensor> out = a;
  for (size_t i = 0; i < out.size(); ++i) out[i].axpy(s, b[i]);
  return out;
}

inline double vec_norm(const std::vector<Tensor>& v) {
  double s = 0.0;
  for (const Tensor& t : v) {
    const double n = t.norm();
    s += n * n;
  }
  return std::sqrt(s);
}

inline bool vec_all_finite(const std::vector<Tensor>& v) {
  for (const Tensor& t : v) {
    if (!t.all_finite()) return false;
  }
  return true;
}

/// Rescales the stacked gradient to the given global norm when it exceeds
/// it. The relative-TV term is stiff near flat regions, so raw gradients
/// occasionally spike by orders of magnitude.
inline void clip_to_norm(std::vector<Tensor>* grads, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = vec_norm(*grads);
  if (n > max_norm) {
    const double s = max_norm / n;
    for (Tensor& g : *grads) g.scale(s);
  }
}

}  // namespace ruas
