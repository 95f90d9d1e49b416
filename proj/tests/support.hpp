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

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ruas/image.hpp"
#include "ruas/rng.hpp"
#include "ruas/tensor.hpp"

namespace ruas::test {

inline void fill_uniform(Tensor& t, Rng& rng, double lo, double hi) {
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
}

inline Tensor random_tensor(std::vector<int> dims, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  fill_uniform(t, rng, lo, hi);
  return t;
}

inline Image random_image(int h, int w, Rng& rng, double lo = 0.0, double hi = 1.0) {
  return Image(random_tensor({h, w, 3}, rng, lo, hi));
}

/// Shuffled lattice values in (0,1) with pairwise gaps of at least 1/n.
/// Keeps finite-difference probes of kinked ops (abs, max) away from ties.
inline Tensor separated_tensor(std::vector<int> dims, Rng& rng) {
  Tensor t(std::move(dims));
  const size_t n = t.size();
  const std::vector<size_t> perm = rng.permutation(n);
  for (size_t i = 0; i < n; ++i) t[i] = (static_cast<double>(perm[i]) + 0.5) / static_cast<double>(n);
  return t;
}

struct GradCheck {
  double max_rel_err = 0.0;
  size_t entries = 0;
};

/// Central finite differences against analytic gradients. `f` must evaluate
/// the scalar objective at the current contents of `params`; entries are
/// perturbed in place and restored. The denominator floor absorbs the
/// difference-quotient roundoff (about objective * 1e-16 / h) on entries
/// whose true gradient is zero.
inline GradCheck finite_diff_check(const std::function<double()>& f,
                                   const std::vector<Tensor*>& params,
                                   const std::vector<const Tensor*>& analytic, double h = 1e-5,
                                   double floor_denom = 1e-3) {
  GradCheck res;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    const Tensor& g = *analytic[p];
    for (size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double fp = f();
      t[i] = saved - h;
      const double fm = f();
      t[i] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::fabs(g[i]), std::fabs(fd), floor_denom});
      res.max_rel_err = std::max(res.max_rel_err, std::fabs(g[i] - fd) / denom);
      ++res.entries;
    }
  }
  return res;
}

}  // namespace ruas::test
