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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ruas/error.hpp"
#include "ruas/retinex.hpp"
#include "support.hpp"

using namespace ruas;
using test::random_image;

namespace {

// Brute-force windowed channel max with replicate borders; independent of
// the production kernel.
Tensor brute_force_window_max(const Tensor& x, int window) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int r = window / 2;
  Tensor out({h, w, 1});
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double best = -1e300;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          const int xj = std::clamp(xx + dx, 0, w - 1);
          for (int ch = 0; ch < c; ++ch) best = std::max(best, x.at(yy, xj, ch));
        }
      }
      out.at(y, xx, 0) = best;
    }
  }
  return out;
}

IlluminationMap make_map(int h, int w, double v, double floor = 1e-3) {
  return IlluminationMap(Tensor({h, w, 1}, v), floor);
}

}  // namespace

TEST_CASE("compose: identity and scalar scaling") {
  Image x(2, 2);
  x.data.fill(0.8);
  const Image y = compose(x, make_map(2, 2, 1.0));
  for (size_t i = 0; i < y.data.size(); ++i) CHECK(y.data[i] == doctest::Approx(0.8));

  Image ones(2, 2);
  ones.data.fill(1.0);
  const Image q = compose(ones, make_map(2, 2, 0.25));
  for (size_t i = 0; i < q.data.size(); ++i) CHECK(q.data[i] == doctest::Approx(0.25));
}

TEST_CASE("compose/decompose round trip where t >= floor") {
  Rng rng(21);
  const Image y = random_image(4, 4, rng, 0.05, 1.0);
  Tensor tmap({4, 4, 1});
  test::fill_uniform(tmap, rng, 0.2, 1.0);
  const IlluminationMap t(tmap, 1e-3);
  const Tensor u = decompose(y, t);
  const Image back = compose(Image(u), t);
  for (size_t i = 0; i < y.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(y.data[i]).epsilon(1e-6));
}

TEST_CASE("decompose: identity, arithmetic, floor case, precondition") {
  Image y(2, 2);
  y.data.fill(0.3);
  const Tensor u1 = decompose(y, make_map(2, 2, 1.0));
  CHECK(u1[0] == doctest::Approx(0.3));

  const Tensor u2 = decompose(y, make_map(2, 2, 0.6));
  CHECK(u2[0] == doctest::Approx(0.5));

  const Tensor u3 = decompose(y, make_map(2, 2, 1e-3));
  CHECK(u3[0] == doctest::Approx(300.0));  // intentionally unclipped

  CHECK_THROWS_AS(decompose(y, make_map(2, 2, 1e-4)), PreconditionError);
}

TEST_CASE("decompose raises mean exposure when t <= 1") {
  Rng rng(33);
  const Image y = random_image(6, 6, rng, 0.0, 1.0);
  Tensor tmap({6, 6, 1});
  test::fill_uniform(tmap, rng, 0.3, 1.0);
  const Tensor u = decompose(y, IlluminationMap(tmap, 1e-3));
  CHECK(u.mean() >= y.data.mean());
}

TEST_CASE("warm_start: constants and channel max") {
  WarmStartConfig cfg;
  Image y(3, 3);
  y.data.fill(0.5);
  const IlluminationMap t0 = warm_start(y, std::nullopt, cfg);
  for (size_t i = 0; i < t0.data.size(); ++i) CHECK(t0.data[i] == doctest::Approx(0.5));

  Image one(1, 1);
  one.data.at(0, 0, 0) = 0.2;
  one.data.at(0, 0, 1) = 0.4;
  one.data.at(0, 0, 2) = 0.6;
  WarmStartConfig w1;
  w1.window = 1;
  const IlluminationMap tmax = warm_start(one, std::nullopt, w1);
  CHECK(tmax.data[0] == doctest::Approx(0.6));
}

TEST_CASE("warm_start: constant-field residual arithmetic") {
  WarmStartConfig cfg;
  cfg.gamma = 0.5;
  Image y(3, 3);
  y.data.fill(0.4);
  IlluminationState st;
  st.u = Tensor({3, 3, 3}, 0.8);
  st.r = st.u;
  st.r.axpy(-1.0, y.data);  // r = 0.4 everywhere
  st.stage = 1;
  const IlluminationMap t1 = warm_start(y, st, cfg);
  for (size_t i = 0; i < t1.data.size(); ++i) CHECK(t1.data[i] == doctest::Approx(0.6));
}

TEST_CASE("warm_start equals brute-force sliding window max") {
  Rng rng(5);
  WarmStartConfig cfg;
  const Image y = random_image(5, 5, rng, 0.0, 0.9);
  const IlluminationMap t0 = warm_start(y, std::nullopt, cfg);
  const Tensor oracle = brute_force_window_max(y.data, cfg.window);
  for (size_t i = 0; i < t0.data.size(); ++i) {
    CHECK(t0.data[i] == doctest::Approx(std::clamp(oracle[i], cfg.eps_t, 1.0)));
  }
}

TEST_CASE("warm_start invariants") {
  Rng rng(17);
  WarmStartConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const Image y = random_image(6, 7, rng, 0.0, 1.0);
    const IlluminationMap t0 = warm_start(y, std::nullopt, cfg);
    CHECK(t0.data.min() >= cfg.eps_t);
    CHECK(t0.data.max() <= 1.0);
    // hat t_0 dominates every channel at its own pixel.
    for (int yy = 0; yy < 6; ++yy) {
      for (int xx = 0; xx < 7; ++xx) {
        for (int c = 0; c < 3; ++c) CHECK(t0.data.at(yy, xx, 0) >= y.data.at(yy, xx, c));
      }
    }
    const Tensor u = decompose(y, t0);
    CHECK(u.max() <= 1.0 + 1e-6);
  }
}

TEST_CASE("warm_start with zero residual equals plain windowed max") {
  Rng rng(29);
  WarmStartConfig cfg;
  const Image y = random_image(5, 5, rng, 0.1, 0.9);
  IlluminationState st;
  st.u = y.data;                  // u = y means t was all ones
  st.r = Tensor({5, 5, 3}, 0.0);  // residual vanishes
  st.stage = 1;
  const IlluminationMap with_state = warm_start(y, st, cfg);
  const IlluminationMap plain = warm_start(y, std::nullopt, cfg);
  for (size_t i = 0; i < plain.data.size(); ++i) CHECK(with_state.data[i] == plain.data[i]);
}
