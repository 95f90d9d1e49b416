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

#include <cmath>

#include "ruas/cell.hpp"
#include "ruas/error.hpp"
#include "support.hpp"

using namespace ruas;
using test::random_tensor;

namespace {

Tensor one_hot_logits(const std::array<int, kEdgeCount>& choice, double magnitude = 400.0) {
  Tensor logits = zero_logits();
  for (int e = 0; e < kEdgeCount; ++e)
    logits[static_cast<size_t>(e) * kPrimitiveCount + choice[static_cast<size_t>(e)]] = magnitude;
  return logits;
}

}  // namespace

TEST_CASE("relax: uniform, saturated, matches direct exp/normalize oracle") {
  const Tensor uniform = relax(zero_logits());
  for (size_t i = 0; i < uniform.size(); ++i) CHECK(uniform[i] == doctest::Approx(1.0 / 7).epsilon(1e-9));

  Tensor big = zero_logits();
  big[2] = 100.0;
  const Tensor sat = relax(big);
  CHECK(sat[2] > 1.0 - 1e-6);

  Rng rng(2);
  const Tensor logits = random_tensor({kEdgeCount, kPrimitiveCount}, rng, -3.0, 3.0);
  const Tensor probs = relax(logits);
  for (int e = 0; e < kEdgeCount; ++e) {
    double norm = 0.0;
    for (int j = 0; j < kPrimitiveCount; ++j)
      norm += std::exp(logits[static_cast<size_t>(e) * kPrimitiveCount + j]);
    double row_sum = 0.0;
    for (int j = 0; j < kPrimitiveCount; ++j) {
      const double expect = std::exp(logits[static_cast<size_t>(e) * kPrimitiveCount + j]) / norm;
      CHECK(std::fabs(probs[static_cast<size_t>(e) * kPrimitiveCount + j] - expect) <= 1e-9);
      row_sum += probs[static_cast<size_t>(e) * kPrimitiveCount + j];
    }
    CHECK(std::fabs(row_sum - 1.0) <= 1e-7);
  }
}

TEST_CASE("primitive_forward: skip is identity, zero residual branch is identity") {
  Rng rng(4);
  const Tensor x = random_tensor({4, 4, 3}, rng, -1.0, 1.0);
  const Tensor sc = primitive_forward(Primitive::kSkip, ConvParam{}, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK(sc[i] == x[i]);

  ConvParam zero;
  zero.w = Tensor({3, 3, 3, 3});
  zero.b = Tensor({3});
  const Tensor rc = primitive_forward(Primitive::kResConv3, zero, x);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rc[i] == doctest::Approx(x[i]));
}

TEST_CASE("primitive_forward: 1x1 conv on a single pixel is a hand matrix multiply") {
  Tensor x({1, 1, 2});
  x[0] = 0.3;
  x[1] = -0.2;
  ConvParam p;
  p.w = Tensor({1, 1, 2, 2});
  p.w.at4(0, 0, 0, 0) = 1.0;
  p.w.at4(0, 0, 0, 1) = 2.0;
  p.w.at4(0, 0, 1, 0) = -3.0;
  p.w.at4(0, 0, 1, 1) = 0.5;
  p.b = Tensor({2});
  p.b[0] = 0.1;
  p.b[1] = -1.0;
  const Tensor out = primitive_forward(Primitive::kConv1, p, x);
  // pre-activation: [0.3*1 + (-0.2)*(-3) + 0.1, 0.3*2 + (-0.2)*0.5 - 1.0] = [1.0, -0.5]
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(-0.5 * kLeakySlope));
}

TEST_CASE("primitives preserve spatial size") {
  Rng rng(6);
  ConvParam p;
  p.w = random_tensor({3, 3, 2, 2}, rng, -0.5, 0.5);
  p.b = random_tensor({2}, rng, -0.1, 0.1);
  const Tensor x = random_tensor({7, 5, 2}, rng, -1.0, 1.0);
  for (const Primitive prim : {Primitive::kConv3, Primitive::kResConv3, Primitive::kDilConv3,
                               Primitive::kResDilConv3}) {
    const Tensor out = primitive_forward(prim, p, x);
    CHECK(out.dim(0) == 7);
    CHECK(out.dim(1) == 5);
    CHECK(out.dim(2) == 2);
  }
  CHECK_THROWS_AS(primitive_forward(Primitive::kConv3, p, random_tensor({4, 4, 3}, rng)), DimensionError);
}

TEST_CASE("mixed cell with one-hot logits equals the derived discrete cell") {
  Rng rng(11);
  const CellShape shape{1, 3, 1};
  const MixedCellParams mixed = init_mixed_cell(shape, rng);
  const std::array<int, kEdgeCount> choice = {1, 6, 3, 0};  // C3, SC, RC3, C1
  const Tensor logits = one_hot_logits(choice);

  const Genotype g = derive_genotype(logits, "IEM", shape.width);
  for (int e = 0; e < kEdgeCount; ++e)
    CHECK(static_cast<int>(g.ops[static_cast<size_t>(e)]) == choice[static_cast<size_t>(e)]);

  const DiscreteCellParams discrete = instantiate_discrete(g, mixed);
  const Tensor x = random_tensor({6, 6, 1}, rng, 0.0, 1.0);
  const Tensor a = mixed_cell_forward(mixed, logits, x);
  const Tensor b = discrete_cell_forward(discrete, x);
  for (size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-6);
}

TEST_CASE("mixed cell with uniform logits averages the primitive outputs on an edge") {
  Rng rng(12);
  const CellShape shape{2, 2, 2};
  const MixedCellParams mixed = init_mixed_cell(shape, rng);
  const Tensor x = random_tensor({4, 4, 2}, rng, 0.0, 1.0);

  // Reconstruct node 0 exactly as the cell does (linear stem conv), then
  // compare the first edge mixture against a direct average.
  Tape t;
  const Tape::Id xid = t.leaf(x);
  const MixedCellIds ids = register_mixed_cell(t, mixed, zero_logits());
  const Tape::Id n0_id = t.conv2d(xid, ids.stem_w, ids.stem_b, 1);
  const Tensor node0 = t.value(n0_id);

  Tensor mean(node0.dims());
  for (int j = 0; j < kPrimitiveCount; ++j) {
    mean.axpy(1.0 / kPrimitiveCount,
              primitive_forward(static_cast<Primitive>(j), mixed.edge[0][static_cast<size_t>(j)], node0));
  }
  // The full cell applies further edges; check just the first mixture by
  // evaluating it directly through the tape helper.
  Tape t2;
  const MixedCellIds ids2 = register_mixed_cell(t2, mixed, zero_logits());
  const Tape::Id n0_2 = t2.conv2d(t2.leaf(x), ids2.stem_w, ids2.stem_b, 1);
  const Tape::Id probs = t2.softmax_vec(t2.row(ids2.alpha, 0));
  std::vector<Tape::Id> terms;
  for (int j = 0; j < kPrimitiveCount; ++j) {
    const Primitive prim = static_cast<Primitive>(j);
    Tape::Id branch;
    if (prim == Primitive::kSkip) {
      branch = n0_2;
    } else {
      branch = t2.leaky_relu(t2.conv2d(n0_2, ids2.edge[0][static_cast<size_t>(j)][0],
                                       ids2.edge[0][static_cast<size_t>(j)][1],
                                       primitive_dilation(prim)),
                             kLeakySlope);
      if (primitive_is_residual(prim)) branch = t2.add(n0_2, branch);
    }
    terms.push_back(branch);
  }
  const Tensor mixture = t2.value(t2.weighted_sum(probs, terms));
  for (size_t i = 0; i < mean.size(); ++i) CHECK(mixture[i] == doctest::Approx(mean[i]).epsilon(1e-9));
}

TEST_CASE("mixed cell output is continuous in the logits") {
  Rng rng(14);
  const CellShape shape{1, 3, 1};
  const MixedCellParams mixed = init_mixed_cell(shape, rng);
  Tensor logits = random_tensor({kEdgeCount, kPrimitiveCount}, rng, -1.0, 1.0);
  const Tensor x = random_tensor({6, 6, 1}, rng, 0.0, 1.0);

  const Tensor base = mixed_cell_forward(mixed, logits, x);
  logits[3] += 1e-6;
  const Tensor bumped = mixed_cell_forward(mixed, logits, x);
  double max_diff = 0.0;
  for (size_t i = 0; i < base.size(); ++i) max_diff = std::max(max_diff, std::fabs(base[i] - bumped[i]));
  CHECK(max_diff > 0.0);
  CHECK(max_diff < 1e-4);  // O(1e-6) cell response to an O(1e-6) logit change
}

TEST_CASE("derive_genotype: argmax, tie-break, brute force, shift invariance") {
  Tensor logits = zero_logits();
  logits[static_cast<size_t>(0) * kPrimitiveCount + 1] = 2.0;  // C3 on edge 0
  Genotype g = derive_genotype(logits, "IEM", 3);
  CHECK(g.ops[0] == Primitive::kConv3);
  CHECK(g.ops[1] == Primitive::kConv1);  // all-equal row falls back to the first primitive

  Rng rng(15);
  for (int trial = 0; trial < 25; ++trial) {
    const Tensor l = random_tensor({kEdgeCount, kPrimitiveCount}, rng, -2.0, 2.0);
    const Genotype got = derive_genotype(l, "NRM", 6);
    const Tensor probs = relax(l);
    for (int e = 0; e < kEdgeCount; ++e) {
      int best = 0;
      for (int j = 1; j < kPrimitiveCount; ++j) {
        if (probs[static_cast<size_t>(e) * kPrimitiveCount + j] >
            probs[static_cast<size_t>(e) * kPrimitiveCount + best])
          best = j;
      }
      CHECK(static_cast<int>(got.ops[static_cast<size_t>(e)]) == best);
    }
    // Adding a constant to a row leaves the choice unchanged.
    Tensor shifted = l;
    for (int j = 0; j < kPrimitiveCount; ++j) shifted[static_cast<size_t>(j)] += 3.25;
    const Genotype g2 = derive_genotype(shifted, "NRM", 6);
    CHECK(g2.ops[0] == got.ops[0]);
  }
}

TEST_CASE("instantiate_discrete: parameter counts and skip-only cell") {
  Rng rng(16);
  const CellShape iem_shape{1, 3, 1};
  const MixedCellParams mixed = init_mixed_cell(iem_shape, rng);

  Genotype all_skip{"IEM", 3, {Primitive::kSkip, Primitive::kSkip, Primitive::kSkip, Primitive::kSkip}};
  const DiscreteCellParams d = instantiate_discrete(all_skip, mixed);
  CHECK(discrete_cell_param_count(all_skip, iem_shape) == 58);  // stem(1->3) + head(3->1)
  int64_t enumerated = 0;
  DiscreteCellParams copy = d;
  for (const NamedParam& p : collect_params(copy, "x")) enumerated += static_cast<int64_t>(p.tensor->size());
  CHECK(enumerated == 58);

  Genotype all_c3{"IEM", 3, {Primitive::kConv3, Primitive::kConv3, Primitive::kConv3, Primitive::kConv3}};
  // searched edges alone: 4 * (3*3*3*3 + 3) = 336
  CHECK(discrete_cell_param_count(all_c3, iem_shape) - 58 == 336);

  CHECK_THROWS_AS(instantiate_discrete(Genotype{"IEM", 5, all_c3.ops}, mixed), DimensionError);
}

TEST_CASE("cell forward preserves spatial size and pads with zeros") {
  Rng rng(18);
  const CellShape shape{3, 6, 3};
  const MixedCellParams mixed = init_mixed_cell(shape, rng);
  const Tensor x = random_tensor({9, 4, 3}, rng, 0.0, 1.0);
  const Tensor out = mixed_cell_forward(mixed, zero_logits(), x);
  CHECK(out.dim(0) == 9);
  CHECK(out.dim(1) == 4);
  CHECK(out.dim(2) == 3);
}
