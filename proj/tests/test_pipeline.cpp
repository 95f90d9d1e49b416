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

#include "ruas/pipeline.hpp"
#include "ruas/retinex.hpp"
#include "support.hpp"

using namespace ruas;
using test::random_image;
using test::random_tensor;

namespace {

DiscreteCellParams zero_head_cell(const Genotype& g, const CellShape& shape, uint64_t seed) {
  Rng rng(seed);
  DiscreteCellParams cell = init_discrete_cell(g, shape, rng);
  cell.head.w.fill(0.0);
  cell.head.b.fill(0.0);
  return cell;
}

Genotype iem_genotype() {
  return Genotype{"IEM", 3, {Primitive::kConv3, Primitive::kResConv3, Primitive::kConv1, Primitive::kConv3}};
}

Genotype nrm_genotype() {
  return Genotype{"NRM", 6, {Primitive::kResConv3, Primitive::kSkip, Primitive::kConv1, Primitive::kResConv3}};
}

double squash(double v, double eps) {
  const double sig = 1.0 / (1.0 + std::exp(-kSquashGain * (v - kSquashCenter)));
  return eps + (1.0 - eps) * sig;
}

}  // namespace

TEST_CASE("iem_forward with a zeroed head reduces to warm-start propagation (hand unrolled, K=2)") {
  Rng rng(31);
  const Image y = random_image(4, 4, rng, 0.05, 0.8);
  IemSpec spec;
  spec.stages = 2;

  const DiscreteCellParams cell = zero_head_cell(iem_genotype(), CellShape{1, 3, 1}, 7);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };
  const EnhanceTrace trace = iem_forward(y, spec, fn);

  // Hand unroll with the retinex primitives.
  const IlluminationMap hat0 = warm_start(y, std::nullopt, spec.warm);
  Tensor t1(hat0.data.dims());
  for (size_t i = 0; i < t1.size(); ++i)
    t1[i] = std::clamp(squash(hat0.data[i], spec.warm.eps_t), spec.warm.eps_t, 1.0);
  const Tensor u1 = decompose(y, IlluminationMap(t1, spec.warm.eps_t));
  IlluminationState st;
  st.u = u1;
  st.r = u1;
  st.r.axpy(-1.0, y.data);
  st.stage = 1;
  const IlluminationMap hat1 = warm_start(y, st, spec.warm);
  Tensor t2(hat1.data.dims());
  for (size_t i = 0; i < t2.size(); ++i)
    t2[i] = std::clamp(squash(hat1.data[i], spec.warm.eps_t), spec.warm.eps_t, 1.0);
  const Tensor u2 = decompose(y, IlluminationMap(t2, spec.warm.eps_t));

  REQUIRE(trace.t.size() == 2);
  for (size_t i = 0; i < t1.size(); ++i) {
    CHECK(trace.hat_t[0][i] == doctest::Approx(hat0.data[i]).epsilon(1e-12));
    CHECK(trace.t[0][i] == doctest::Approx(t1[i]).epsilon(1e-12));
    CHECK(trace.hat_t[1][i] == doctest::Approx(hat1.data[i]).epsilon(1e-12));
    CHECK(trace.t[1][i] == doctest::Approx(t2[i]).epsilon(1e-12));
  }
  for (size_t i = 0; i < u2.size(); ++i) CHECK(trace.u[1][i] == doctest::Approx(u2[i]).epsilon(1e-12));
}

TEST_CASE("already-bright input passes through within squash distortion") {
  Image y(5, 5);
  y.data.fill(1.0);
  IemSpec spec;
  const DiscreteCellParams cell = zero_head_cell(iem_genotype(), CellShape{1, 3, 1}, 9);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };
  const EnhanceTrace trace = iem_forward(y, spec, fn);
  for (size_t i = 0; i < trace.u.back().size(); ++i)
    CHECK(std::fabs(trace.u.back()[i] - 1.0) <= 0.05);
}

TEST_CASE("K=1 equals one manual stage") {
  Rng rng(41);
  const Image y = random_image(5, 5, rng, 0.1, 0.9);
  Rng wrng(11);
  const DiscreteCellParams cell = init_discrete_cell(iem_genotype(), CellShape{1, 3, 1}, wrng);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };
  IemSpec spec;
  spec.stages = 1;
  const EnhanceTrace trace = iem_forward(y, spec, fn);

  const IlluminationMap hat0 = warm_start(y, std::nullopt, spec.warm);
  Tensor pre = hat0.data;
  pre.axpy(-1.0, discrete_cell_forward(cell, hat0.data));
  Tensor t1(pre.dims());
  for (size_t i = 0; i < t1.size(); ++i) t1[i] = std::clamp(squash(pre[i], spec.warm.eps_t), spec.warm.eps_t, 1.0);
  const Tensor u1 = decompose(y, IlluminationMap(t1, spec.warm.eps_t));
  for (size_t i = 0; i < t1.size(); ++i) CHECK(trace.t.back()[i] == doctest::Approx(t1[i]).epsilon(1e-12));
  for (size_t i = 0; i < u1.size(); ++i) CHECK(trace.u.back()[i] == doctest::Approx(u1[i]).epsilon(1e-12));
}

TEST_CASE("nrm_forward: disabled and zero-denoiser cases return the clipped input") {
  Rng rng(51);
  Tensor u = random_tensor({4, 4, 3}, rng, 0.0, 1.6);  // deliberately exceeds 1

  EnhanceTrace tr0;
  nrm_forward(u, 0, nullptr, &tr0);
  for (size_t i = 0; i < u.size(); ++i) CHECK(tr0.output[i] == doctest::Approx(std::min(u[i], 1.0)));

  const DiscreteCellParams cell = zero_head_cell(nrm_genotype(), CellShape{3, 6, 3}, 13);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };
  EnhanceTrace tr3;
  nrm_forward(u, 3, fn, &tr3);
  CHECK(tr3.x.size() == 4);
  for (size_t i = 0; i < u.size(); ++i) CHECK(tr3.output[i] == doctest::Approx(std::min(u[i], 1.0)));
}

TEST_CASE("nrm_forward: two stages equal two manual applications") {
  Rng rng(61);
  const Tensor u = random_tensor({4, 4, 3}, rng, 0.0, 1.2);
  Rng wrng(17);
  DiscreteCellParams cell = init_discrete_cell(nrm_genotype(), CellShape{3, 6, 3}, wrng);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };

  EnhanceTrace tr;
  nrm_forward(u, 2, fn, &tr);

  Tensor uclip = u;
  for (size_t i = 0; i < uclip.size(); ++i) uclip[i] = std::clamp(uclip[i], 0.0, 1.0);
  Tensor x = uclip;
  for (int n = 0; n < 2; ++n) {
    Tensor next = uclip;
    next.axpy(-1.0, discrete_cell_forward(cell, x));
    for (size_t i = 0; i < next.size(); ++i) next[i] = std::clamp(next[i], 0.0, 1.0);
    x = next;
  }
  for (size_t i = 0; i < x.size(); ++i) CHECK(tr.output[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("enhance: black input stays black; bookkeeping; output range") {
  RuasModel model;
  Rng wrng(19);
  model.iem_cell = init_discrete_cell(iem_genotype(), CellShape{1, 3, 1}, wrng);
  model.nrm_cell = init_discrete_cell(nrm_genotype(), CellShape{3, 6, 3}, wrng);

  Image black(6, 6);
  const EnhanceTrace tr = enhance(black, model);
  for (size_t i = 0; i < tr.output.size(); ++i) CHECK(tr.output[i] == 0.0);

  CHECK(tr.illumination_entries().size() == 4);  // K=3 -> entries k=0..3
  CHECK(tr.x.size() == 4);                       // N=3 -> x_0..x_3

  Rng rng(71);
  const Image y = random_image(6, 6, rng, 0.0, 1.0);
  const EnhanceTrace tr2 = enhance(y, model);
  CHECK(tr2.output.min() >= 0.0);
  CHECK(tr2.output.max() <= 1.0);
}

TEST_CASE("enhance brightens when the denoiser is disabled") {
  Rng rng(81);
  RuasModel model;
  model.iem_cell = zero_head_cell(iem_genotype(), CellShape{1, 3, 1}, 23);
  model.nrm_cell.reset();
  const Image y = random_image(8, 8, rng, 0.0, 0.6);
  const EnhanceTrace tr = enhance(y, model);
  CHECK(tr.output.mean() >= y.data.mean());
}

TEST_CASE("zero-cell enhancement is bit-stable across runs") {
  Rng rng(91);
  const Image y = random_image(7, 7, rng, 0.0, 0.7);
  RuasModel model;
  model.iem_cell = zero_head_cell(iem_genotype(), CellShape{1, 3, 1}, 29);
  model.nrm_cell = zero_head_cell(nrm_genotype(), CellShape{3, 6, 3}, 31);
  const EnhanceTrace a = enhance(y, model);
  const EnhanceTrace b = enhance(y, model);
  for (size_t i = 0; i < a.output.size(); ++i) CHECK(a.output[i] == b.output[i]);
}

TEST_CASE("warm-start modes differ and 'fixed' repeats the stage-0 map") {
  Rng rng(101);
  const Image y = random_image(6, 6, rng, 0.05, 0.6);
  Rng wrng(37);
  const DiscreteCellParams cell = init_discrete_cell(iem_genotype(), CellShape{1, 3, 1}, wrng);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };

  IemSpec fixed;
  fixed.mode = WarmStartMode::kFixed;
  const EnhanceTrace tr_fixed = iem_forward(y, fixed, fn);
  for (size_t i = 0; i < tr_fixed.hat_t[0].size(); ++i) {
    CHECK(tr_fixed.hat_t[1][i] == tr_fixed.hat_t[0][i]);
    CHECK(tr_fixed.hat_t[2][i] == tr_fixed.hat_t[0][i]);
  }

  IemSpec full;
  full.mode = WarmStartMode::kFull;
  IemSpec nores;
  nores.mode = WarmStartMode::kNoResidual;
  const EnhanceTrace tr_full = iem_forward(y, full, fn);
  const EnhanceTrace tr_nores = iem_forward(y, nores, fn);
  double diff = 0.0;
  for (size_t i = 0; i < tr_full.t.back().size(); ++i)
    diff = std::max(diff, std::fabs(tr_full.t.back()[i] - tr_nores.t.back()[i]));
  CHECK(diff > 0.0);
}

TEST_CASE("feeding the cell the refined map changes stages k >= 1 only") {
  Rng rng(121);
  const Image y = random_image(6, 6, rng, 0.05, 0.6);
  Rng wrng(43);
  const DiscreteCellParams cell = init_discrete_cell(iem_genotype(), CellShape{1, 3, 1}, wrng);
  const CellFn fn = [&](const Tensor& in) { return discrete_cell_forward(cell, in); };

  IemSpec warm_spec;
  IemSpec refined_spec;
  refined_spec.cell_on_refined = true;
  const EnhanceTrace a = iem_forward(y, warm_spec, fn);
  const EnhanceTrace b = iem_forward(y, refined_spec, fn);
  for (size_t i = 0; i < a.t[0].size(); ++i) CHECK(a.t[0][i] == b.t[0][i]);  // stage 0 identical
  double diff = 0.0;
  for (size_t i = 0; i < a.t.back().size(); ++i)
    diff = std::max(diff, std::fabs(a.t.back()[i] - b.t.back()[i]));
  CHECK(diff > 0.0);

  // tape path honors the switch identically
  Tape t;
  const Tape::Id y_id = t.leaf(y.data);
  const DiscreteCellIds ids = register_discrete_cell(t, cell);
  const TapeCellFn tfn = [&](Tape& tp, Tape::Id in) { return discrete_cell_forward(tp, ids, in); };
  const IemTapeResult tr = iem_forward_tape(t, y_id, refined_spec, tfn);
  const Tensor& tape_tK = t.value(tr.t_K);
  for (size_t i = 0; i < tape_tK.size(); ++i) CHECK(tape_tK[i] == b.t.back()[i]);
}

TEST_CASE("tape forward equals eager forward for the full pipeline") {
  Rng rng(111);
  const Image y = random_image(6, 6, rng, 0.02, 0.7);
  Rng wrng(41);
  const DiscreteCellParams iem_cell = init_discrete_cell(iem_genotype(), CellShape{1, 3, 1}, wrng);
  const DiscreteCellParams nrm_cell = init_discrete_cell(nrm_genotype(), CellShape{3, 6, 3}, wrng);

  RuasModel model;
  model.iem_cell = iem_cell;
  model.nrm_cell = nrm_cell;
  const EnhanceTrace eager = enhance(y, model);

  Tape t;
  const Tape::Id y_id = t.leaf(y.data);
  const DiscreteCellIds iem_ids = register_discrete_cell(t, iem_cell);
  const DiscreteCellIds nrm_ids = register_discrete_cell(t, nrm_cell);
  const TapeCellFn iem_fn = [&](Tape& tp, Tape::Id in) { return discrete_cell_forward(tp, iem_ids, in); };
  const TapeCellFn nrm_fn = [&](Tape& tp, Tape::Id in) { return discrete_cell_forward(tp, nrm_ids, in); };
  const IemTapeResult ir = iem_forward_tape(t, y_id, model.iem, iem_fn);
  const NrmTapeResult nr = nrm_forward_tape(t, ir.u_K, model.nrm_stages, nrm_fn);

  const Tensor& tape_out = t.value(nr.x_N);
  for (size_t i = 0; i < tape_out.size(); ++i) CHECK(tape_out[i] == eager.output[i]);
  const Tensor& tape_tK = t.value(ir.t_K);
  for (size_t i = 0; i < tape_tK.size(); ++i) CHECK(tape_tK[i] == eager.t.back()[i]);
}
