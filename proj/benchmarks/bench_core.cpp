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

#include <benchmark/benchmark.h>

#include "ruas/bilevel.hpp"
#include "ruas/losses.hpp"
#include "ruas/metrics.hpp"
#include "ruas/pipeline.hpp"
#include "ruas/rng.hpp"
#include "ruas/synth.hpp"

namespace {

using namespace ruas;

Image bench_image(int side, uint64_t seed) {
  SynthConfig sc;
  sc.count = 1;
  sc.size = side;
  sc.seed = seed;
  return synth_lowlight(sc)[0].input;
}

RuasModel bench_model() {
  Rng rng(3);
  RuasModel m;
  m.iem_cell = init_discrete_cell(
      Genotype{"IEM", 3, {Primitive::kConv3, Primitive::kResConv3, Primitive::kDilConv3, Primitive::kConv3}},
      CellShape{1, 3, 1}, rng);
  m.nrm_cell = init_discrete_cell(
      Genotype{"NRM", 6, {Primitive::kResConv3, Primitive::kSkip, Primitive::kConv1, Primitive::kResConv3}},
      CellShape{3, 6, 3}, rng);
  return m;
}

void BM_EnhanceDiscrete(benchmark::State& state) {
  const Image y = bench_image(static_cast<int>(state.range(0)), 7);
  const RuasModel model = bench_model();
  for (auto _ : state) {
    const EnhanceTrace trace = enhance(y, model);
    benchmark::DoNotOptimize(trace.output.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EnhanceDiscrete)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_SupernetForward(benchmark::State& state) {
  const Image y = bench_image(static_cast<int>(state.range(0)), 9);
  SearchConfig cfg;
  const SuperModel model = init_super_model(cfg);
  for (auto _ : state) {
    const EnhanceTrace trace = super_enhance(y, model, true);
    benchmark::DoNotOptimize(trace.output.data());
  }
}
BENCHMARK(BM_SupernetForward)->Arg(32)->Arg(64);

void BM_WarmStart(benchmark::State& state) {
  const Image y = bench_image(static_cast<int>(state.range(0)), 11);
  const WarmStartConfig cfg;
  for (auto _ : state) {
    const IlluminationMap t = warm_start(y, std::nullopt, cfg);
    benchmark::DoNotOptimize(t.data.data());
  }
}
BENCHMARK(BM_WarmStart)->Arg(64)->Arg(256);

void BM_Tv(benchmark::State& state) {
  const Image y = bench_image(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(tv(y.data));
}
BENCHMARK(BM_Tv)->Arg(64)->Arg(256);

void BM_Rtv(benchmark::State& state) {
  const Image y = bench_image(static_cast<int>(state.range(0)), 15);
  const WarmStartConfig wcfg;
  const IlluminationMap t = warm_start(y, std::nullopt, wcfg);
  const RtvConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(rtv(t.data, cfg));
}
BENCHMARK(BM_Rtv)->Arg(64)->Arg(256);

void BM_Ssim(benchmark::State& state) {
  const Image a = bench_image(static_cast<int>(state.range(0)), 17);
  const Image b = bench_image(static_cast<int>(state.range(0)), 18);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
