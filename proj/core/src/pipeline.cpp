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

#include "ruas/pipeline.hpp"

#include "kernels.hpp"
#include "ruas/error.hpp"

namespace ruas {

namespace k = kernels;

const char* warm_start_mode_name(WarmStartMode m) {
  switch (m) {
    case WarmStartMode::kFixed: return "fixed";
    case WarmStartMode::kNoResidual: return "no-residual";
    case WarmStartMode::kFull: return "full";
  }
  return "full";
}

std::optional<WarmStartMode> warm_start_mode_from_name(const std::string& name) {
  if (name == "fixed") return WarmStartMode::kFixed;
  if (name == "no-residual") return WarmStartMode::kNoResidual;
  if (name == "full") return WarmStartMode::kFull;
  return std::nullopt;
}

std::vector<Tensor> EnhanceTrace::illumination_entries() const {
  std::vector<Tensor> entries;
  if (!hat_t.empty()) entries.push_back(hat_t.front());
  for (const Tensor& tk : t) entries.push_back(tk);
  return entries;
}

EnhanceTrace iem_forward(const Image& y, const IemSpec& spec, const CellFn& cell) {
  if (spec.stages < 1) throw ConfigError("iem_forward: K must be >= 1");
  const WarmStartConfig& wc = spec.warm;
  EnhanceTrace trace;
  Tensor hat = k::clamp(k::window_channel_max(y.data, wc.window, nullptr), wc.eps_t, 1.0);
  const Tensor hat0 = hat;
  for (int stage = 0; stage < spec.stages; ++stage) {
    trace.hat_t.push_back(hat);
    const Tensor& cell_in = (spec.cell_on_refined && stage > 0) ? trace.t.back() : hat;
    Tensor pre = hat;
    pre.axpy(-1.0, cell(cell_in));
    Tensor t_next = k::scaled_sigmoid(pre, kSquashGain, kSquashCenter);
    t_next.scale(1.0 - wc.eps_t);
    for (size_t i = 0; i < t_next.size(); ++i) t_next[i] += wc.eps_t;
    t_next = k::clamp(t_next, wc.eps_t, 1.0);
    Tensor u_next = k::div_broadcast(y.data, t_next);
    trace.t.push_back(t_next);
    trace.u.push_back(u_next);
    if (stage + 1 < spec.stages) {
      switch (spec.mode) {
        case WarmStartMode::kFixed:
          hat = hat0;
          break;
        case WarmStartMode::kNoResidual:
          hat = k::clamp(k::window_channel_max(u_next, wc.window, nullptr), wc.eps_t, 1.0);
          break;
        case WarmStartMode::kFull: {
          Tensor r = u_next;
          r.axpy(-1.0, y.data);
          Tensor m = k::window_channel_max(u_next, wc.window, nullptr);
          m.axpy(-wc.gamma, k::channel_mean(r));
          hat = k::clamp(m, wc.eps_t, 1.0);
          break;
        }
      }
    }
  }
  return trace;
}

void nrm_forward(const Tensor& u_K, int stages, const CellFn& cell, EnhanceTrace* trace) {
  if (stages < 0) throw ConfigError("nrm_forward: N must be >= 0");
  const Tensor u_clip = k::clamp(u_K, 0.0, 1.0);
  Tensor x = u_clip;
  trace->x.push_back(x);
  for (int n = 0; n < stages; ++n) {
    Tensor next = u_clip;
    next.axpy(-1.0, cell(x));
    x = k::clamp(next, 0.0, 1.0);
    trace->x.push_back(x);
  }
  trace->output = x;
}

Genotype default_genotype_iem() {
  return Genotype{"IEM", 3,
                  {Primitive::kConv3, Primitive::kResConv3, Primitive::kDilConv3, Primitive::kConv3}};
}

Genotype default_genotype_nrm() {
  return Genotype{"NRM", 6,
                  {Primitive::kResConv3, Primitive::kSkip, Primitive::kConv1, Primitive::kResConv3}};
}

EnhanceTrace enhance(const Image& y, const RuasModel& model) {
  const CellFn iem_cell = [&](const Tensor& in) { return discrete_cell_forward(model.iem_cell, in); };
  EnhanceTrace trace = iem_forward(y, model.iem, iem_cell);
  const Tensor& u_K = trace.u.back();
  if (model.nrm_cell.has_value()) {
    const CellFn nrm_cell = [&](const Tensor& in) { return discrete_cell_forward(*model.nrm_cell, in); };
    nrm_forward(u_K, model.nrm_stages, nrm_cell, &trace);
  } else {
    nrm_forward(u_K, 0, nullptr, &trace);
  }
  return trace;
}

IemTapeResult iem_forward_tape(Tape& t, Tape::Id y, const IemSpec& spec, const TapeCellFn& cell) {
  if (spec.stages < 1) throw ConfigError("iem_forward_tape: K must be >= 1");
  const WarmStartConfig& wc = spec.warm;
  IemTapeResult res;
  Tape::Id hat = t.clamp(t.window_channel_max(y, wc.window), wc.eps_t, 1.0);
  res.hat_t0 = hat;
  for (int stage = 0; stage < spec.stages; ++stage) {
    res.hat_t.push_back(hat);
    const Tape::Id cell_in = (spec.cell_on_refined && stage > 0) ? res.t.back() : hat;
    const Tape::Id pre = t.sub(hat, cell(t, cell_in));
    const Tape::Id t_next = t.clamp(
        t.add_const(t.scale(t.scaled_sigmoid(pre, kSquashGain, kSquashCenter), 1.0 - wc.eps_t),
                    wc.eps_t),
        wc.eps_t, 1.0);
    const Tape::Id u_next = t.div_broadcast(y, t_next);
    res.t.push_back(t_next);
    res.u.push_back(u_next);
    if (stage + 1 < spec.stages) {
      switch (spec.mode) {
        case WarmStartMode::kFixed:
          hat = res.hat_t0;
          break;
        case WarmStartMode::kNoResidual:
          hat = t.clamp(t.window_channel_max(u_next, wc.window), wc.eps_t, 1.0);
          break;
        case WarmStartMode::kFull: {
          const Tape::Id r = t.sub(u_next, y);
          const Tape::Id m = t.window_channel_max(u_next, wc.window);
          hat = t.clamp(t.sub(m, t.scale(t.channel_mean(r), wc.gamma)), wc.eps_t, 1.0);
          break;
        }
      }
    }
  }
  res.t_K = res.t.back();
  res.u_K = res.u.back();
  return res;
}

NrmTapeResult nrm_forward_tape(Tape& t, Tape::Id u_K, int stages, const TapeCellFn& cell) {
  NrmTapeResult res;
  res.u_clip = t.clamp(u_K, 0.0, 1.0);
  Tape::Id x = res.u_clip;
  res.x.push_back(x);
  for (int n = 0; n < stages; ++n) {
    x = t.clamp(t.sub(res.u_clip, cell(t, x)), 0.0, 1.0);
    res.x.push_back(x);
  }
  res.x_N = x;
  return res;
}

}  // namespace ruas
