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

// The unrolled enhancement pipeline. The illumination module runs K stages
// of warm start + learned refinement; the noise removal module runs N stages
// of residual denoising on the brightened image. One cell is shared across
// all stages of a module.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ruas/autodiff.hpp"
#include "ruas/cell.hpp"
#include "ruas/image.hpp"
#include "ruas/retinex.hpp"

namespace ruas {

// The refinement update t_{k+1} = squash(that_k - cell(that_k)) maps the
// real line onto (eps_t, 1) through a steep logistic centered mid-range,
// rescaled affinely so the floor is approached smoothly: a hard clamp after
// a bare sigmoid leaves a zero-gradient region below the floor that the
// smoothness term can push the whole map into, after which training is dead.
inline constexpr double kSquashGain = 8.0;
inline constexpr double kSquashCenter = 0.5;

/// Warm-start strategies: freeze the stage-0 map, update without the
/// residual term, or apply the full residual-rectified update.
enum class WarmStartMode { kFixed, kNoResidual, kFull };

const char* warm_start_mode_name(WarmStartMode m);
std::optional<WarmStartMode> warm_start_mode_from_name(const std::string& name);

struct IemSpec {
  int stages = 3;  // K
  WarmStartConfig warm;
  WarmStartMode mode = WarmStartMode::kFull;
  /// Feed the cell the previous refined map t_k instead of the warm start
  /// \hat t_k for stages k >= 1 (stage 0 has only the warm start).
  bool cell_on_refined = false;
};

/// Everything the forward pass produced, stage by stage.
struct EnhanceTrace {
  std::vector<Tensor> hat_t;  ///< warm starts \hat t_0 .. \hat t_{K-1}
  std::vector<Tensor> t;      ///< refined maps t_1 .. t_K
  std::vector<Tensor> u;      ///< brightened images u_1 .. u_K (not clipped)
  std::vector<Tensor> x;      ///< denoising iterates x_0 .. x_N
  Tensor output;              ///< final image, in [0,1]

  /// Illumination entries k = 0..K: the stage-0 warm start followed by the
  /// refined maps.
  std::vector<Tensor> illumination_entries() const;
};

using CellFn = std::function<Tensor(const Tensor&)>;
using TapeCellFn = std::function<Tape::Id(Tape&, Tape::Id)>;

// Eager forwards.

/// Runs K illumination stages; returns the trace with t/u/hat_t filled.
EnhanceTrace iem_forward(const Image& y, const IemSpec& spec, const CellFn& cell);

/// Runs N denoising stages on u_K (clipped to [0,1] at entry); appends the
/// x iterates to the trace and sets the final output.
void nrm_forward(const Tensor& u_K, int stages, const CellFn& cell, EnhanceTrace* trace);

/// A trained or initialized discrete model, ready for inference.
struct RuasModel {
  DiscreteCellParams iem_cell;
  std::optional<DiscreteCellParams> nrm_cell;
  IemSpec iem;
  int nrm_stages = 3;  // N; used only when nrm_cell is present
};

/// Full pipeline on one image. Without a denoising cell the output is the
/// clipped brightened image.
EnhanceTrace enhance(const Image& y, const RuasModel& model);

/// Stock architectures used when no searched genotype is supplied.
Genotype default_genotype_iem();
Genotype default_genotype_nrm();

// Tape forwards (shared cell evaluated through the provided closure).

struct IemTapeResult {
  Tape::Id hat_t0 = -1;
  Tape::Id t_K = -1;
  Tape::Id u_K = -1;
  std::vector<Tape::Id> hat_t, t, u;
};

IemTapeResult iem_forward_tape(Tape& t, Tape::Id y, const IemSpec& spec, const TapeCellFn& cell);

struct NrmTapeResult {
  Tape::Id u_clip = -1;
  Tape::Id x_N = -1;
  std::vector<Tape::Id> x;
};

NrmTapeResult nrm_forward_tape(Tape& t, Tape::Id u_K, int stages, const TapeCellFn& cell);

}  // namespace ruas
