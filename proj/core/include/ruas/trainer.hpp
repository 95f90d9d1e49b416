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
#include <functional>
#include <optional>
#include <vector>

#include "ruas/cell.hpp"
#include "ruas/image.hpp"
#include "ruas/losses.hpp"
#include "ruas/pipeline.hpp"

namespace ruas {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 1;
  double lr = 3e-3;
  double momentum = 0.9;
  bool cosine_decay = true;
  /// Global gradient-norm ceiling per module step; <= 0 disables clipping.
  double clip_norm = 1.0;
  LossWeights loss_w;
  RtvConfig rtv;
  int stages_iem = 3;  // K
  int stages_nrm = 3;  // N
  WarmStartConfig warm;
  WarmStartMode warm_mode = WarmStartMode::kFull;
  bool cell_on_refined = false;
  /// Epochs between intermediate checkpoint callbacks; 0 disables them.
  int checkpoint_interval = 0;
  /// Halt after this many completed epochs while keeping the full-length
  /// schedule (for interrupt/resume); 0 runs to `epochs`.
  int stop_after = 0;
  uint64_t seed = 1;
};

/// Trained weights plus everything needed to resume bit-exactly.
struct Checkpoint {
  RuasModel model;
  std::vector<Tensor> velocity_t;  ///< momentum state, canonical IEM order
  std::vector<Tensor> velocity_n;  ///< momentum state, canonical NRM order
  int epochs_completed = 0;
  bool diverged = false;
  TrainConfig config;
  uint64_t fingerprint = 0;
};

/// Mean per-pixel training losses of one epoch.
struct TrainEpochRecord {
  int epoch = 0;
  double loss_iem = 0.0;
  double loss_nrm = 0.0;
};

/// Hash of the resolved training configuration and genotypes; stored in the
/// checkpoint so a run can be identified.
uint64_t train_fingerprint(const TrainConfig& cfg, const Genotype& g_t,
                           const std::optional<Genotype>& g_n);

/// Reference-free training of discrete cells on input images only. The
/// illumination cell follows its own loss; the denoising cell trains on the
/// (detached) brightened output. Training stops early and returns the last
/// finite state with `diverged` set if a loss turns non-finite. Passing a
/// resume checkpoint continues its trajectory exactly.
Checkpoint train(const Genotype& genotype_t, const std::optional<Genotype>& genotype_n,
                 const std::vector<Image>& inputs, const TrainConfig& cfg,
                 const Checkpoint* resume = nullptr,
                 std::vector<TrainEpochRecord>* history = nullptr);

}  // namespace ruas
