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

// Cooperative bilevel architecture search. Architecture logits are updated
// on validation losses through a one-step hypergradient (virtual weight
// step + symmetric finite difference for the second-order term) while the
// weights follow their training losses. The illumination module is updated
// first, with an extra coupling gradient that propagates the denoising
// validation loss back through the brightened image; the denoising module
// is then updated on the output of the refreshed illumination module.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ruas/cell.hpp"
#include "ruas/image.hpp"
#include "ruas/losses.hpp"
#include "ruas/optim.hpp"
#include "ruas/pipeline.hpp"
#include "ruas/rng.hpp"

namespace ruas {

enum class SearchMode { kCooperative, kSeparate, kNaiveJoint };

const char* search_mode_name(SearchMode m);
std::optional<SearchMode> search_mode_from_name(const std::string& name);

struct SearchConfig {
  int epochs = 20;
  int batch_size = 1;
  double alpha_lr = 3e-4;
  double alpha_beta1 = 0.5;
  double alpha_beta2 = 0.999;
  double alpha_weight_decay = 1e-3;
  double omega_lr = 3e-4;
  double omega_momentum = 0.9;
  /// Global gradient-norm ceiling for weight steps; <= 0 disables clipping.
  double omega_clip_norm = 10.0;
  /// Virtual-step size; negative means "track the current omega rate".
  double xi = -1.0;
  /// Probe scale of the symmetric finite difference.
  double eps_fd = 0.01;
  /// Inner repetitions per batch for each module.
  int t_t = 1;
  int t_n = 1;
  SearchMode mode = SearchMode::kCooperative;
  int stages_iem = 3;  // K
  int stages_nrm = 3;  // N
  int iem_width = 3;
  int nrm_width = 6;
  WarmStartConfig warm;
  WarmStartMode warm_mode = WarmStartMode::kFull;
  bool cell_on_refined = false;
  LossWeights loss_w;  // eta_t, eta_n and the cooperation trade-off beta
  RtvConfig rtv;
  uint64_t seed = 1;
};

/// Both supernets plus their architecture logits.
struct SuperModel {
  MixedCellParams iem_w;
  Tensor alpha_t;
  MixedCellParams nrm_w;
  Tensor alpha_n;
  IemSpec iem;
  int nrm_stages = 3;
  LossWeights loss_w;
  RtvConfig rtv;
};

SuperModel init_super_model(const SearchConfig& cfg);

/// Eager supernet enhancement of one image; returns the full trace.
EnhanceTrace super_enhance(const Image& y, const SuperModel& model, bool with_nrm);

/// Generic two-level objective over tensor-valued weights and logits.
/// Implementations must treat the passed values as the evaluation point and
/// accumulate nothing across calls.
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;
  virtual double train_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                            std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) = 0;
  virtual double val_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                          std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) = 0;
};

/// omega' = omega - xi * grad (plain step, no momentum).
std::vector<Tensor> virtual_step(const std::vector<Tensor>& omega, const std::vector<Tensor>& grad,
                                 double xi);

/// One-step hypergradient of the validation loss with respect to the
/// architecture variables:
///   d_alpha L_val(alpha; omega')  -  xi * (d_alpha L_tr(w+) - d_alpha L_tr(w-)) / (2 e)
/// with omega' = omega - xi * d_omega L_tr, w+- = omega +- e * d_omega' L_val
/// and e = eps_fd / ||d_omega' L_val||. xi = 0 returns the plain first-order
/// gradient d_alpha L_val(alpha; omega); a zero validation weight gradient
/// skips the second-order term.
std::vector<Tensor> hypergradient(BilevelProblem& problem, const std::vector<Tensor>& omega,
                                  const std::vector<Tensor>& alpha, double xi, double eps_fd);

/// Per-step search telemetry.
struct StepRecord {
  int epoch = 0;
  int step = 0;
  double l_t_val = 0.0;
  double l_n_val = 0.0;
  double cooperative = 0.0;
  std::array<double, kEdgeCount> alpha_entropy_t{};
  std::array<double, kEdgeCount> alpha_entropy_n{};
};

struct SearchState {
  SuperModel model;
  Adam opt_alpha_t;
  Adam opt_alpha_n;
  SgdMomentum opt_omega_t;
  SgdMomentum opt_omega_n;
  int epoch = 0;
  std::vector<StepRecord> history;

  explicit SearchState(const SearchConfig& cfg);
};

/// Which module phases a search epoch runs; separate mode uses one at a time.
enum class PhaseSelect { kBoth, kIemOnly, kNrmOnly };

/// One pass over the batches. Throws NumericError (with the offending step)
/// if a loss turns non-finite.
void search_epoch(SearchState& state, const std::vector<const Image*>& data_tr,
                  const std::vector<const Image*>& data_val, const SearchConfig& cfg,
                  PhaseSelect phases = PhaseSelect::kBoth);

struct SearchResult {
  Genotype genotype_t;
  Genotype genotype_n;
  std::vector<StepRecord> history;
  SuperModel model;
};

/// Splits by file-name hash (50/50), runs the configured number of epochs
/// and derives both genotypes.
SearchResult run_search(const SearchConfig& cfg, const std::vector<Image>& images,
                        const std::vector<std::string>& names);

/// Coupling gradient: beta * d/d alpha_t of the denoising validation loss,
/// differentiated through the illumination module into the denoising module.
Tensor cooperative_coupling_grad(const SuperModel& model, const std::vector<const Image*>& val_batch);

/// Entropy of each relaxed edge distribution.
std::array<double, kEdgeCount> edge_entropies(const Tensor& logits);

}  // namespace ruas
