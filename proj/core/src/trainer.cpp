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

#include "ruas/trainer.hpp"

#include <cmath>
#include <sstream>

#include "param_util.hpp"
#include "ruas/error.hpp"
#include "ruas/optim.hpp"
#include "ruas/rng.hpp"

namespace ruas {

uint64_t train_fingerprint(const TrainConfig& cfg, const Genotype& g_t,
                           const std::optional<Genotype>& g_n) {
  std::ostringstream os;
  os.precision(17);
  os << "epochs=" << cfg.epochs << ";batch=" << cfg.batch_size << ";lr=" << cfg.lr
     << ";momentum=" << cfg.momentum << ";cosine=" << cfg.cosine_decay << ";clip=" << cfg.clip_norm
     << ";eta_t=" << cfg.loss_w.eta_t
     << ";eta_n=" << cfg.loss_w.eta_n << ";beta=" << cfg.loss_w.beta << ";rtv_window=" << cfg.rtv.window
     << ";rtv_sigma=" << cfg.rtv.sigma_g << ";rtv_eps=" << cfg.rtv.eps_s << ";K=" << cfg.stages_iem
     << ";N=" << cfg.stages_nrm << ";gamma=" << cfg.warm.gamma << ";window=" << cfg.warm.window
     << ";eps_t=" << cfg.warm.eps_t << ";warm_mode=" << warm_start_mode_name(cfg.warm_mode)
     << ";cell_refined=" << cfg.cell_on_refined << ";seed=" << cfg.seed << ";gt=" << g_t.module_tag << g_t.width;
  for (const Primitive p : g_t.ops) os << "," << primitive_name(p);
  if (g_n.has_value()) {
    os << ";gn=" << g_n->module_tag << g_n->width;
    for (const Primitive p : g_n->ops) os << "," << primitive_name(p);
  } else {
    os << ";gn=none";
  }
  return fnv1a(os.str());
}

namespace {

struct StepLosses {
  double iem = 0.0;
  double nrm = 0.0;
};

// One batch of gradient accumulation over both modules. The denoising cell
// sees the brightened image as a fixed input (Eq.-style modular training).
StepLosses batch_grads(RuasModel& model, const std::vector<const Image*>& batch,
                       const TrainConfig& cfg, const std::vector<NamedParam>& iem_refs,
                       const std::vector<NamedParam>& nrm_refs, std::vector<Tensor>* g_t,
                       std::vector<Tensor>* g_n) {
  StepLosses losses;
  for (const Image* img : batch) {
    const double factor =
        1.0 / (static_cast<double>(img->height()) * img->width() * static_cast<double>(batch.size()));

    Tensor u_value;
    {
      Tape t;
      const Tape::Id y_id = t.leaf(img->data);
      const DiscreteCellIds ids = register_discrete_cell(t, model.iem_cell);
      const TapeCellFn cell = [&ids](Tape& tp, Tape::Id in) { return discrete_cell_forward(tp, ids, in); };
      const IemTapeResult iem = iem_forward_tape(t, y_id, model.iem, cell);
      const Tape::Id loss = t.scale(iem_loss_tape(t, iem.t_K, iem.hat_t0, cfg.loss_w, cfg.rtv), factor);
      losses.iem += t.value(loss)[0];
      u_value = t.value(iem.u_K);
      t.backward(loss);
      const std::vector<Tape::Id> leaves = collect_leaf_ids(ids);
      for (size_t i = 0; i < leaves.size(); ++i) (*g_t)[i].axpy(1.0, t.grad(leaves[i]));
    }

    if (model.nrm_cell.has_value()) {
      Tape t;
      const Tape::Id u_id = t.leaf(u_value);
      const DiscreteCellIds ids = register_discrete_cell(t, *model.nrm_cell);
      const TapeCellFn cell = [&ids](Tape& tp, Tape::Id in) { return discrete_cell_forward(tp, ids, in); };
      const NrmTapeResult nrm = nrm_forward_tape(t, u_id, model.nrm_stages, cell);
      const Tape::Id loss = t.scale(nrm_loss_tape(t, nrm.x_N, nrm.u_clip, cfg.loss_w), factor);
      losses.nrm += t.value(loss)[0];
      t.backward(loss);
      const std::vector<Tape::Id> leaves = collect_leaf_ids(ids);
      for (size_t i = 0; i < leaves.size(); ++i) (*g_n)[i].axpy(1.0, t.grad(leaves[i]));
    }
  }
  (void)iem_refs;
  (void)nrm_refs;
  return losses;
}

}  // namespace

Checkpoint train(const Genotype& genotype_t, const std::optional<Genotype>& genotype_n,
                 const std::vector<Image>& inputs, const TrainConfig& cfg, const Checkpoint* resume,
                 std::vector<TrainEpochRecord>* history) {
  if (inputs.empty()) throw ConfigError("train: empty dataset");
  if (cfg.epochs < 0) throw ConfigError("train: negative epoch count");

  Checkpoint ck;
  ck.config = cfg;
  ck.fingerprint = train_fingerprint(cfg, genotype_t, genotype_n);

  if (resume != nullptr) {
    ck.model = resume->model;
    ck.velocity_t = resume->velocity_t;
    ck.velocity_n = resume->velocity_n;
    ck.epochs_completed = resume->epochs_completed;
  } else {
    Rng rng(cfg.seed);
    ck.model.iem_cell = init_discrete_cell(genotype_t, CellShape{1, genotype_t.width, 1}, rng);
    if (genotype_n.has_value())
      ck.model.nrm_cell = init_discrete_cell(*genotype_n, CellShape{3, genotype_n->width, 3}, rng);
    ck.model.iem.stages = cfg.stages_iem;
    ck.model.iem.warm = cfg.warm;
    ck.model.iem.mode = cfg.warm_mode;
    ck.model.iem.cell_on_refined = cfg.cell_on_refined;
    ck.model.nrm_stages = cfg.stages_nrm;
  }

  const std::vector<NamedParam> iem_refs = collect_params(ck.model.iem_cell, "iem");
  std::vector<NamedParam> nrm_refs;
  if (ck.model.nrm_cell.has_value()) nrm_refs = collect_params(*ck.model.nrm_cell, "nrm");

  SgdMomentum opt_t(cfg.lr, cfg.momentum);
  SgdMomentum opt_n(cfg.lr, cfg.momentum);
  if (!ck.velocity_t.empty()) opt_t.velocity() = ck.velocity_t;
  if (!ck.velocity_n.empty()) opt_n.velocity() = ck.velocity_n;

  Rng order_rng = Rng(cfg.seed).fork(0x0d0e);
  Checkpoint last_good = ck;

  for (int epoch = ck.epochs_completed; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.cosine_decay ? cosine_lr(cfg.lr, epoch, cfg.epochs) : cfg.lr;
    opt_t.set_lr(lr);
    opt_n.set_lr(lr);

    Rng rng_e = order_rng.fork(static_cast<uint64_t>(epoch) + 1);
    const std::vector<size_t> order = rng_e.permutation(inputs.size());

    TrainEpochRecord rec;
    rec.epoch = epoch;
    const size_t nb = (inputs.size() + cfg.batch_size - 1) / static_cast<size_t>(cfg.batch_size);
    bool finite = true;
    for (size_t b = 0; b < nb && finite; ++b) {
      std::vector<const Image*> batch;
      for (int i = 0; i < cfg.batch_size; ++i)
        batch.push_back(&inputs[order[(b * cfg.batch_size + i) % order.size()]]);

      std::vector<Tensor> g_t = vec_zeros_like(snapshot_params(iem_refs));
      std::vector<Tensor> g_n;
      if (!nrm_refs.empty()) g_n = vec_zeros_like(snapshot_params(nrm_refs));

      const StepLosses losses = batch_grads(ck.model, batch, cfg, iem_refs, nrm_refs, &g_t, &g_n);
      rec.loss_iem += losses.iem;
      rec.loss_nrm += losses.nrm;
      if (!std::isfinite(losses.iem) || !std::isfinite(losses.nrm) || !vec_all_finite(g_t) ||
          (!g_n.empty() && !vec_all_finite(g_n))) {
        finite = false;
        break;
      }
      clip_to_norm(&g_t, cfg.clip_norm);
      opt_t.step(param_ptrs(iem_refs), grad_ptrs(g_t));
      if (!nrm_refs.empty()) {
        clip_to_norm(&g_n, cfg.clip_norm);
        opt_n.step(param_ptrs(nrm_refs), grad_ptrs(g_n));
      }
    }

    if (!finite) {
      last_good.diverged = true;
      return last_good;
    }

    rec.loss_iem /= static_cast<double>(nb);
    rec.loss_nrm /= static_cast<double>(nb);
    if (history) history->push_back(rec);

    ck.epochs_completed = epoch + 1;
    ck.velocity_t = opt_t.velocity();
    ck.velocity_n = opt_n.velocity();
    last_good = ck;
    if (cfg.stop_after > 0 && ck.epochs_completed >= cfg.stop_after) break;
  }
  return ck;
}

}  // namespace ruas
