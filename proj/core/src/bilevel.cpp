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

#include "ruas/bilevel.hpp"

#include <algorithm>
#include <cmath>

#include "param_util.hpp"
#include "ruas/error.hpp"

namespace ruas {

const char* search_mode_name(SearchMode m) {
  switch (m) {
    case SearchMode::kCooperative: return "cooperative";
    case SearchMode::kSeparate: return "separate";
    case SearchMode::kNaiveJoint: return "naive-joint";
  }
  return "cooperative";
}

std::optional<SearchMode> search_mode_from_name(const std::string& name) {
  if (name == "cooperative") return SearchMode::kCooperative;
  if (name == "separate") return SearchMode::kSeparate;
  if (name == "naive-joint") return SearchMode::kNaiveJoint;
  return std::nullopt;
}

SuperModel init_super_model(const SearchConfig& cfg) {
  SuperModel m;
  Rng rng(cfg.seed);
  m.iem_w = init_mixed_cell(CellShape{1, cfg.iem_width, 1}, rng);
  m.nrm_w = init_mixed_cell(CellShape{3, cfg.nrm_width, 3}, rng);
  m.alpha_t = zero_logits();
  m.alpha_n = zero_logits();
  m.iem.stages = cfg.stages_iem;
  m.iem.warm = cfg.warm;
  m.iem.mode = cfg.warm_mode;
  m.iem.cell_on_refined = cfg.cell_on_refined;
  m.nrm_stages = cfg.stages_nrm;
  m.loss_w = cfg.loss_w;
  m.rtv = cfg.rtv;
  return m;
}

EnhanceTrace super_enhance(const Image& y, const SuperModel& model, bool with_nrm) {
  const CellFn iem_cell = [&](const Tensor& in) {
    return mixed_cell_forward(model.iem_w, model.alpha_t, in);
  };
  EnhanceTrace trace = iem_forward(y, model.iem, iem_cell);
  if (with_nrm) {
    const CellFn nrm_cell = [&](const Tensor& in) {
      return mixed_cell_forward(model.nrm_w, model.alpha_n, in);
    };
    nrm_forward(trace.u.back(), model.nrm_stages, nrm_cell, &trace);
  } else {
    nrm_forward(trace.u.back(), 0, nullptr, &trace);
  }
  return trace;
}

std::vector<Tensor> virtual_step(const std::vector<Tensor>& omega, const std::vector<Tensor>& grad,
                                 double xi) {
  if (omega.size() != grad.size()) throw DimensionError("virtual_step: size mismatch");
  return vec_combine(omega, -xi, grad);
}

std::vector<Tensor> hypergradient(BilevelProblem& problem, const std::vector<Tensor>& omega,
                                  const std::vector<Tensor>& alpha, double xi, double eps_fd) {
  std::vector<Tensor> dalpha;
  if (xi == 0.0) {
    problem.val_loss(omega, alpha, nullptr, &dalpha);
    return dalpha;
  }
  std::vector<Tensor> g_tr;
  problem.train_loss(omega, alpha, &g_tr, nullptr);
  const std::vector<Tensor> omega_virtual = virtual_step(omega, g_tr, xi);

  std::vector<Tensor> val_omega_grad;
  problem.val_loss(omega_virtual, alpha, &val_omega_grad, &dalpha);

  const double vnorm = vec_norm(val_omega_grad);
  if (vnorm == 0.0) return dalpha;

  const double eps_hat = eps_fd / vnorm;
  const std::vector<Tensor> omega_plus = vec_combine(omega, eps_hat, val_omega_grad);
  const std::vector<Tensor> omega_minus = vec_combine(omega, -eps_hat, val_omega_grad);
  std::vector<Tensor> da_plus, da_minus;
  problem.train_loss(omega_plus, alpha, nullptr, &da_plus);
  problem.train_loss(omega_minus, alpha, nullptr, &da_minus);
  const double c = xi / (2.0 * eps_hat);
  for (size_t i = 0; i < dalpha.size(); ++i) {
    dalpha[i].axpy(-c, da_plus[i]);
    dalpha[i].axpy(+c, da_minus[i]);
  }
  return dalpha;
}

namespace {

// One illumination-loss evaluation on a tape; accumulates scaled gradients.
double eval_iem_image(const Image& y, const MixedCellParams& w, const Tensor& alpha,
                      const IemSpec& spec, const LossWeights& lw, const RtvConfig& rtv,
                      double factor, std::vector<Tensor>* domega, Tensor* dalpha) {
  Tape t;
  const Tape::Id y_id = t.leaf(y.data);
  const MixedCellIds ids = register_mixed_cell(t, w, alpha);
  const TapeCellFn cell = [&ids](Tape& tp, Tape::Id in) { return mixed_cell_forward(tp, ids, in); };
  const IemTapeResult iem = iem_forward_tape(t, y_id, spec, cell);
  const Tape::Id loss = t.scale(iem_loss_tape(t, iem.t_K, iem.hat_t0, lw, rtv), factor);
  const double lval = t.value(loss)[0];
  if (domega || dalpha) {
    t.backward(loss);
    if (domega) {
      const std::vector<Tape::Id> leaves = collect_leaf_ids(ids);
      for (size_t i = 0; i < leaves.size(); ++i) (*domega)[i].axpy(1.0, t.grad(leaves[i]));
    }
    if (dalpha) dalpha->axpy(1.0, t.grad(ids.alpha));
  }
  return lval;
}

// One denoising-loss evaluation on a tape, on a fixed brightened input u.
double eval_nrm_image(const Tensor& u, const MixedCellParams& w, const Tensor& alpha, int stages,
                      const LossWeights& lw, double factor, std::vector<Tensor>* domega,
                      Tensor* dalpha) {
  Tape t;
  const Tape::Id u_id = t.leaf(u);
  const MixedCellIds ids = register_mixed_cell(t, w, alpha);
  const TapeCellFn cell = [&ids](Tape& tp, Tape::Id in) { return mixed_cell_forward(tp, ids, in); };
  const NrmTapeResult nrm = nrm_forward_tape(t, u_id, stages, cell);
  const Tape::Id loss = t.scale(nrm_loss_tape(t, nrm.x_N, nrm.u_clip, lw), factor);
  const double lval = t.value(loss)[0];
  if (domega || dalpha) {
    t.backward(loss);
    if (domega) {
      const std::vector<Tape::Id> leaves = collect_leaf_ids(ids);
      for (size_t i = 0; i < leaves.size(); ++i) (*domega)[i].axpy(1.0, t.grad(leaves[i]));
    }
    if (dalpha) dalpha->axpy(1.0, t.grad(ids.alpha));
  }
  return lval;
}

double pixel_factor(const Image& img, size_t batch) {
  return 1.0 / (static_cast<double>(img.height()) * img.width() * static_cast<double>(batch));
}

/// Illumination-module objective on fixed train/val batches.
class IemProblem final : public BilevelProblem {
 public:
  IemProblem(const SuperModel& model, std::vector<const Image*> tr, std::vector<const Image*> val)
      : scratch_(model.iem_w),
        spec_(model.iem),
        lw_(model.loss_w),
        rtv_(model.rtv),
        tr_(std::move(tr)),
        val_(std::move(val)),
        refs_(collect_params(scratch_, "iem")) {}

  double train_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                    std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(tr_, omega, alpha, domega, dalpha);
  }
  double val_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                  std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(val_, omega, alpha, domega, dalpha);
  }

 private:
  double eval(const std::vector<const Image*>& batch, const std::vector<Tensor>& omega,
              const std::vector<Tensor>& alpha, std::vector<Tensor>* domega,
              std::vector<Tensor>* dalpha) {
    load_params(refs_, omega);
    if (domega) *domega = vec_zeros_like(omega);
    Tensor da = zero_logits();
    double total = 0.0;
    for (const Image* img : batch) {
      total += eval_iem_image(*img, scratch_, alpha[0], spec_, lw_, rtv_,
                              pixel_factor(*img, batch.size()), domega, dalpha ? &da : nullptr);
    }
    if (dalpha) *dalpha = {std::move(da)};
    return total;
  }

  MixedCellParams scratch_;
  IemSpec spec_;
  LossWeights lw_;
  RtvConfig rtv_;
  std::vector<const Image*> tr_;
  std::vector<const Image*> val_;
  std::vector<NamedParam> refs_;
};

/// Denoising-module objective on fixed brightened inputs.
class NrmProblem final : public BilevelProblem {
 public:
  NrmProblem(const SuperModel& model, std::vector<Tensor> u_tr, std::vector<Tensor> u_val)
      : scratch_(model.nrm_w),
        stages_(model.nrm_stages),
        lw_(model.loss_w),
        u_tr_(std::move(u_tr)),
        u_val_(std::move(u_val)),
        refs_(collect_params(scratch_, "nrm")) {}

  double train_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                    std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(u_tr_, omega, alpha, domega, dalpha);
  }
  double val_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                  std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(u_val_, omega, alpha, domega, dalpha);
  }

 private:
  double eval(const std::vector<Tensor>& batch, const std::vector<Tensor>& omega,
              const std::vector<Tensor>& alpha, std::vector<Tensor>* domega,
              std::vector<Tensor>* dalpha) {
    load_params(refs_, omega);
    if (domega) *domega = vec_zeros_like(omega);
    Tensor da = zero_logits();
    double total = 0.0;
    for (const Tensor& u : batch) {
      const double factor = 1.0 / (static_cast<double>(u.dim(0)) * u.dim(1) * batch.size());
      total += eval_nrm_image(u, scratch_, alpha[0], stages_, lw_, factor, domega,
                              dalpha ? &da : nullptr);
    }
    if (dalpha) *dalpha = {std::move(da)};
    return total;
  }

  MixedCellParams scratch_;
  int stages_;
  LossWeights lw_;
  std::vector<Tensor> u_tr_;
  std::vector<Tensor> u_val_;
  std::vector<NamedParam> refs_;
};

/// Whole-pipeline objective over a single concatenated variable set; used by
/// the naive-joint ablation.
class JointProblem final : public BilevelProblem {
 public:
  JointProblem(const SuperModel& model, std::vector<const Image*> tr, std::vector<const Image*> val)
      : iem_scratch_(model.iem_w),
        nrm_scratch_(model.nrm_w),
        spec_(model.iem),
        stages_(model.nrm_stages),
        lw_(model.loss_w),
        rtv_(model.rtv),
        tr_(std::move(tr)),
        val_(std::move(val)),
        iem_refs_(collect_params(iem_scratch_, "iem")),
        nrm_refs_(collect_params(nrm_scratch_, "nrm")) {}

  size_t iem_param_count() const { return iem_refs_.size(); }

  double train_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                    std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(tr_, omega, alpha, domega, dalpha);
  }
  double val_loss(const std::vector<Tensor>& omega, const std::vector<Tensor>& alpha,
                  std::vector<Tensor>* domega, std::vector<Tensor>* dalpha) override {
    return eval(val_, omega, alpha, domega, dalpha);
  }

 private:
  double eval(const std::vector<const Image*>& batch, const std::vector<Tensor>& omega,
              const std::vector<Tensor>& alpha, std::vector<Tensor>* domega,
              std::vector<Tensor>* dalpha) {
    const size_t n_iem = iem_refs_.size();
    for (size_t i = 0; i < n_iem; ++i) *iem_refs_[i].tensor = omega[i];
    for (size_t i = 0; i < nrm_refs_.size(); ++i) *nrm_refs_[i].tensor = omega[n_iem + i];
    if (domega) *domega = vec_zeros_like(omega);
    Tensor da_t = zero_logits();
    Tensor da_n = zero_logits();
    double total = 0.0;
    for (const Image* img : batch) {
      const double factor = pixel_factor(*img, batch.size());
      Tape t;
      const Tape::Id y_id = t.leaf(img->data);
      const MixedCellIds iem_ids = register_mixed_cell(t, iem_scratch_, alpha[0]);
      const MixedCellIds nrm_ids = register_mixed_cell(t, nrm_scratch_, alpha[1]);
      const TapeCellFn iem_cell = [&iem_ids](Tape& tp, Tape::Id in) {
        return mixed_cell_forward(tp, iem_ids, in);
      };
      const TapeCellFn nrm_cell = [&nrm_ids](Tape& tp, Tape::Id in) {
        return mixed_cell_forward(tp, nrm_ids, in);
      };
      const IemTapeResult iem = iem_forward_tape(t, y_id, spec_, iem_cell);
      const NrmTapeResult nrm = nrm_forward_tape(t, iem.u_K, stages_, nrm_cell);
      const Tape::Id l_t = iem_loss_tape(t, iem.t_K, iem.hat_t0, lw_, rtv_);
      const Tape::Id l_n = nrm_loss_tape(t, nrm.x_N, nrm.u_clip, lw_);
      const Tape::Id loss = t.scale(t.add(l_t, t.scale(l_n, lw_.beta)), factor);
      total += t.value(loss)[0];
      if (domega || dalpha) {
        t.backward(loss);
        if (domega) {
          const std::vector<Tape::Id> iem_leaves = collect_leaf_ids(iem_ids);
          const std::vector<Tape::Id> nrm_leaves = collect_leaf_ids(nrm_ids);
          for (size_t i = 0; i < iem_leaves.size(); ++i) (*domega)[i].axpy(1.0, t.grad(iem_leaves[i]));
          for (size_t i = 0; i < nrm_leaves.size(); ++i)
            (*domega)[n_iem + i].axpy(1.0, t.grad(nrm_leaves[i]));
        }
        if (dalpha) {
          da_t.axpy(1.0, t.grad(iem_ids.alpha));
          da_n.axpy(1.0, t.grad(nrm_ids.alpha));
        }
      }
    }
    if (dalpha) *dalpha = {std::move(da_t), std::move(da_n)};
    return total;
  }

  MixedCellParams iem_scratch_;
  MixedCellParams nrm_scratch_;
  IemSpec spec_;
  int stages_;
  LossWeights lw_;
  RtvConfig rtv_;
  std::vector<const Image*> tr_;
  std::vector<const Image*> val_;
  std::vector<NamedParam> iem_refs_;
  std::vector<NamedParam> nrm_refs_;
};

}  // namespace

Tensor cooperative_coupling_grad(const SuperModel& model, const std::vector<const Image*>& val_batch) {
  Tensor dalpha_t = zero_logits();
  for (const Image* img : val_batch) {
    const double factor = pixel_factor(*img, val_batch.size());
    Tape t;
    const Tape::Id y_id = t.leaf(img->data);
    const MixedCellIds iem_ids = register_mixed_cell(t, model.iem_w, model.alpha_t);
    const MixedCellIds nrm_ids = register_mixed_cell(t, model.nrm_w, model.alpha_n);
    const TapeCellFn iem_cell = [&iem_ids](Tape& tp, Tape::Id in) {
      return mixed_cell_forward(tp, iem_ids, in);
    };
    const TapeCellFn nrm_cell = [&nrm_ids](Tape& tp, Tape::Id in) {
      return mixed_cell_forward(tp, nrm_ids, in);
    };
    const IemTapeResult iem = iem_forward_tape(t, y_id, model.iem, iem_cell);
    const NrmTapeResult nrm = nrm_forward_tape(t, iem.u_K, model.nrm_stages, nrm_cell);
    const Tape::Id loss = t.scale(nrm_loss_tape(t, nrm.x_N, nrm.u_clip, model.loss_w), factor);
    t.backward(loss);
    dalpha_t.axpy(1.0, t.grad(iem_ids.alpha));
  }
  dalpha_t.scale(model.loss_w.beta);
  return dalpha_t;
}

std::array<double, kEdgeCount> edge_entropies(const Tensor& logits) {
  const Tensor probs = relax(logits);
  std::array<double, kEdgeCount> ent{};
  for (int e = 0; e < kEdgeCount; ++e) {
    double h = 0.0;
    for (int j = 0; j < kPrimitiveCount; ++j) {
      const double p = probs[static_cast<size_t>(e) * kPrimitiveCount + j];
      if (p > 0.0) h -= p * std::log(p);
    }
    ent[static_cast<size_t>(e)] = h;
  }
  return ent;
}

SearchState::SearchState(const SearchConfig& cfg)
    : model(init_super_model(cfg)),
      opt_alpha_t(cfg.alpha_lr, cfg.alpha_beta1, cfg.alpha_beta2, cfg.alpha_weight_decay),
      opt_alpha_n(cfg.alpha_lr, cfg.alpha_beta1, cfg.alpha_beta2, cfg.alpha_weight_decay),
      opt_omega_t(cfg.omega_lr, cfg.omega_momentum),
      opt_omega_n(cfg.omega_lr, cfg.omega_momentum) {}

namespace {

double eager_iem_val_loss(const SuperModel& model, const std::vector<const Image*>& batch) {
  double total = 0.0;
  for (const Image* img : batch) {
    const EnhanceTrace trace = super_enhance(*img, model, false);
    total += iem_loss(trace.t.back(), trace.hat_t.front(), model.loss_w, model.rtv) *
             pixel_factor(*img, batch.size());
  }
  return total;
}

double eager_nrm_val_loss(const SuperModel& model, const std::vector<const Image*>& batch) {
  double total = 0.0;
  for (const Image* img : batch) {
    const EnhanceTrace trace = super_enhance(*img, model, true);
    total += nrm_loss(trace.x.back(), trace.x.front(), model.loss_w) * pixel_factor(*img, batch.size());
  }
  return total;
}

void require_finite(const std::vector<Tensor>& grads, const char* what, int epoch, int step) {
  if (!vec_all_finite(grads))
    throw NumericError(std::string("search: non-finite ") + what + " at epoch " +
                       std::to_string(epoch) + " step " + std::to_string(step));
}

}  // namespace

void search_epoch(SearchState& state, const std::vector<const Image*>& data_tr,
                  const std::vector<const Image*>& data_val, const SearchConfig& cfg,
                  PhaseSelect phases) {
  if (data_tr.empty() || data_val.empty()) throw ConfigError("search_epoch: empty data split");
  SuperModel& model = state.model;

  const double omega_lr = cosine_lr(cfg.omega_lr, state.epoch, cfg.epochs);
  state.opt_omega_t.set_lr(omega_lr);
  state.opt_omega_n.set_lr(omega_lr);
  const double xi = cfg.xi < 0.0 ? omega_lr : cfg.xi;

  const std::vector<NamedParam> iem_refs = collect_params(model.iem_w, "iem");
  const std::vector<NamedParam> nrm_refs = collect_params(model.nrm_w, "nrm");

  const size_t nb = (data_tr.size() + cfg.batch_size - 1) / static_cast<size_t>(cfg.batch_size);
  for (size_t b = 0; b < nb; ++b) {
    std::vector<const Image*> tr_batch, val_batch;
    for (int i = 0; i < cfg.batch_size; ++i) {
      tr_batch.push_back(data_tr[(b * cfg.batch_size + i) % data_tr.size()]);
      val_batch.push_back(data_val[(b * cfg.batch_size + i) % data_val.size()]);
    }
    const int step = static_cast<int>(state.history.size());

    if (cfg.mode == SearchMode::kNaiveJoint) {
      JointProblem prob(model, tr_batch, val_batch);
      std::vector<Tensor> omega = snapshot_params(iem_refs);
      {
        const std::vector<Tensor> nrm_omega = snapshot_params(nrm_refs);
        omega.insert(omega.end(), nrm_omega.begin(), nrm_omega.end());
      }
      const std::vector<Tensor> alpha = {model.alpha_t, model.alpha_n};
      std::vector<Tensor> h = hypergradient(prob, omega, alpha, xi, cfg.eps_fd);
      require_finite(h, "joint architecture gradient", state.epoch, step);
      state.opt_alpha_t.step({&model.alpha_t}, {&h[0]});
      state.opt_alpha_n.step({&model.alpha_n}, {&h[1]});

      std::vector<Tensor> g;
      prob.train_loss(omega, {model.alpha_t, model.alpha_n}, &g, nullptr);
      require_finite(g, "joint weight gradient", state.epoch, step);
      clip_to_norm(&g, cfg.omega_clip_norm);
      const size_t n_iem = iem_refs.size();
      std::vector<const Tensor*> g_iem, g_nrm;
      for (size_t i = 0; i < n_iem; ++i) g_iem.push_back(&g[i]);
      for (size_t i = n_iem; i < g.size(); ++i) g_nrm.push_back(&g[i]);
      state.opt_omega_t.step(param_ptrs(iem_refs), g_iem);
      state.opt_omega_n.step(param_ptrs(nrm_refs), g_nrm);
    } else {
      // Illumination phase: Alg. steps 5-6.
      if (phases != PhaseSelect::kNrmOnly) {
        for (int rep = 0; rep < cfg.t_t; ++rep) {
          IemProblem prob(model, tr_batch, val_batch);
          const std::vector<Tensor> omega = snapshot_params(iem_refs);
          std::vector<Tensor> h = hypergradient(prob, omega, {model.alpha_t}, xi, cfg.eps_fd);
          if (cfg.mode == SearchMode::kCooperative && model.loss_w.beta > 0.0 &&
              phases == PhaseSelect::kBoth) {
            h[0].axpy(1.0, cooperative_coupling_grad(model, val_batch));
          }
          require_finite(h, "illumination architecture gradient", state.epoch, step);
          state.opt_alpha_t.step({&model.alpha_t}, {&h[0]});

          std::vector<Tensor> g;
          prob.train_loss(omega, {model.alpha_t}, &g, nullptr);
          require_finite(g, "illumination weight gradient", state.epoch, step);
          clip_to_norm(&g, cfg.omega_clip_norm);
          state.opt_omega_t.step(param_ptrs(iem_refs), grad_ptrs(g));
        }
      }

      // Denoising phase: Alg. steps 10-11, on the refreshed illumination.
      if (phases != PhaseSelect::kIemOnly) {
        for (int rep = 0; rep < cfg.t_n; ++rep) {
          std::vector<Tensor> u_tr, u_val;
          for (const Image* img : tr_batch) u_tr.push_back(super_enhance(*img, model, false).u.back());
          for (const Image* img : val_batch) u_val.push_back(super_enhance(*img, model, false).u.back());
          NrmProblem prob(model, std::move(u_tr), std::move(u_val));
          const std::vector<Tensor> omega = snapshot_params(nrm_refs);
          std::vector<Tensor> h = hypergradient(prob, omega, {model.alpha_n}, xi, cfg.eps_fd);
          require_finite(h, "denoising architecture gradient", state.epoch, step);
          state.opt_alpha_n.step({&model.alpha_n}, {&h[0]});

          std::vector<Tensor> g;
          prob.train_loss(omega, {model.alpha_n}, &g, nullptr);
          require_finite(g, "denoising weight gradient", state.epoch, step);
          clip_to_norm(&g, cfg.omega_clip_norm);
          state.opt_omega_n.step(param_ptrs(nrm_refs), grad_ptrs(g));
        }
      }
    }

    StepRecord rec;
    rec.epoch = state.epoch;
    rec.step = step;
    rec.l_t_val = eager_iem_val_loss(model, val_batch);
    rec.l_n_val = eager_nrm_val_loss(model, val_batch);
    rec.cooperative = cooperative_val_loss(rec.l_t_val, rec.l_n_val, model.loss_w.beta);
    if (!std::isfinite(rec.cooperative))
      throw NumericError("search: non-finite validation loss at epoch " +
                         std::to_string(state.epoch) + " step " + std::to_string(step));
    rec.alpha_entropy_t = edge_entropies(model.alpha_t);
    rec.alpha_entropy_n = edge_entropies(model.alpha_n);
    state.history.push_back(rec);
  }
}

namespace {

// Deterministic 50/50 split: order by (name hash, name), first half trains.
void split_by_name_hash(const std::vector<std::string>& names, std::vector<size_t>* train_idx,
                        std::vector<size_t>* val_idx) {
  std::vector<std::pair<uint64_t, size_t>> keyed;
  keyed.reserve(names.size());
  for (size_t i = 0; i < names.size(); ++i) keyed.emplace_back(fnv1a(names[i]), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return names[a.second] < names[b.second];
  });
  const size_t half = (keyed.size() + 1) / 2;
  for (size_t i = 0; i < keyed.size(); ++i) {
    (i < half ? train_idx : val_idx)->push_back(keyed[i].second);
  }
}

std::vector<const Image*> ordered_ptrs(const std::vector<Image>& images,
                                       const std::vector<size_t>& idx,
                                       const std::vector<size_t>& order) {
  std::vector<const Image*> out;
  out.reserve(order.size());
  for (const size_t o : order) out.push_back(&images[idx[o]]);
  return out;
}

}  // namespace

SearchResult run_search(const SearchConfig& cfg, const std::vector<Image>& images,
                        const std::vector<std::string>& names) {
  if (images.empty()) throw ConfigError("run_search: empty dataset");
  if (images.size() != names.size()) throw ConfigError("run_search: names do not match images");
  if (cfg.epochs < 0) throw ConfigError("run_search: negative epoch count");

  std::vector<size_t> train_idx, val_idx;
  split_by_name_hash(names, &train_idx, &val_idx);
  if (val_idx.empty()) val_idx = train_idx;  // single-image corner case

  SearchState state(cfg);
  Rng order_rng = Rng(cfg.seed).fork(0xda7a);

  const auto run_phase = [&](PhaseSelect phases) {
    for (int e = 0; e < cfg.epochs; ++e) {
      state.epoch = e;
      Rng rng_e = order_rng.fork(static_cast<uint64_t>(e) + 1);
      const std::vector<const Image*> tr =
          ordered_ptrs(images, train_idx, rng_e.permutation(train_idx.size()));
      const std::vector<const Image*> val =
          ordered_ptrs(images, val_idx, rng_e.permutation(val_idx.size()));
      search_epoch(state, tr, val, cfg, phases);
    }
  };

  if (cfg.mode == SearchMode::kSeparate) {
    run_phase(PhaseSelect::kIemOnly);
    run_phase(PhaseSelect::kNrmOnly);
  } else {
    run_phase(PhaseSelect::kBoth);
  }

  SearchResult result;
  result.genotype_t = derive_genotype(state.model.alpha_t, "IEM", cfg.iem_width);
  result.genotype_n = derive_genotype(state.model.alpha_n, "NRM", cfg.nrm_width);
  result.history = std::move(state.history);
  result.model = std::move(state.model);
  return result;
}

}  // namespace ruas
