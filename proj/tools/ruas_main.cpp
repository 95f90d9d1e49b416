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

// Command-line front end: search / train / enhance / eval / synth.
// Exit codes: 0 success, 2 usage or input error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ruas/bilevel.hpp"
#include "ruas/error.hpp"
#include "ruas/image.hpp"
#include "ruas/metrics.hpp"
#include "ruas/pipeline.hpp"
#include "ruas/serialize.hpp"
#include "ruas/synth.hpp"
#include "ruas/trainer.hpp"
#include "ruas/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// All tunables with their defaults, in one place. Each subcommand exposes
// the subset it uses; a config file or manifest pre-loads values and
// explicit flags override them.
struct Options {
  std::string input_dir;
  std::string out_dir;
  bool synthetic = false;
  int synth_count = 64;
  int synth_size = 64;
  double synth_noise = 0.03;
  double illum_lo = 0.05;
  double illum_hi = 0.5;
  uint64_t seed = 1;

  int stages_iem = 3;  // K
  int stages_nrm = 3;  // N
  double gamma = 0.5;
  int window = 3;
  double eps_t = 1e-3;
  int iem_width = 3;
  int nrm_width = 6;
  std::string warm_mode = "full";
  std::string cell_input = "warm";

  double eta_t = 0.01;
  double eta_n = 0.05;
  double beta = 1.0;
  int rtv_window = 3;
  double rtv_sigma = 1.0;
  double rtv_eps = 1e-3;

  int search_epochs = 20;
  int batch = 1;
  double alpha_lr = 3e-4;
  double alpha_wd = 1e-3;
  double omega_lr = 3e-4;
  double omega_momentum = 0.9;
  double xi = -1.0;
  double eps_fd = 0.01;
  int t_t = 1;
  int t_n = 1;
  std::string mode = "cooperative";

  int train_epochs = 50;
  double lr = 3e-3;
  double momentum = 0.9;
  double clip_norm = 1.0;
  int checkpoint_interval = 0;
  int stop_after = 0;
  std::string genotype_t_path;
  std::string genotype_n_path;
  bool no_nrm = false;
  std::string resume_path;

  std::string checkpoint_path;
  bool dump_illumination = false;
  std::string enhanced_dir;
  std::string reference_dir;
  std::string resolution = "600x400";
};

// Keyed accessors shared by manifest writing and config loading.
json options_to_json(const Options& o) {
  return json{{"input_dir", o.input_dir},
              {"out_dir", o.out_dir},
              {"synthetic", o.synthetic},
              {"synth_count", o.synth_count},
              {"synth_size", o.synth_size},
              {"synth_noise", o.synth_noise},
              {"illum_lo", o.illum_lo},
              {"illum_hi", o.illum_hi},
              {"seed", o.seed},
              {"K", o.stages_iem},
              {"N", o.stages_nrm},
              {"gamma", o.gamma},
              {"window", o.window},
              {"eps_t", o.eps_t},
              {"iem_width", o.iem_width},
              {"nrm_width", o.nrm_width},
              {"warm_start_mode", o.warm_mode},
              {"cell_input", o.cell_input},
              {"eta_t", o.eta_t},
              {"eta_n", o.eta_n},
              {"beta", o.beta},
              {"rtv_window", o.rtv_window},
              {"rtv_sigma", o.rtv_sigma},
              {"rtv_eps", o.rtv_eps},
              {"search_epochs", o.search_epochs},
              {"batch", o.batch},
              {"alpha_lr", o.alpha_lr},
              {"alpha_wd", o.alpha_wd},
              {"omega_lr", o.omega_lr},
              {"omega_momentum", o.omega_momentum},
              {"xi", o.xi},
              {"eps_fd", o.eps_fd},
              {"t_t", o.t_t},
              {"t_n", o.t_n},
              {"mode", o.mode},
              {"train_epochs", o.train_epochs},
              {"lr", o.lr},
              {"momentum", o.momentum},
              {"clip_norm", o.clip_norm},
              {"checkpoint_interval", o.checkpoint_interval},
              {"stop_after", o.stop_after},
              {"genotype_t", o.genotype_t_path},
              {"genotype_n", o.genotype_n_path},
              {"no_nrm", o.no_nrm},
              {"resume", o.resume_path},
              {"checkpoint", o.checkpoint_path},
              {"dump_illumination", o.dump_illumination},
              {"enhanced_dir", o.enhanced_dir},
              {"reference_dir", o.reference_dir},
              {"resolution", o.resolution}};
}

void options_from_json(const json& j, Options* o) {
  const auto get = [&](const char* key, auto* dst) {
    if (j.contains(key)) *dst = j.at(key).get<std::decay_t<decltype(*dst)>>();
  };
  get("input_dir", &o->input_dir);
  get("out_dir", &o->out_dir);
  get("synthetic", &o->synthetic);
  get("synth_count", &o->synth_count);
  get("synth_size", &o->synth_size);
  get("synth_noise", &o->synth_noise);
  get("illum_lo", &o->illum_lo);
  get("illum_hi", &o->illum_hi);
  get("seed", &o->seed);
  get("K", &o->stages_iem);
  get("N", &o->stages_nrm);
  get("gamma", &o->gamma);
  get("window", &o->window);
  get("eps_t", &o->eps_t);
  get("iem_width", &o->iem_width);
  get("nrm_width", &o->nrm_width);
  get("warm_start_mode", &o->warm_mode);
  get("cell_input", &o->cell_input);
  get("eta_t", &o->eta_t);
  get("eta_n", &o->eta_n);
  get("beta", &o->beta);
  get("rtv_window", &o->rtv_window);
  get("rtv_sigma", &o->rtv_sigma);
  get("rtv_eps", &o->rtv_eps);
  get("search_epochs", &o->search_epochs);
  get("batch", &o->batch);
  get("alpha_lr", &o->alpha_lr);
  get("alpha_wd", &o->alpha_wd);
  get("omega_lr", &o->omega_lr);
  get("omega_momentum", &o->omega_momentum);
  get("xi", &o->xi);
  get("eps_fd", &o->eps_fd);
  get("t_t", &o->t_t);
  get("t_n", &o->t_n);
  get("mode", &o->mode);
  get("train_epochs", &o->train_epochs);
  get("lr", &o->lr);
  get("momentum", &o->momentum);
  get("clip_norm", &o->clip_norm);
  get("checkpoint_interval", &o->checkpoint_interval);
  get("stop_after", &o->stop_after);
  get("genotype_t", &o->genotype_t_path);
  get("genotype_n", &o->genotype_n_path);
  get("no_nrm", &o->no_nrm);
  get("resume", &o->resume_path);
  get("checkpoint", &o->checkpoint_path);
  get("dump_illumination", &o->dump_illumination);
  get("enhanced_dir", &o->enhanced_dir);
  get("reference_dir", &o->reference_dir);
  get("resolution", &o->resolution);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

void write_manifest(const fs::path& path, const std::string& command, const Options& o,
                    const json& inputs, const json& outputs) {
  json m;
  m["command"] = command;
  m["version"] = ruas::kVersion;
  m["timestamp"] = iso_timestamp();
  m["seed"] = o.seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["config"] = options_to_json(o);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ruas::FormatError("cannot write manifest " + path.string());
  out << m.dump(2) << "\n";
}

ruas::SearchConfig to_search_config(const Options& o) {
  ruas::SearchConfig cfg;
  cfg.epochs = o.search_epochs;
  cfg.batch_size = o.batch;
  cfg.alpha_lr = o.alpha_lr;
  cfg.alpha_weight_decay = o.alpha_wd;
  cfg.omega_lr = o.omega_lr;
  cfg.omega_momentum = o.omega_momentum;
  cfg.omega_clip_norm = o.clip_norm;
  cfg.xi = o.xi;
  cfg.eps_fd = o.eps_fd;
  cfg.t_t = o.t_t;
  cfg.t_n = o.t_n;
  const auto mode = ruas::search_mode_from_name(o.mode);
  if (!mode.has_value()) throw ruas::ConfigError("unknown search mode: " + o.mode);
  cfg.mode = *mode;
  cfg.stages_iem = o.stages_iem;
  cfg.stages_nrm = o.stages_nrm;
  cfg.iem_width = o.iem_width;
  cfg.nrm_width = o.nrm_width;
  cfg.warm.gamma = o.gamma;
  cfg.warm.window = o.window;
  cfg.warm.eps_t = o.eps_t;
  const auto wm = ruas::warm_start_mode_from_name(o.warm_mode);
  if (!wm.has_value()) throw ruas::ConfigError("unknown warm-start mode: " + o.warm_mode);
  cfg.warm_mode = *wm;
  if (o.cell_input != "warm" && o.cell_input != "refined")
    throw ruas::ConfigError("unknown cell input: " + o.cell_input);
  cfg.cell_on_refined = o.cell_input == "refined";
  cfg.loss_w.eta_t = o.eta_t;
  cfg.loss_w.eta_n = o.eta_n;
  cfg.loss_w.beta = o.beta;
  cfg.rtv.window = o.rtv_window;
  cfg.rtv.sigma_g = o.rtv_sigma;
  cfg.rtv.eps_s = o.rtv_eps;
  cfg.seed = o.seed;
  return cfg;
}

ruas::TrainConfig to_train_config(const Options& o) {
  ruas::TrainConfig cfg;
  cfg.epochs = o.train_epochs;
  cfg.batch_size = o.batch;
  cfg.lr = o.lr;
  cfg.momentum = o.momentum;
  cfg.clip_norm = o.clip_norm;
  cfg.loss_w.eta_t = o.eta_t;
  cfg.loss_w.eta_n = o.eta_n;
  cfg.loss_w.beta = o.beta;
  cfg.rtv.window = o.rtv_window;
  cfg.rtv.sigma_g = o.rtv_sigma;
  cfg.rtv.eps_s = o.rtv_eps;
  cfg.stages_iem = o.stages_iem;
  cfg.stages_nrm = o.stages_nrm;
  cfg.warm.gamma = o.gamma;
  cfg.warm.window = o.window;
  cfg.warm.eps_t = o.eps_t;
  const auto wm = ruas::warm_start_mode_from_name(o.warm_mode);
  if (!wm.has_value()) throw ruas::ConfigError("unknown warm-start mode: " + o.warm_mode);
  cfg.warm_mode = *wm;
  if (o.cell_input != "warm" && o.cell_input != "refined")
    throw ruas::ConfigError("unknown cell input: " + o.cell_input);
  cfg.cell_on_refined = o.cell_input == "refined";
  cfg.checkpoint_interval = o.checkpoint_interval;
  cfg.stop_after = o.stop_after;
  cfg.seed = o.seed;
  return cfg;
}

struct Dataset {
  std::vector<ruas::Image> images;
  std::vector<std::string> names;
};

Dataset load_dataset(const Options& o) {
  Dataset ds;
  if (o.synthetic) {
    ruas::SynthConfig sc;
    sc.count = o.synth_count;
    sc.size = o.synth_size;
    sc.noise_sigma = o.synth_noise;
    sc.illum_lo = o.illum_lo;
    sc.illum_hi = o.illum_hi;
    sc.seed = o.seed;
    for (auto& s : ruas::synth_lowlight(sc)) {
      ds.images.push_back(std::move(s.input));
      ds.names.push_back(s.name);
    }
    return ds;
  }
  if (o.input_dir.empty()) throw ruas::ConfigError("either --input or --synthetic is required");
  const auto files = ruas::list_image_files(o.input_dir);
  if (files.empty()) throw ruas::ConfigError("no .ppm images in " + o.input_dir);
  for (const fs::path& f : files) {
    ds.images.push_back(ruas::load_image(f));
    ds.names.push_back(f.stem().string());
  }
  return ds;
}

std::pair<int, int> parse_resolution(const std::string& s) {
  int w = 0, h = 0;
  if (std::sscanf(s.c_str(), "%dx%d", &w, &h) != 2 || w < 1 || h < 1)
    throw ruas::ConfigError("bad --resolution, expected WxH: " + s);
  return {w, h};
}

int run_search(const Options& o) {
  const ruas::SearchConfig cfg = to_search_config(o);
  const Dataset ds = load_dataset(o);
  fs::create_directories(o.out_dir);

  const ruas::SearchResult result = ruas::run_search(cfg, ds.images, ds.names);

  const fs::path out(o.out_dir);
  ruas::write_genotype(out / "genotype_iem.txt", result.genotype_t);
  ruas::write_genotype(out / "genotype_nrm.txt", result.genotype_n);
  ruas::write_history(out / "history.jsonl", result.history);
  write_manifest(out / "manifest.json", "search", o,
                 json{{"images", ds.images.size()},
                      {"source", o.synthetic ? "synthetic" : o.input_dir}},
                 json{{"genotype_t", (out / "genotype_iem.txt").string()},
                      {"genotype_n", (out / "genotype_nrm.txt").string()},
                      {"history", (out / "history.jsonl").string()}});
  if (!result.history.empty()) {
    const auto& last = result.history.back();
    std::printf("search done: %zu steps, final val losses t=%.6f n=%.6f coop=%.6f\n",
                result.history.size(), last.l_t_val, last.l_n_val, last.cooperative);
  }
  std::printf("genotype_t: %s\n", ruas::genotype_to_text(result.genotype_t).c_str());
  std::printf("genotype_n: %s\n", ruas::genotype_to_text(result.genotype_n).c_str());
  return 0;
}

int run_train(const Options& o) {
  const ruas::TrainConfig cfg = to_train_config(o);
  const Dataset ds = load_dataset(o);
  fs::create_directories(o.out_dir);

  ruas::Genotype g_t =
      o.genotype_t_path.empty() ? ruas::default_genotype_iem() : ruas::read_genotype(o.genotype_t_path);
  std::optional<ruas::Genotype> g_n;
  if (!o.no_nrm)
    g_n = o.genotype_n_path.empty() ? ruas::default_genotype_nrm() : ruas::read_genotype(o.genotype_n_path);

  std::optional<ruas::Checkpoint> resume;
  if (!o.resume_path.empty()) resume = ruas::read_checkpoint(o.resume_path);

  std::vector<ruas::TrainEpochRecord> history;
  const ruas::Checkpoint ck = ruas::train(g_t, g_n, ds.images, cfg,
                                          resume.has_value() ? &*resume : nullptr, &history);

  const fs::path out(o.out_dir);
  ruas::write_checkpoint(out / "checkpoint.ckpt", ck);
  {
    std::ofstream hist(out / "train_history.jsonl", std::ios::binary);
    for (const auto& rec : history) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "{\"epoch\":%d,\"loss_iem\":%.17g,\"loss_nrm\":%.17g}\n",
                    rec.epoch, rec.loss_iem, rec.loss_nrm);
      hist << buf;
    }
  }
  write_manifest(out / "manifest.json", "train", o,
                 json{{"images", ds.images.size()},
                      {"source", o.synthetic ? "synthetic" : o.input_dir}},
                 json{{"checkpoint", (out / "checkpoint.ckpt").string()}});
  if (ck.diverged) {
    std::fprintf(stderr, "training diverged; wrote last finite checkpoint (epoch %d)\n",
                 ck.epochs_completed);
    return 3;
  }
  std::printf("trained %d epochs; checkpoint at %s\n", ck.epochs_completed,
              (out / "checkpoint.ckpt").string().c_str());
  return 0;
}

int run_enhance(const Options& o) {
  if (o.checkpoint_path.empty()) throw ruas::ConfigError("--checkpoint is required");
  if (o.input_dir.empty()) throw ruas::ConfigError("--input is required");
  ruas::Checkpoint ck = ruas::read_checkpoint(o.checkpoint_path);
  ruas::RuasModel model = ck.model;
  if (o.no_nrm) model.nrm_cell.reset();
  const auto wm = ruas::warm_start_mode_from_name(o.warm_mode);
  if (!wm.has_value()) throw ruas::ConfigError("unknown warm-start mode: " + o.warm_mode);
  model.iem.mode = *wm;

  const auto files = ruas::list_image_files(o.input_dir);
  if (files.empty()) throw ruas::ConfigError("no .ppm images in " + o.input_dir);
  fs::create_directories(o.out_dir);
  const fs::path out(o.out_dir);

  size_t written = 0;
  for (const fs::path& f : files) {
    const ruas::Image y = ruas::load_image(f);
    if (y.height() < model.iem.warm.window || y.width() < model.iem.warm.window) {
      std::fprintf(stderr, "warning: %s smaller than the warm-start window, skipped\n",
                   f.filename().string().c_str());
      continue;
    }
    const ruas::EnhanceTrace trace = ruas::enhance(y, model);
    ruas::save_image(out / f.filename(), ruas::Image(trace.output));
    if (o.dump_illumination)
      ruas::save_gray(out / (f.stem().string() + "_illum.pgm"), trace.t.back());
    ++written;
  }
  write_manifest(out / "manifest.json", "enhance", o,
                 json{{"checkpoint", o.checkpoint_path}, {"input_dir", o.input_dir}},
                 json{{"images_written", written}});
  std::printf("enhanced %zu image(s) into %s\n", written, o.out_dir.c_str());
  return 0;
}

int run_eval(const Options& o) {
  if (o.enhanced_dir.empty() || o.reference_dir.empty())
    throw ruas::ConfigError("--enhanced and --reference are required");
  const auto enh_files = ruas::list_image_files(o.enhanced_dir);
  const auto ref_files = ruas::list_image_files(o.reference_dir);
  std::map<std::string, fs::path> refs;
  for (const fs::path& f : ref_files) refs[f.stem().string()] = f;

  std::vector<std::string> names;
  std::vector<ruas::Image> outputs, references;
  std::vector<std::string> unmatched;
  for (const fs::path& f : enh_files) {
    const std::string stem = f.stem().string();
    const auto it = refs.find(stem);
    if (it == refs.end()) {
      unmatched.push_back(stem);
      continue;
    }
    names.push_back(stem);
    outputs.push_back(ruas::load_image(f));
    references.push_back(ruas::load_image(it->second));
  }
  for (const std::string& u : unmatched)
    std::fprintf(stderr, "warning: no reference for '%s'; excluded\n", u.c_str());
  if (names.empty()) {
    std::fprintf(stderr, "error: no matched enhanced/reference pairs\n");
    return 2;
  }

  ruas::MetricReport report = ruas::evaluate_pairs(names, outputs, references);

  if (!o.checkpoint_path.empty()) {
    const ruas::Checkpoint ck = ruas::read_checkpoint(o.checkpoint_path);
    const auto [rw, rh] = parse_resolution(o.resolution);
    report.params = ruas::count_params(ck.model);
    report.flops = ruas::count_flops(ck.model, rh, rw);
    report.flops_height = rh;
    report.flops_width = rw;
    // Wall time per image, measured on the first reference-sized input.
    const int reps = 3;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) (void)ruas::enhance(references.front(), ck.model);
    const auto t1 = std::chrono::steady_clock::now();
    report.seconds_per_image = std::chrono::duration<double>(t1 - t0).count() / reps;
  }

  fs::create_directories(o.out_dir);
  const fs::path out(o.out_dir);
  ruas::write_metric_report(out / "report.json", report);
  write_manifest(out / "manifest.json", "eval", o,
                 json{{"enhanced_dir", o.enhanced_dir}, {"reference_dir", o.reference_dir}},
                 json{{"report", (out / "report.json").string()}, {"pairs", names.size()}});

  std::printf("pairs evaluated: %zu\n", names.size());
  std::printf("mean PSNR: %.3f dB\nmean SSIM: %.4f\n", report.mean_psnr, report.mean_ssim);
  if (report.params > 0) {
    std::printf("params: %lld\nFLOPs at %s: %.4f G (%s)\n", static_cast<long long>(report.params),
                o.resolution.c_str(), static_cast<double>(report.flops) * 1e-9,
                report.flop_convention.c_str());
    std::printf("seconds per image: %.4f\n", report.seconds_per_image);
  }
  return 0;
}

int run_synth(const Options& o) {
  ruas::SynthConfig sc;
  sc.count = o.synth_count;
  sc.size = o.synth_size;
  sc.noise_sigma = o.synth_noise;
  sc.illum_lo = o.illum_lo;
  sc.illum_hi = o.illum_hi;
  sc.seed = o.seed;
  const auto samples = ruas::synth_lowlight(sc);

  const fs::path out(o.out_dir);
  fs::create_directories(out / "input");
  fs::create_directories(out / "reference");
  fs::create_directories(out / "illumination");
  for (const auto& s : samples) {
    ruas::save_image(out / "input" / (s.name + ".ppm"), s.input);
    ruas::save_image(out / "reference" / (s.name + ".ppm"), s.reference);
    ruas::save_gray(out / "illumination" / (s.name + ".pgm"), s.illumination);
  }
  write_manifest(out / "manifest.json", "synth", o, json{{"generated", samples.size()}},
                 json{{"input", (out / "input").string()},
                      {"reference", (out / "reference").string()},
                      {"illumination", (out / "illumination").string()}});
  std::printf("wrote %zu synthetic triples under %s\n", samples.size(), o.out_dir.c_str());
  return 0;
}

// Pre-scan for --config / --from-manifest so file values load before flags.
void preload_config(int argc, char** argv, Options* o) {
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw ruas::ConfigError(std::string("cannot open config ") + argv[i + 1]);
      json j;
      in >> j;
      options_from_json(j, o);
    } else if (a == "--from-manifest") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw ruas::ConfigError(std::string("cannot open manifest ") + argv[i + 1]);
      json j;
      in >> j;
      if (!j.contains("config")) throw ruas::FormatError("manifest has no config object");
      options_from_json(j.at("config"), o);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  try {
    preload_config(argc, argv, &o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  CLI::App app{"Retinex-inspired unrolled low-light enhancement with cooperative architecture search"};
  app.set_version_flag("--version", ruas::kVersion);
  app.require_subcommand(1);
  std::string config_dummy, manifest_dummy;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_dummy, "JSON config file (flags override it)");
    cmd->add_option("--from-manifest", manifest_dummy, "reuse the resolved config of a manifest");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out_dir, "output directory")->required();
  };
  const auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--input", o.input_dir, "directory of .ppm images");
    cmd->add_flag("--synthetic", o.synthetic, "use the built-in synthetic generator");
    cmd->add_option("--synth-count", o.synth_count, "synthetic image count");
    cmd->add_option("--synth-size", o.synth_size, "synthetic image side");
    cmd->add_option("--synth-noise", o.synth_noise, "synthetic noise sigma");
    cmd->add_option("--illum-lo", o.illum_lo, "synthetic illumination lower bound");
    cmd->add_option("--illum-hi", o.illum_hi, "synthetic illumination upper bound");
  };
  const auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--K", o.stages_iem, "illumination stages");
    cmd->add_option("--N", o.stages_nrm, "denoising stages");
    cmd->add_option("--gamma", o.gamma, "residual rectification strength");
    cmd->add_option("--window", o.window, "warm-start window side");
    cmd->add_option("--eps-t", o.eps_t, "illumination floor");
    cmd->add_option("--warm-start-mode", o.warm_mode, "fixed | no-residual | full");
    cmd->add_option("--cell-input", o.cell_input, "warm | refined (cell argument per stage)");
    cmd->add_option("--eta-t", o.eta_t, "relative-TV weight");
    cmd->add_option("--eta-n", o.eta_n, "TV weight");
    cmd->add_option("--beta", o.beta, "cooperation trade-off");
  };

  CLI::App* search = app.add_subcommand("search", "cooperative architecture search");
  add_common(search);
  add_data(search);
  add_model(search);
  search->add_option("--epochs", o.search_epochs, "search epochs");
  search->add_option("--batch", o.batch, "batch size");
  search->add_option("--mode", o.mode, "cooperative | separate | naive-joint");
  search->add_option("--alpha-lr", o.alpha_lr, "architecture learning rate");
  search->add_option("--alpha-wd", o.alpha_wd, "architecture weight decay");
  search->add_option("--omega-lr", o.omega_lr, "weight learning rate");
  search->add_option("--omega-momentum", o.omega_momentum, "weight momentum");
  search->add_option("--clip-norm", o.clip_norm, "weight gradient-norm ceiling (<=0 disables)");
  search->add_option("--xi", o.xi, "virtual-step size (negative tracks the weight rate)");
  search->add_option("--eps-fd", o.eps_fd, "finite-difference probe scale");
  search->add_option("--iem-width", o.iem_width, "illumination cell width");
  search->add_option("--nrm-width", o.nrm_width, "denoising cell width");

  CLI::App* train = app.add_subcommand("train", "train a derived architecture");
  add_common(train);
  add_data(train);
  add_model(train);
  train->add_option("--epochs", o.train_epochs, "training epochs");
  train->add_option("--batch", o.batch, "batch size");
  train->add_option("--lr", o.lr, "learning rate");
  train->add_option("--momentum", o.momentum, "momentum");
  train->add_option("--clip-norm", o.clip_norm, "gradient-norm ceiling (<=0 disables)");
  train->add_option("--genotype-t", o.genotype_t_path, "illumination genotype file");
  train->add_option("--genotype-n", o.genotype_n_path, "denoising genotype file");
  train->add_flag("--no-nrm", o.no_nrm, "train without the denoising module");
  train->add_option("--resume", o.resume_path, "checkpoint to resume from");
  train->add_option("--checkpoint-interval", o.checkpoint_interval, "epochs between checkpoints");
  train->add_option("--stop-after", o.stop_after, "halt after N epochs of the full schedule");

  CLI::App* enhance = app.add_subcommand("enhance", "enhance a directory of images");
  add_common(enhance);
  enhance->add_option("--checkpoint", o.checkpoint_path, "trained checkpoint")->required();
  enhance->add_option("--input", o.input_dir, "directory of .ppm images")->required();
  enhance->add_flag("--dump-illumination", o.dump_illumination, "also write t_K as PGM");
  enhance->add_option("--warm-start-mode", o.warm_mode, "fixed | no-residual | full");
  enhance->add_flag("--no-nrm", o.no_nrm, "skip the denoising module");

  CLI::App* eval = app.add_subcommand("eval", "PSNR/SSIM report for enhanced/reference pairs");
  add_common(eval);
  eval->add_option("--enhanced", o.enhanced_dir, "directory of enhanced images")->required();
  eval->add_option("--reference", o.reference_dir, "directory of reference images")->required();
  eval->add_option("--checkpoint", o.checkpoint_path, "checkpoint for complexity stats");
  eval->add_option("--resolution", o.resolution, "resolution WxH for the FLOP count");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic low-light dataset");
  add_common(synth);
  synth->add_option("--count", o.synth_count, "image count");
  synth->add_option("--size", o.synth_size, "image side");
  synth->add_option("--noise", o.synth_noise, "noise sigma");
  synth->add_option("--illum-lo", o.illum_lo, "illumination lower bound");
  synth->add_option("--illum-hi", o.illum_hi, "illumination upper bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(search)) return run_search(o);
    if (app.got_subcommand(train)) return run_train(o);
    if (app.got_subcommand(enhance)) return run_enhance(o);
    if (app.got_subcommand(eval)) return run_eval(o);
    if (app.got_subcommand(synth)) return run_synth(o);
  } catch (const ruas::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
