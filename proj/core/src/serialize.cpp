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

#include "ruas/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ruas/error.hpp"

namespace ruas {

namespace {

std::string hexd(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& tok, const char* where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw FormatError(std::string(where) + ": bad numeric token '" + tok + "'");
  return v;
}

int64_t parse_int(const std::string& tok, const char* where) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw FormatError(std::string(where) + ": bad integer token '" + tok + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << content;
  if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace

std::string genotype_to_text(const Genotype& g) {
  std::ostringstream os;
  os << "RUAS-GENOTYPE v1\n";
  os << "module " << g.module_tag << "\n";
  os << "width " << g.width << "\n";
  os << "edges";
  for (const Primitive p : g.ops) os << " " << primitive_name(p);
  os << "\n";
  return os.str();
}

Genotype genotype_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "RUAS-GENOTYPE v1")
    throw FormatError("genotype: bad header");
  Genotype g;
  bool have_module = false, have_width = false, have_edges = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_ws(line);
    if (tok[0] == "module" && tok.size() == 2) {
      if (tok[1] != "IEM" && tok[1] != "NRM") throw FormatError("genotype: unknown module tag " + tok[1]);
      g.module_tag = tok[1];
      have_module = true;
    } else if (tok[0] == "width" && tok.size() == 2) {
      g.width = static_cast<int>(parse_int(tok[1], "genotype width"));
      if (g.width < 1) throw FormatError("genotype: width must be positive");
      have_width = true;
    } else if (tok[0] == "edges" && tok.size() == 1 + kEdgeCount) {
      for (int e = 0; e < kEdgeCount; ++e) {
        const auto p = primitive_from_name(tok[static_cast<size_t>(e) + 1]);
        if (!p.has_value()) throw FormatError("genotype: unknown op '" + tok[static_cast<size_t>(e) + 1] + "'");
        g.ops[static_cast<size_t>(e)] = *p;
      }
      have_edges = true;
    } else {
      throw FormatError("genotype: unexpected line '" + line + "'");
    }
  }
  if (!have_module || !have_width || !have_edges) throw FormatError("genotype: missing fields");
  return g;
}

void write_genotype(const std::filesystem::path& path, const Genotype& g) {
  write_file(path, genotype_to_text(g));
}

Genotype read_genotype(const std::filesystem::path& path) {
  return genotype_from_text(read_file(path));
}

namespace {

void emit_tensor(std::ostringstream& os, const std::string& name, const Tensor& t) {
  os << "tensor " << name << " " << t.rank();
  for (int i = 0; i < t.rank(); ++i) os << " " << t.dim(i);
  os << "\n";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) os << " ";
    os << hexd(t[i]);
  }
  os << "\n";
}

struct TensorReader {
  std::istringstream is;
  explicit TensorReader(const std::string& text) : is(text) {}

  std::string line;

  bool next_line() { return static_cast<bool>(std::getline(is, line)); }

  Tensor read_named_tensor(const std::string& expected_name) {
    if (!next_line()) throw FormatError("checkpoint: truncated (expected tensor " + expected_name + ")");
    const std::vector<std::string> tok = split_ws(line);
    if (tok.size() < 3 || tok[0] != "tensor")
      throw FormatError("checkpoint: expected tensor header, got '" + line + "'");
    if (tok[1] != expected_name)
      throw FormatError("checkpoint: expected tensor " + expected_name + ", got " + tok[1]);
    const int rank = static_cast<int>(parse_int(tok[2], "tensor rank"));
    if (rank < 1 || rank > 4 || tok.size() != static_cast<size_t>(3 + rank))
      throw FormatError("checkpoint: bad tensor header '" + line + "'");
    std::vector<int> dims;
    for (int i = 0; i < rank; ++i) dims.push_back(static_cast<int>(parse_int(tok[static_cast<size_t>(3 + i)], "tensor dim")));
    Tensor t(dims);
    if (!next_line()) throw FormatError("checkpoint: missing values for " + expected_name);
    const std::vector<std::string> vals = split_ws(line);
    if (vals.size() != t.size()) throw FormatError("checkpoint: value count mismatch for " + expected_name);
    for (size_t i = 0; i < t.size(); ++i) t[i] = parse_double(vals[i], "tensor value");
    return t;
  }
};

std::string genotype_line(const Genotype& g) {
  std::ostringstream os;
  os << g.module_tag << " " << g.width;
  for (const Primitive p : g.ops) os << " " << primitive_name(p);
  return os.str();
}

Genotype parse_genotype_line(const std::vector<std::string>& tok, size_t offset) {
  Genotype g;
  g.module_tag = tok[offset];
  g.width = static_cast<int>(parse_int(tok[offset + 1], "genotype width"));
  for (int e = 0; e < kEdgeCount; ++e) {
    const auto p = primitive_from_name(tok[offset + 2 + static_cast<size_t>(e)]);
    if (!p.has_value()) throw FormatError("checkpoint: bad genotype op");
    g.ops[static_cast<size_t>(e)] = *p;
  }
  return g;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ostringstream os;
  os << "RUAS-CHECKPOINT v1\n";
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016" PRIx64, ck.fingerprint);
  os << "fingerprint " << fp << "\n";
  os << "epochs_completed " << ck.epochs_completed << "\n";
  os << "diverged " << (ck.diverged ? 1 : 0) << "\n";
  const TrainConfig& c = ck.config;
  os << "cfg_epochs " << c.epochs << "\n";
  os << "cfg_batch " << c.batch_size << "\n";
  os << "cfg_lr " << hexd(c.lr) << "\n";
  os << "cfg_momentum " << hexd(c.momentum) << "\n";
  os << "cfg_cosine " << (c.cosine_decay ? 1 : 0) << "\n";
  os << "cfg_clip " << hexd(c.clip_norm) << "\n";
  os << "cfg_eta_t " << hexd(c.loss_w.eta_t) << "\n";
  os << "cfg_eta_n " << hexd(c.loss_w.eta_n) << "\n";
  os << "cfg_beta " << hexd(c.loss_w.beta) << "\n";
  os << "cfg_rtv_window " << c.rtv.window << "\n";
  os << "cfg_rtv_sigma " << hexd(c.rtv.sigma_g) << "\n";
  os << "cfg_rtv_eps " << hexd(c.rtv.eps_s) << "\n";
  os << "cfg_stages_iem " << c.stages_iem << "\n";
  os << "cfg_stages_nrm " << c.stages_nrm << "\n";
  os << "cfg_gamma " << hexd(c.warm.gamma) << "\n";
  os << "cfg_window " << c.warm.window << "\n";
  os << "cfg_eps_t " << hexd(c.warm.eps_t) << "\n";
  os << "cfg_warm_mode " << warm_start_mode_name(c.warm_mode) << "\n";
  os << "cfg_cell_refined " << (c.cell_on_refined ? 1 : 0) << "\n";
  os << "cfg_checkpoint_interval " << c.checkpoint_interval << "\n";
  os << "cfg_seed " << c.seed << "\n";
  os << "genotype_t " << genotype_line(ck.model.iem_cell.genotype) << "\n";
  if (ck.model.nrm_cell.has_value()) {
    os << "genotype_n " << genotype_line(ck.model.nrm_cell->genotype) << "\n";
  } else {
    os << "genotype_n none\n";
  }

  Checkpoint& mut = const_cast<Checkpoint&>(ck);
  const std::vector<NamedParam> iem_refs = collect_params(mut.model.iem_cell, "iem");
  for (const NamedParam& p : iem_refs) emit_tensor(os, p.name, *p.tensor);
  std::vector<NamedParam> nrm_refs;
  if (mut.model.nrm_cell.has_value()) {
    nrm_refs = collect_params(*mut.model.nrm_cell, "nrm");
    for (const NamedParam& p : nrm_refs) emit_tensor(os, p.name, *p.tensor);
  }
  // A run that never stepped has no momentum state; persist zeros so the
  // container round-trips byte for byte.
  for (size_t i = 0; i < iem_refs.size(); ++i) {
    const Tensor& v = i < ck.velocity_t.size() ? ck.velocity_t[i] : Tensor(iem_refs[i].tensor->dims());
    emit_tensor(os, "vel_t." + std::to_string(i), v);
  }
  for (size_t i = 0; i < nrm_refs.size(); ++i) {
    const Tensor& v = i < ck.velocity_n.size() ? ck.velocity_n[i] : Tensor(nrm_refs[i].tensor->dims());
    emit_tensor(os, "vel_n." + std::to_string(i), v);
  }
  os << "end\n";
  write_file(path, os.str());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  TensorReader r(text);
  if (!r.next_line() || r.line != "RUAS-CHECKPOINT v1") throw FormatError("checkpoint: bad header");

  Checkpoint ck;
  Genotype g_t;
  std::optional<Genotype> g_n;
  // Fixed-order scalar fields.
  const auto expect_kv = [&](const char* key) -> std::vector<std::string> {
    if (!r.next_line()) throw FormatError(std::string("checkpoint: missing field ") + key);
    std::vector<std::string> tok = split_ws(r.line);
    if (tok.empty() || tok[0] != key)
      throw FormatError(std::string("checkpoint: expected ") + key + ", got '" + r.line + "'");
    return tok;
  };

  {
    const auto tok = expect_kv("fingerprint");
    ck.fingerprint = static_cast<uint64_t>(std::strtoull(tok[1].c_str(), nullptr, 16));
  }
  ck.epochs_completed = static_cast<int>(parse_int(expect_kv("epochs_completed")[1], "epochs_completed"));
  ck.diverged = parse_int(expect_kv("diverged")[1], "diverged") != 0;
  TrainConfig& c = ck.config;
  c.epochs = static_cast<int>(parse_int(expect_kv("cfg_epochs")[1], "cfg_epochs"));
  c.batch_size = static_cast<int>(parse_int(expect_kv("cfg_batch")[1], "cfg_batch"));
  c.lr = parse_double(expect_kv("cfg_lr")[1], "cfg_lr");
  c.momentum = parse_double(expect_kv("cfg_momentum")[1], "cfg_momentum");
  c.cosine_decay = parse_int(expect_kv("cfg_cosine")[1], "cfg_cosine") != 0;
  c.clip_norm = parse_double(expect_kv("cfg_clip")[1], "cfg_clip");
  c.loss_w.eta_t = parse_double(expect_kv("cfg_eta_t")[1], "cfg_eta_t");
  c.loss_w.eta_n = parse_double(expect_kv("cfg_eta_n")[1], "cfg_eta_n");
  c.loss_w.beta = parse_double(expect_kv("cfg_beta")[1], "cfg_beta");
  c.rtv.window = static_cast<int>(parse_int(expect_kv("cfg_rtv_window")[1], "cfg_rtv_window"));
  c.rtv.sigma_g = parse_double(expect_kv("cfg_rtv_sigma")[1], "cfg_rtv_sigma");
  c.rtv.eps_s = parse_double(expect_kv("cfg_rtv_eps")[1], "cfg_rtv_eps");
  c.stages_iem = static_cast<int>(parse_int(expect_kv("cfg_stages_iem")[1], "cfg_stages_iem"));
  c.stages_nrm = static_cast<int>(parse_int(expect_kv("cfg_stages_nrm")[1], "cfg_stages_nrm"));
  c.warm.gamma = parse_double(expect_kv("cfg_gamma")[1], "cfg_gamma");
  c.warm.window = static_cast<int>(parse_int(expect_kv("cfg_window")[1], "cfg_window"));
  c.warm.eps_t = parse_double(expect_kv("cfg_eps_t")[1], "cfg_eps_t");
  {
    const auto tok = expect_kv("cfg_warm_mode");
    const auto m = warm_start_mode_from_name(tok[1]);
    if (!m.has_value()) throw FormatError("checkpoint: bad warm mode");
    c.warm_mode = *m;
  }
  c.cell_on_refined = parse_int(expect_kv("cfg_cell_refined")[1], "cfg_cell_refined") != 0;
  c.checkpoint_interval =
      static_cast<int>(parse_int(expect_kv("cfg_checkpoint_interval")[1], "cfg_checkpoint_interval"));
  c.seed = static_cast<uint64_t>(parse_int(expect_kv("cfg_seed")[1], "cfg_seed"));

  {
    const auto tok = expect_kv("genotype_t");
    if (tok.size() != 3 + kEdgeCount) throw FormatError("checkpoint: bad genotype_t");
    g_t = parse_genotype_line(tok, 1);
  }
  {
    const auto tok = expect_kv("genotype_n");
    if (tok.size() == 2 && tok[1] == "none") {
      g_n.reset();
    } else if (tok.size() == 3 + kEdgeCount) {
      g_n = parse_genotype_line(tok, 1);
    } else {
      throw FormatError("checkpoint: bad genotype_n");
    }
  }

  // Rebuild the model skeleton, then overwrite every tensor in order.
  Rng rng(0);
  ck.model.iem_cell = init_discrete_cell(g_t, CellShape{1, g_t.width, 1}, rng);
  if (g_n.has_value()) ck.model.nrm_cell = init_discrete_cell(*g_n, CellShape{3, g_n->width, 3}, rng);
  ck.model.iem.stages = c.stages_iem;
  ck.model.iem.warm = c.warm;
  ck.model.iem.mode = c.warm_mode;
  ck.model.iem.cell_on_refined = c.cell_on_refined;
  ck.model.nrm_stages = c.stages_nrm;

  std::vector<NamedParam> iem_refs = collect_params(ck.model.iem_cell, "iem");
  for (NamedParam& p : iem_refs) *p.tensor = r.read_named_tensor(p.name);
  if (ck.model.nrm_cell.has_value()) {
    std::vector<NamedParam> nrm_refs = collect_params(*ck.model.nrm_cell, "nrm");
    for (NamedParam& p : nrm_refs) *p.tensor = r.read_named_tensor(p.name);
  }
  for (size_t i = 0; i < iem_refs.size(); ++i)
    ck.velocity_t.push_back(r.read_named_tensor("vel_t." + std::to_string(i)));
  if (ck.model.nrm_cell.has_value()) {
    std::vector<NamedParam> nrm_refs = collect_params(*ck.model.nrm_cell, "nrm");
    for (size_t i = 0; i < nrm_refs.size(); ++i)
      ck.velocity_n.push_back(r.read_named_tensor("vel_n." + std::to_string(i)));
  }
  if (!r.next_line() || r.line != "end") throw FormatError("checkpoint: missing end marker");
  return ck;
}

void write_history(const std::filesystem::path& path, const std::vector<StepRecord>& history) {
  std::ostringstream os;
  for (const StepRecord& rec : history) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"epoch\":%d,\"step\":%d,\"l_t_val\":%.17g,\"l_n_val\":%.17g,"
                  "\"cooperative\":%.17g,\"alpha_entropy_t\":[%.17g,%.17g,%.17g,%.17g],"
                  "\"alpha_entropy_n\":[%.17g,%.17g,%.17g,%.17g]}\n",
                  rec.epoch, rec.step, rec.l_t_val, rec.l_n_val, rec.cooperative,
                  rec.alpha_entropy_t[0], rec.alpha_entropy_t[1], rec.alpha_entropy_t[2],
                  rec.alpha_entropy_t[3], rec.alpha_entropy_n[0], rec.alpha_entropy_n[1],
                  rec.alpha_entropy_n[2], rec.alpha_entropy_n[3]);
    os << buf;
  }
  write_file(path, os.str());
}

std::string metric_report_to_json(const MetricReport& report) {
  std::ostringstream os;
  os << "{\n  \"per_image\": [\n";
  for (size_t i = 0; i < report.per_image.size(); ++i) {
    const auto& pi = report.per_image[i];
    char buf[256];
    std::snprintf(buf, sizeof(buf), "    {\"name\": \"%s\", \"psnr\": %.6f, \"ssim\": %.6f}%s\n",
                  pi.name.c_str(), pi.psnr, pi.ssim, i + 1 < report.per_image.size() ? "," : "");
    os << buf;
  }
  os << "  ],\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "  \"mean_psnr\": %.6f,\n  \"mean_ssim\": %.6f,\n  \"params\": %lld,\n"
                "  \"flops\": %lld,\n  \"flops_resolution\": \"%dx%d\",\n"
                "  \"seconds_per_image\": %.6f,\n",
                report.mean_psnr, report.mean_ssim, static_cast<long long>(report.params),
                static_cast<long long>(report.flops), report.flops_width, report.flops_height,
                report.seconds_per_image);
  os << buf;
  os << "  \"flop_convention\": \"" << report.flop_convention << "\"\n}\n";
  return os.str();
}

void write_metric_report(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << metric_report_to_json(report);
}

}  // namespace ruas
