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

#include "ruas/metrics.hpp"

#include <cmath>

#include "ruas/error.hpp"

namespace ruas {

double psnr(const Image& a, const Image& b) {
  check_same_shape(a.data, b.data, "psnr");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::vector<double> ssim_kernel() {
  std::vector<double> k(kSsimWindow * kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * kSsimSigma * kSsimSigma));
      k[static_cast<size_t>(dy + r) * kSsimWindow + (dx + r)] = v;
      sum += v;
    }
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  check_same_shape(a.data, b.data, "ssim");
  const int h = a.height(), w = a.width();
  if (h < kSsimWindow || w < kSsimWindow)
    throw DimensionError("ssim: image smaller than the 11x11 window");
  static const std::vector<double> kernel = ssim_kernel();
  const int r = kSsimWindow / 2;
  const double c1 = kSsimK1 * kSsimK1;  // dynamic range 1
  const double c2 = kSsimK2 * kSsimK2;

  double total = 0.0;
  size_t windows = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y = r; y < h - r; ++y) {
      for (int x = r; x < w - r; ++x) {
        double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const double kv = kernel[static_cast<size_t>(dy + r) * kSsimWindow + (dx + r)];
            const double va = a.data.at(y + dy, x + dx, c);
            const double vb = b.data.at(y + dy, x + dx, c);
            mu_a += kv * va;
            mu_b += kv * vb;
            aa += kv * va * va;
            bb += kv * vb * vb;
            ab += kv * va * vb;
          }
        }
        const double var_a = aa - mu_a * mu_a;
        const double var_b = bb - mu_b * mu_b;
        const double cov = ab - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        total += num / den;
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

int64_t count_params(const RuasModel& model) {
  int64_t count = discrete_cell_param_count(model.iem_cell.genotype, model.iem_cell.shape);
  if (model.nrm_cell.has_value())
    count += discrete_cell_param_count(model.nrm_cell->genotype, model.nrm_cell->shape);
  return count;
}

int64_t count_params_enumerated(const RuasModel& model) {
  RuasModel& m = const_cast<RuasModel&>(model);
  int64_t count = 0;
  for (const NamedParam& p : collect_params(m.iem_cell, "iem")) count += static_cast<int64_t>(p.tensor->size());
  if (m.nrm_cell.has_value()) {
    for (const NamedParam& p : collect_params(*m.nrm_cell, "nrm")) count += static_cast<int64_t>(p.tensor->size());
  }
  return count;
}

namespace {

int64_t conv_flops(int kernel, int ci, int co, int64_t hw) {
  return 2LL * kernel * kernel * ci * co * hw;
}

int64_t discrete_cell_flops(const DiscreteCellParams& cell, int64_t hw) {
  const CellShape& s = cell.shape;
  int64_t f = conv_flops(3, s.in_ch, s.width, hw) + conv_flops(3, s.width, s.out_ch, hw);
  for (int e = 0; e < kEdgeCount; ++e) {
    const Primitive p = cell.genotype.ops[static_cast<size_t>(e)];
    if (primitive_has_conv(p)) f += conv_flops(primitive_kernel(p), s.width, s.width, hw);
  }
  return f;
}

}  // namespace

int64_t count_flops(const RuasModel& model, int height, int width) {
  const int64_t hw = static_cast<int64_t>(height) * width;
  int64_t f = static_cast<int64_t>(model.iem.stages) * discrete_cell_flops(model.iem_cell, hw);
  f += static_cast<int64_t>(model.iem.stages) * model.iem.warm.window * hw;  // warm-start max filter
  if (model.nrm_cell.has_value())
    f += static_cast<int64_t>(model.nrm_stages) * discrete_cell_flops(*model.nrm_cell, hw);
  return f;
}

MetricReport evaluate_pairs(const std::vector<std::string>& names, const std::vector<Image>& outputs,
                            const std::vector<Image>& references) {
  if (names.size() != outputs.size() || names.size() != references.size())
    throw DimensionError("evaluate_pairs: mismatched list sizes");
  MetricReport report;
  for (size_t i = 0; i < names.size(); ++i) {
    MetricReport::PerImage pi;
    pi.name = names[i];
    pi.psnr = psnr(outputs[i], references[i]);
    pi.ssim = ssim(outputs[i], references[i]);
    report.mean_psnr += pi.psnr;
    report.mean_ssim += pi.ssim;
    report.per_image.push_back(std::move(pi));
  }
  if (!report.per_image.empty()) {
    report.mean_psnr /= static_cast<double>(report.per_image.size());
    report.mean_ssim /= static_cast<double>(report.per_image.size());
  }
  return report;
}

}  // namespace ruas
