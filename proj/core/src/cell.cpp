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

#include "ruas/cell.hpp"

#include <cmath>

#include "kernels.hpp"
#include "ruas/error.hpp"

namespace ruas {

namespace k = kernels;

namespace {

constexpr std::array<const char*, kPrimitiveCount> kPrimitiveNames = {
    "C1", "C3", "RC1", "RC3", "DC3_2", "RDC3_2", "SC"};

ConvParam init_conv(int kernel, int ci, int co, Rng& rng, double scale) {
  ConvParam p;
  p.w = Tensor({kernel, kernel, ci, co});
  p.b = Tensor({co});
  const double stddev = std::sqrt(2.0 / (kernel * kernel * ci));
  for (size_t i = 0; i < p.w.size(); ++i) p.w[i] = scale * rng.normal(0.0, stddev);
  return p;
}

}  // namespace

const char* primitive_name(Primitive p) { return kPrimitiveNames[static_cast<size_t>(p)]; }

std::optional<Primitive> primitive_from_name(const std::string& name) {
  for (int i = 0; i < kPrimitiveCount; ++i) {
    if (name == kPrimitiveNames[static_cast<size_t>(i)]) return static_cast<Primitive>(i);
  }
  return std::nullopt;
}

bool primitive_has_conv(Primitive p) { return p != Primitive::kSkip; }

bool primitive_is_residual(Primitive p) {
  return p == Primitive::kResConv1 || p == Primitive::kResConv3 || p == Primitive::kResDilConv3;
}

int primitive_kernel(Primitive p) {
  return (p == Primitive::kConv1 || p == Primitive::kResConv1) ? 1 : 3;
}

int primitive_dilation(Primitive p) {
  return (p == Primitive::kDilConv3 || p == Primitive::kResDilConv3) ? 2 : 1;
}

int primitive_param_count(Primitive p, int width) {
  if (!primitive_has_conv(p)) return 0;
  const int k = primitive_kernel(p);
  return k * k * width * width + width;
}

Tensor zero_logits() { return Tensor({kEdgeCount, kPrimitiveCount}); }

Tensor relax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(0) != kEdgeCount || logits.dim(1) != kPrimitiveCount)
    throw DimensionError("relax: logits must be {4,7}");
  if (!logits.all_finite()) throw PreconditionError("relax: non-finite logits");
  Tensor out = logits;
  for (int e = 0; e < kEdgeCount; ++e) {
    Tensor row({kPrimitiveCount});
    for (int j = 0; j < kPrimitiveCount; ++j) row[static_cast<size_t>(j)] = logits[static_cast<size_t>(e) * kPrimitiveCount + j];
    row = k::softmax_vec(row);
    for (int j = 0; j < kPrimitiveCount; ++j) out[static_cast<size_t>(e) * kPrimitiveCount + j] = row[static_cast<size_t>(j)];
  }
  return out;
}

Genotype derive_genotype(const Tensor& logits, const std::string& module_tag, int width) {
  const Tensor probs = relax(logits);
  Genotype g;
  g.module_tag = module_tag;
  g.width = width;
  for (int e = 0; e < kEdgeCount; ++e) {
    int best = 0;
    double best_p = probs[static_cast<size_t>(e) * kPrimitiveCount];
    for (int j = 1; j < kPrimitiveCount; ++j) {
      const double p = probs[static_cast<size_t>(e) * kPrimitiveCount + j];
      if (p > best_p) {
        best_p = p;
        best = j;
      }
    }
    g.ops[static_cast<size_t>(e)] = static_cast<Primitive>(best);
  }
  return g;
}

MixedCellParams init_mixed_cell(const CellShape& shape, Rng& rng) {
  MixedCellParams p;
  p.shape = shape;
  p.stem = init_conv(3, shape.in_ch, shape.width, rng, 1.0);
  for (int e = 0; e < kEdgeCount; ++e) {
    for (int j = 0; j < kPrimitiveCount; ++j) {
      const Primitive prim = static_cast<Primitive>(j);
      if (primitive_has_conv(prim))
        p.edge[static_cast<size_t>(e)][static_cast<size_t>(j)] =
            init_conv(primitive_kernel(prim), shape.width, shape.width, rng, 1.0);
    }
  }
  p.head = init_conv(3, shape.width, shape.out_ch, rng, kHeadInitScale);
  return p;
}

DiscreteCellParams init_discrete_cell(const Genotype& g, const CellShape& shape, Rng& rng) {
  DiscreteCellParams p;
  p.genotype = g;
  p.shape = shape;
  p.stem = init_conv(3, shape.in_ch, shape.width, rng, 1.0);
  for (int e = 0; e < kEdgeCount; ++e) {
    const Primitive prim = g.ops[static_cast<size_t>(e)];
    if (primitive_has_conv(prim))
      p.edge[static_cast<size_t>(e)] = init_conv(primitive_kernel(prim), shape.width, shape.width, rng, 1.0);
  }
  p.head = init_conv(3, shape.width, shape.out_ch, rng, kHeadInitScale);
  return p;
}

DiscreteCellParams instantiate_discrete(const Genotype& g, const MixedCellParams& source) {
  if (g.width != source.shape.width) throw DimensionError("instantiate_discrete: width mismatch");
  DiscreteCellParams p;
  p.genotype = g;
  p.shape = source.shape;
  p.stem = source.stem;
  p.head = source.head;
  for (int e = 0; e < kEdgeCount; ++e) {
    const Primitive prim = g.ops[static_cast<size_t>(e)];
    if (primitive_has_conv(prim))
      p.edge[static_cast<size_t>(e)] = source.edge[static_cast<size_t>(e)][static_cast<size_t>(prim)];
  }
  return p;
}

Tensor primitive_forward(Primitive p, const ConvParam& param, const Tensor& x) {
  if (p == Primitive::kSkip) return x;
  if (param.w.dim(2) != x.dim(2)) throw DimensionError("primitive_forward: width mismatch");
  Tensor branch = k::leaky_relu(k::conv2d(x, param.w, param.b, primitive_dilation(p)), kLeakySlope);
  if (!primitive_is_residual(p)) return branch;
  branch.axpy(1.0, x);
  return branch;
}

namespace {

Tensor mixed_edge_forward(const MixedCellParams& p, const Tensor& probs, int e, const Tensor& x) {
  Tensor out(x.dims());
  for (int j = 0; j < kPrimitiveCount; ++j) {
    const double weight = probs[static_cast<size_t>(e) * kPrimitiveCount + j];
    const Primitive prim = static_cast<Primitive>(j);
    out.axpy(weight, primitive_forward(prim, p.edge[static_cast<size_t>(e)][static_cast<size_t>(j)], x));
  }
  return out;
}

}  // namespace

Tensor mixed_cell_forward(const MixedCellParams& p, const Tensor& logits, const Tensor& x) {
  if (x.dim(2) != p.shape.in_ch) throw DimensionError("mixed_cell_forward: input channels");
  const Tensor probs = relax(logits);
  const Tensor n0 = k::conv2d(x, p.stem.w, p.stem.b, 1);
  const Tensor n1 = mixed_edge_forward(p, probs, 0, n0);
  const Tensor n2 = mixed_edge_forward(p, probs, 1, n1);
  const Tensor n3 = mixed_edge_forward(p, probs, 2, n2);
  Tensor n4 = mixed_edge_forward(p, probs, 3, n3);
  n4.axpy(1.0, n0);
  n4.axpy(1.0, n1);
  n4.axpy(1.0, n2);
  return k::conv2d(n4, p.head.w, p.head.b, 1);
}

Tensor discrete_cell_forward(const DiscreteCellParams& p, const Tensor& x) {
  if (x.dim(2) != p.shape.in_ch) throw DimensionError("discrete_cell_forward: input channels");
  const Tensor n0 = k::conv2d(x, p.stem.w, p.stem.b, 1);
  const Tensor n1 = primitive_forward(p.genotype.ops[0], p.edge[0], n0);
  const Tensor n2 = primitive_forward(p.genotype.ops[1], p.edge[1], n1);
  const Tensor n3 = primitive_forward(p.genotype.ops[2], p.edge[2], n2);
  Tensor n4 = primitive_forward(p.genotype.ops[3], p.edge[3], n3);
  n4.axpy(1.0, n0);
  n4.axpy(1.0, n1);
  n4.axpy(1.0, n2);
  return k::conv2d(n4, p.head.w, p.head.b, 1);
}

MixedCellIds register_mixed_cell(Tape& t, const MixedCellParams& p, const Tensor& logits) {
  MixedCellIds ids;
  ids.shape = p.shape;
  ids.stem_w = t.leaf(p.stem.w);
  ids.stem_b = t.leaf(p.stem.b);
  for (int e = 0; e < kEdgeCount; ++e) {
    for (int j = 0; j < kPrimitiveCount; ++j) {
      const ConvParam& cp = p.edge[static_cast<size_t>(e)][static_cast<size_t>(j)];
      if (!cp.empty()) {
        ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][0] = t.leaf(cp.w);
        ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][1] = t.leaf(cp.b);
      } else {
        ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][0] = -1;
        ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][1] = -1;
      }
    }
  }
  ids.head_w = t.leaf(p.head.w);
  ids.head_b = t.leaf(p.head.b);
  ids.alpha = t.leaf(logits);
  return ids;
}

DiscreteCellIds register_discrete_cell(Tape& t, const DiscreteCellParams& p) {
  DiscreteCellIds ids;
  ids.genotype = p.genotype;
  ids.shape = p.shape;
  ids.stem_w = t.leaf(p.stem.w);
  ids.stem_b = t.leaf(p.stem.b);
  for (int e = 0; e < kEdgeCount; ++e) {
    const ConvParam& cp = p.edge[static_cast<size_t>(e)];
    if (!cp.empty()) {
      ids.edge[static_cast<size_t>(e)][0] = t.leaf(cp.w);
      ids.edge[static_cast<size_t>(e)][1] = t.leaf(cp.b);
    } else {
      ids.edge[static_cast<size_t>(e)][0] = -1;
      ids.edge[static_cast<size_t>(e)][1] = -1;
    }
  }
  ids.head_w = t.leaf(p.head.w);
  ids.head_b = t.leaf(p.head.b);
  return ids;
}

namespace {

Tape::Id primitive_forward_tape(Tape& t, Primitive p, Tape::Id w, Tape::Id b, Tape::Id x) {
  if (p == Primitive::kSkip) return x;
  Tape::Id branch = t.leaky_relu(t.conv2d(x, w, b, primitive_dilation(p)), kLeakySlope);
  if (!primitive_is_residual(p)) return branch;
  return t.add(x, branch);
}

Tape::Id mixed_edge_forward_tape(Tape& t, const MixedCellIds& ids, int e, Tape::Id x) {
  const Tape::Id probs = t.softmax_vec(t.row(ids.alpha, e));
  std::vector<Tape::Id> terms;
  terms.reserve(kPrimitiveCount);
  for (int j = 0; j < kPrimitiveCount; ++j) {
    const Primitive prim = static_cast<Primitive>(j);
    terms.push_back(primitive_forward_tape(t, prim, ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][0],
                                           ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][1], x));
  }
  return t.weighted_sum(probs, terms);
}

}  // namespace

Tape::Id mixed_cell_forward(Tape& t, const MixedCellIds& ids, Tape::Id x) {
  const Tape::Id n0 = t.conv2d(x, ids.stem_w, ids.stem_b, 1);
  const Tape::Id n1 = mixed_edge_forward_tape(t, ids, 0, n0);
  const Tape::Id n2 = mixed_edge_forward_tape(t, ids, 1, n1);
  const Tape::Id n3 = mixed_edge_forward_tape(t, ids, 2, n2);
  const Tape::Id e3 = mixed_edge_forward_tape(t, ids, 3, n3);
  // Same left-to-right association as the eager path, so both agree bitwise.
  const Tape::Id n4 = t.add(t.add(t.add(e3, n0), n1), n2);
  return t.conv2d(n4, ids.head_w, ids.head_b, 1);
}

Tape::Id discrete_cell_forward(Tape& t, const DiscreteCellIds& ids, Tape::Id x) {
  const Tape::Id n0 = t.conv2d(x, ids.stem_w, ids.stem_b, 1);
  const Tape::Id n1 = primitive_forward_tape(t, ids.genotype.ops[0], ids.edge[0][0], ids.edge[0][1], n0);
  const Tape::Id n2 = primitive_forward_tape(t, ids.genotype.ops[1], ids.edge[1][0], ids.edge[1][1], n1);
  const Tape::Id n3 = primitive_forward_tape(t, ids.genotype.ops[2], ids.edge[2][0], ids.edge[2][1], n2);
  const Tape::Id e3 = primitive_forward_tape(t, ids.genotype.ops[3], ids.edge[3][0], ids.edge[3][1], n3);
  const Tape::Id n4 = t.add(t.add(t.add(e3, n0), n1), n2);
  return t.conv2d(n4, ids.head_w, ids.head_b, 1);
}

std::vector<NamedParam> collect_params(MixedCellParams& p, const std::string& prefix) {
  std::vector<NamedParam> out;
  out.push_back({prefix + ".stem.w", &p.stem.w});
  out.push_back({prefix + ".stem.b", &p.stem.b});
  for (int e = 0; e < kEdgeCount; ++e) {
    for (int j = 0; j < kPrimitiveCount; ++j) {
      ConvParam& cp = p.edge[static_cast<size_t>(e)][static_cast<size_t>(j)];
      if (cp.empty()) continue;
      const std::string base =
          prefix + ".edge" + std::to_string(e) + "." + primitive_name(static_cast<Primitive>(j));
      out.push_back({base + ".w", &cp.w});
      out.push_back({base + ".b", &cp.b});
    }
  }
  out.push_back({prefix + ".head.w", &p.head.w});
  out.push_back({prefix + ".head.b", &p.head.b});
  return out;
}

std::vector<NamedParam> collect_params(DiscreteCellParams& p, const std::string& prefix) {
  std::vector<NamedParam> out;
  out.push_back({prefix + ".stem.w", &p.stem.w});
  out.push_back({prefix + ".stem.b", &p.stem.b});
  for (int e = 0; e < kEdgeCount; ++e) {
    ConvParam& cp = p.edge[static_cast<size_t>(e)];
    if (cp.empty()) continue;
    const std::string base = prefix + ".edge" + std::to_string(e) + "." +
                             primitive_name(p.genotype.ops[static_cast<size_t>(e)]);
    out.push_back({base + ".w", &cp.w});
    out.push_back({base + ".b", &cp.b});
  }
  out.push_back({prefix + ".head.w", &p.head.w});
  out.push_back({prefix + ".head.b", &p.head.b});
  return out;
}

std::vector<Tape::Id> collect_leaf_ids(const MixedCellIds& ids) {
  std::vector<Tape::Id> out;
  out.push_back(ids.stem_w);
  out.push_back(ids.stem_b);
  for (int e = 0; e < kEdgeCount; ++e) {
    for (int j = 0; j < kPrimitiveCount; ++j) {
      if (ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][0] >= 0) {
        out.push_back(ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][0]);
        out.push_back(ids.edge[static_cast<size_t>(e)][static_cast<size_t>(j)][1]);
      }
    }
  }
  out.push_back(ids.head_w);
  out.push_back(ids.head_b);
  return out;
}

std::vector<Tape::Id> collect_leaf_ids(const DiscreteCellIds& ids) {
  std::vector<Tape::Id> out;
  out.push_back(ids.stem_w);
  out.push_back(ids.stem_b);
  for (int e = 0; e < kEdgeCount; ++e) {
    if (ids.edge[static_cast<size_t>(e)][0] >= 0) {
      out.push_back(ids.edge[static_cast<size_t>(e)][0]);
      out.push_back(ids.edge[static_cast<size_t>(e)][1]);
    }
  }
  out.push_back(ids.head_w);
  out.push_back(ids.head_b);
  return out;
}

int discrete_cell_param_count(const Genotype& g, const CellShape& shape) {
  int count = 3 * 3 * shape.in_ch * shape.width + shape.width;    // stem
  count += 3 * 3 * shape.width * shape.out_ch + shape.out_ch;     // head
  for (int e = 0; e < kEdgeCount; ++e) count += primitive_param_count(g.ops[static_cast<size_t>(e)], shape.width);
  return count;
}

}  // namespace ruas
