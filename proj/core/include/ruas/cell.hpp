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

// The distillation cell: a five-node chain whose four sequential edges carry
// either a softmax-weighted mixture of candidate operations (search time) or
// a single chosen operation (after derivation). Nodes 0..2 also feed the
// last node through fixed identity connections, and the last node aggregates
// by summation. A fixed 3x3 stem maps the input to the cell width and a
// fixed 3x3 head maps it back.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ruas/autodiff.hpp"
#include "ruas/rng.hpp"
#include "ruas/tensor.hpp"

namespace ruas {

inline constexpr int kEdgeCount = 4;
inline constexpr int kPrimitiveCount = 7;
inline constexpr double kLeakySlope = 0.05;
inline constexpr double kHeadInitScale = 0.1;

/// Candidate operations, in the fixed order used for argmax tie-breaking.
enum class Primitive : int {
  kConv1 = 0,       // C1
  kConv3 = 1,       // C3
  kResConv1 = 2,    // RC1
  kResConv3 = 3,    // RC3
  kDilConv3 = 4,    // DC3_2
  kResDilConv3 = 5, // RDC3_2
  kSkip = 6,        // SC
};

const char* primitive_name(Primitive p);
std::optional<Primitive> primitive_from_name(const std::string& name);
bool primitive_has_conv(Primitive p);
bool primitive_is_residual(Primitive p);
int primitive_kernel(Primitive p);
int primitive_dilation(Primitive p);
/// Trainable scalars of one primitive at a given cell width.
int primitive_param_count(Primitive p, int width);

/// Channel plan of one cell.
struct CellShape {
  int in_ch = 1;
  int width = 3;
  int out_ch = 1;
};

/// Kernel {k,k,ci,co} plus bias {co}; empty for parameter-free operations.
struct ConvParam {
  Tensor w;
  Tensor b;
  bool empty() const { return w.empty(); }
};

/// Supernet weights: every candidate on every searched edge, plus stem/head.
struct MixedCellParams {
  CellShape shape;
  ConvParam stem;
  ConvParam head;
  std::array<std::array<ConvParam, kPrimitiveCount>, kEdgeCount> edge;
};

/// Discrete per-edge operation choice.
struct Genotype {
  std::string module_tag;  // "IEM" or "NRM"
  int width = 0;
  std::array<Primitive, kEdgeCount> ops{};
};

/// Weights of a derived cell: one operation per searched edge.
struct DiscreteCellParams {
  Genotype genotype;
  CellShape shape;
  ConvParam stem;
  ConvParam head;
  std::array<ConvParam, kEdgeCount> edge;
};

/// Architecture logits: {kEdgeCount, kPrimitiveCount}.
Tensor zero_logits();

/// Row-wise softmax of architecture logits; each row sums to one.
Tensor relax(const Tensor& logits);

/// Per-edge argmax of the relaxed probabilities; ties break toward the first
/// primitive in the fixed order.
Genotype derive_genotype(const Tensor& logits, const std::string& module_tag, int width);

/// Kernels drawn from N(0, sqrt(2/fan_in)), biases zero, head scaled down so
/// a fresh cell perturbs its input only slightly.
MixedCellParams init_mixed_cell(const CellShape& shape, Rng& rng);
DiscreteCellParams init_discrete_cell(const Genotype& g, const CellShape& shape, Rng& rng);

/// Builds a discrete cell from a genotype, copying the chosen kernels out of
/// supernet weights.
DiscreteCellParams instantiate_discrete(const Genotype& g, const MixedCellParams& source);

// Eager forwards (no gradients).
Tensor primitive_forward(Primitive p, const ConvParam& param, const Tensor& x);
Tensor mixed_cell_forward(const MixedCellParams& p, const Tensor& logits, const Tensor& x);
Tensor discrete_cell_forward(const DiscreteCellParams& p, const Tensor& x);

// Tape forwards. Parameters are registered once per tape; the id collections
// below enumerate leaves in the same order as collect_params.
struct MixedCellIds {
  CellShape shape;
  Tape::Id alpha = -1;
  Tape::Id stem_w = -1, stem_b = -1;
  Tape::Id head_w = -1, head_b = -1;
  std::array<std::array<std::array<Tape::Id, 2>, kPrimitiveCount>, kEdgeCount> edge{};
};
struct DiscreteCellIds {
  Genotype genotype;
  CellShape shape;
  Tape::Id stem_w = -1, stem_b = -1;
  Tape::Id head_w = -1, head_b = -1;
  std::array<std::array<Tape::Id, 2>, kEdgeCount> edge{};
};

MixedCellIds register_mixed_cell(Tape& t, const MixedCellParams& p, const Tensor& logits);
DiscreteCellIds register_discrete_cell(Tape& t, const DiscreteCellParams& p);
Tape::Id mixed_cell_forward(Tape& t, const MixedCellIds& ids, Tape::Id x);
Tape::Id discrete_cell_forward(Tape& t, const DiscreteCellIds& ids, Tape::Id x);

/// Named reference to one weight tensor; orderings returned by the
/// collect_params overloads are the canonical parameter order used by
/// optimizers, serialization and gradient readout.
struct NamedParam {
  std::string name;
  Tensor* tensor;
};

std::vector<NamedParam> collect_params(MixedCellParams& p, const std::string& prefix);
std::vector<NamedParam> collect_params(DiscreteCellParams& p, const std::string& prefix);
std::vector<Tape::Id> collect_leaf_ids(const MixedCellIds& ids);
std::vector<Tape::Id> collect_leaf_ids(const DiscreteCellIds& ids);

/// Closed-form trainable-scalar count for a discrete cell.
int discrete_cell_param_count(const Genotype& g, const CellShape& shape);

}  // namespace ruas
