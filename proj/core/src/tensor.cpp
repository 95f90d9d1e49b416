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

#include "ruas/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruas/error.hpp"

namespace ruas {

namespace {
size_t count(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 4) throw DimensionError("tensor rank must be 1..4");
  size_t n = 1;
  for (const int d : dims) {
    if (d <= 0) throw DimensionError("tensor dimension must be positive");
    n *= static_cast<size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> dims) : dims_(std::move(dims)), data_(count(dims_), 0.0) {}

Tensor::Tensor(std::vector<int> dims, double fill) : dims_(std::move(dims)), data_(count(dims_), fill) {}

Tensor Tensor::scalar(double v) {
  Tensor t({1});
  t.data_[0] = v;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (const double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::sum() const {
  double s = 0.0;
  for (const double v : data_) s += v;
  return s;
}

double Tensor::mean() const { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }

double Tensor::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const double v : data_) m = std::min(m, v);
  return m;
}

double Tensor::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const double v : data_) m = std::max(m, v);
  return m;
}

double Tensor::norm() const {
  double s = 0.0;
  for (const double v : data_) s += v * v;
  return std::sqrt(s);
}

void Tensor::axpy(double s, const Tensor& other) {
  check_same_shape(*this, other, "Tensor::axpy");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

void Tensor::scale(double s) {
  for (double& v : data_) v *= s;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) throw DimensionError(std::string(where) + ": shape mismatch");
}

}  // namespace ruas
