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

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace ruas {

/// Dense row-major tensor of doubles, rank 1..4.
///
/// Conventions used throughout:
///   images      {h, w, c}            (channels innermost)
///   conv kernel {k, k, c_in, c_out}
///   bias        {c_out}
///   scalar      {1}
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims);
  Tensor(std::vector<int> dims, double fill);

  static Tensor scalar(double v);
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.dims_); }

  bool empty() const { return data_.empty(); }
  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<int>& dims() const { return dims_; }
  size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // Rank-3 image access.
  double& at(int y, int x, int c) { return data_[idx3(y, x, c)]; }
  const double& at(int y, int x, int c) const { return data_[idx3(y, x, c)]; }
  int height() const { return dims_[0]; }
  int width() const { return dims_[1]; }
  int channels() const { return dims_[2]; }

  // Rank-4 kernel access: (ky, kx, ci, co).
  double& at4(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
  const double& at4(int a, int b, int c, int d) const { return data_[idx4(a, b, c, d)]; }

  void fill(double v);
  bool all_finite() const;

  double sum() const;
  double mean() const;
  double min() const;
  double max() const;
  /// Euclidean norm of the flattened tensor.
  double norm() const;

  /// this += s * other (shapes must match).
  void axpy(double s, const Tensor& other);
  void scale(double s);

 private:
  size_t idx3(int y, int x, int c) const {
    return (static_cast<size_t>(y) * dims_[1] + x) * dims_[2] + c;
  }
  size_t idx4(int a, int b, int c, int d) const {
    return ((static_cast<size_t>(a) * dims_[1] + b) * static_cast<size_t>(dims_[2]) + c) *
               static_cast<size_t>(dims_[3]) +
           d;
  }

  std::vector<int> dims_;
  std::vector<double> data_;
};

/// Throws DimensionError unless the two shapes match.
void check_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace ruas
