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

#include <filesystem>
#include <string>
#include <vector>

#include "ruas/tensor.hpp"

namespace ruas {

/// An RGB observation or recovery: {h,w,3} tensor with values in [0,1].
struct Image {
  Tensor data;

  Image() = default;
  explicit Image(Tensor t);
  Image(int h, int w) : data(Tensor({h, w, 3})) {}

  int height() const { return data.dim(0); }
  int width() const { return data.dim(1); }
};

/// Single-channel illumination map: {h,w,1}, clamped to [floor, 1].
struct IlluminationMap {
  Tensor data;
  double floor = 1e-3;

  IlluminationMap() = default;
  IlluminationMap(Tensor t, double floor_value);
};

// 8-bit binary PPM (P6) decode/encode. Decoding maps byte b to b/255;
// encoding rounds half up and clamps, so a save/load round trip moves any
// value by at most 1/510 per channel.
Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& img);

/// Writes a {h,w,1} map as an 8-bit binary PGM (P5).
void save_gray(const std::filesystem::path& path, const Tensor& map);

/// Sorted list of .ppm files directly inside a directory.
std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir);

}  // namespace ruas
