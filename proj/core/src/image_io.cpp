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

#include "ruas/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ruas/error.hpp"

namespace ruas {

Image::Image(Tensor t) : data(std::move(t)) {
  if (data.rank() != 3 || data.dim(2) != 3) throw DimensionError("Image: expects {h,w,3}");
  if (!data.all_finite()) throw PreconditionError("Image: non-finite values");
}

IlluminationMap::IlluminationMap(Tensor t, double floor_value) : data(std::move(t)), floor(floor_value) {
  if (data.rank() != 3 || data.dim(2) != 1) throw DimensionError("IlluminationMap: expects {h,w,1}");
}

namespace {

int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then reads one non-negative integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw FormatError("image: malformed PNM header");
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  return v;
}

uint8_t encode_byte(double v) {
  const double q = std::floor(v * 255.0 + 0.5);
  return static_cast<uint8_t>(std::clamp(q, 0.0, 255.0));
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("image: cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6')
    throw FormatError("image: unsupported format (expected binary PPM 'P6'): " + path.string());
  const int w = read_pnm_token(in);
  const int h = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (maxval != 255) throw FormatError("image: only 8-bit PPM is supported: " + path.string());
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(in.gcount()) != raw.size())
    throw FormatError("image: truncated pixel data: " + path.string());
  Image img(h, w);
  for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
  return img;
}

void save_image(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("image: cannot write " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.data.size());
  for (size_t i = 0; i < raw.size(); ++i) raw[i] = encode_byte(img.data[i]);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw FormatError("image: write failed: " + path.string());
}

void save_gray(const std::filesystem::path& path, const Tensor& map) {
  if (map.rank() != 3 || map.dim(2) != 1) throw DimensionError("save_gray: expects {h,w,1}");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("image: cannot write " + path.string());
  out << "P5\n" << map.dim(1) << " " << map.dim(0) << "\n255\n";
  std::vector<unsigned char> raw(map.size());
  for (size_t i = 0; i < raw.size(); ++i) raw[i] = encode_byte(map[i]);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw FormatError("image: write failed: " + path.string());
}

std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace ruas
