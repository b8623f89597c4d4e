// Copyright 2026 The Entrank Authors.
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

#ifndef ENTRANK_MATRIX_H_
#define ENTRANK_MATRIX_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace entrank {

// Dense row-major matrix of doubles.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }
  std::span<double> row(size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(size_t r) const {
    return {data.data() + r * cols, cols};
  }

  static Matrix Identity(size_t n);
  // y = M x
  std::vector<double> Apply(std::span<const double> x) const;
  double FrobeniusNorm() const;

  bool operator==(const Matrix &) const = default;
};

// "rows<TAB>cols" header, then one whitespace-separated row per line.
std::string SerializeMatrix(const Matrix &m);
Matrix ParseMatrix(const std::string &content, const std::string &origin);
Matrix LoadMatrix(const std::string &path);

}  // namespace entrank

#endif  // ENTRANK_MATRIX_H_
