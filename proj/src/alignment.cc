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

#include "entrank/alignment.h"

#include <algorithm>
#include <cmath>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

Matrix Matrix::Identity(size_t n) {
  Matrix m(n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::Apply(std::span<const double> x) const {
  std::vector<double> y(rows, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    const double *w = data.data() + r * cols;
    double s = 0.0;
    for (size_t c = 0; c < cols; ++c) s += w[c] * x[c];
    y[r] = s;
  }
  return y;
}

double Matrix::FrobeniusNorm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

std::string SerializeMatrix(const Matrix &m) {
  std::string out = std::to_string(m.rows) + "\t" + std::to_string(m.cols) + "\n";
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < m.cols; ++c) {
      if (c > 0) out += ' ';
      out += FormatDouble(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix ParseMatrix(const std::string &content, const std::string &origin) {
  size_t nl = content.find('\n');
  auto header = SplitOn(std::string_view(content).substr(0, nl), '\t');
  if (header.size() != 2) throw ParseError(origin, 1, "expected rows<TAB>cols");
  Matrix m;
  try {
    m = Matrix(static_cast<size_t>(ParseInt(header[0])),
               static_cast<size_t>(ParseInt(header[1])));
  } catch (const Error &) {
    throw ParseError(origin, 1, "matrix dimensions must be integers");
  }
  std::string_view body =
      nl == std::string::npos ? std::string_view{} : std::string_view(content).substr(nl + 1);
  std::vector<std::string_view> values;
  for (std::string_view line : SplitOn(body, '\n')) {
    for (std::string_view v : SplitWhitespace(line)) values.push_back(v);
  }
  if (values.size() != m.data.size()) {
    throw ParseError(origin, 2, "expected " + std::to_string(m.data.size()) +
                                    " values, found " +
                                    std::to_string(values.size()));
  }
  for (size_t i = 0; i < values.size(); ++i) {
    try {
      m.data[i] = ParseDouble(values[i]);
    } catch (const Error &) {
      throw ParseError(origin, 2 + i / std::max<size_t>(m.cols, 1),
                       "bad matrix entry");
    }
  }
  return m;
}

Matrix LoadMatrix(const std::string &path) {
  return ParseMatrix(ReadFile(path), path);
}

// ---------------------------------------------------------------------------

AlignmentPairs SharedPairs(const JointEmbeddingTable &table,
                           const Vocabulary &vocab, const Matrix &token_table) {
  if (token_table.rows != static_cast<size_t>(vocab.native_size())) {
    throw Error(ErrorCode::kInvalid,
                "token table rows do not match the vocabulary");
  }
  AlignmentPairs pairs;
  std::vector<std::pair<size_t, int>> matches;
  for (size_t i = 0; i < table.words().size(); ++i) {
    std::string surface = NormalizeText(table.words()[i]);
    if (surface.starts_with(kContinuationPrefix)) continue;
    auto id = vocab.PieceId(surface);
    if (!id || vocab.Kind(*id) != TokenKind::kWordPiece) continue;
    matches.emplace_back(i, *id);
  }
  if (matches.empty()) {
    throw Error(ErrorCode::kEmptyIntersection,
                "no embedding word is also a word piece");
  }
  pairs.source = Matrix(matches.size(), table.dim());
  pairs.target = Matrix(matches.size(), token_table.cols);
  for (size_t r = 0; r < matches.size(); ++r) {
    auto [word, id] = matches[r];
    pairs.keys.push_back(table.words()[word]);
    std::ranges::copy(table.WordVector(word), pairs.source.row(r).begin());
    std::ranges::copy(token_table.row(id), pairs.target.row(r).begin());
  }
  return pairs;
}

AlignmentMatrix FitAlignment(const AlignmentPairs &pairs, double ridge) {
  const size_t n = pairs.source.rows;
  const size_t d_in = pairs.source.cols;
  const size_t d_out = pairs.target.cols;
  if (n == 0) throw Error(ErrorCode::kEmptyIntersection, "no alignment pairs");
  if (ridge < 0) throw Error(ErrorCode::kConfig, "ridge must be >= 0");
  if (ridge == 0 && n < d_in) {
    throw Error(ErrorCode::kSingularDesign,
                std::to_string(n) + " shared words cannot determine a " +
                    std::to_string(d_in) + "-column map without ridge");
  }

  // Normal equations: (A^T A + ridge I) W^T = A^T B.
  Matrix gram(d_in, d_in);
  Matrix rhs(d_in, d_out);
  for (size_t x = 0; x < n; ++x) {
    auto a = pairs.source.row(x);
    auto b = pairs.target.row(x);
    for (size_t i = 0; i < d_in; ++i) {
      for (size_t j = 0; j < d_in; ++j) gram(i, j) += a[i] * a[j];
      for (size_t j = 0; j < d_out; ++j) rhs(i, j) += a[i] * b[j];
    }
  }
  double max_diag = 0.0;
  for (size_t i = 0; i < d_in; ++i) {
    gram(i, i) += ridge;
    max_diag = std::max(max_diag, gram(i, i));
  }

  // Cholesky factor L (lower triangle of `chol`).
  Matrix chol(d_in, d_in);
  const double tolerance = 1e-12 * std::max(max_diag, 1e-300);
  for (size_t j = 0; j < d_in; ++j) {
    double diag = gram(j, j);
    for (size_t k = 0; k < j; ++k) diag -= chol(j, k) * chol(j, k);
    if (!(diag > tolerance)) {
      throw Error(ErrorCode::kSingularDesign,
                  "alignment Gram matrix is rank-deficient");
    }
    chol(j, j) = std::sqrt(diag);
    for (size_t i = j + 1; i < d_in; ++i) {
      double s = gram(i, j);
      for (size_t k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
      chol(i, j) = s / chol(j, j);
    }
  }

  AlignmentMatrix result;
  result.ridge = ridge;
  result.fitted_on = n;
  result.weights = Matrix(d_out, d_in);
  std::vector<double> y(d_in);
  for (size_t col = 0; col < d_out; ++col) {
    for (size_t i = 0; i < d_in; ++i) {  // L y = rhs
      double s = rhs(i, col);
      for (size_t k = 0; k < i; ++k) s -= chol(i, k) * y[k];
      y[i] = s / chol(i, i);
    }
    for (size_t i = d_in; i-- > 0;) {  // L^T x = y
      double s = y[i];
      for (size_t k = i + 1; k < d_in; ++k) s -= chol(k, i) * result.weights(col, k);
      result.weights(col, i) = s / chol(i, i);
    }
  }
  return result;
}

AlignmentMatrix FitAlignment(const JointEmbeddingTable &table,
                             const Vocabulary &vocab, const Matrix &token_table,
                             std::optional<double> ridge) {
  AlignmentPairs pairs = SharedPairs(table, vocab, token_table);
  return FitAlignment(pairs, ridge.value_or(DefaultRidge(pairs.keys.size())));
}

double Residual(const Matrix &weights, const AlignmentPairs &pairs) {
  double total = 0.0;
  for (size_t x = 0; x < pairs.source.rows; ++x) {
    std::vector<double> mapped = weights.Apply(pairs.source.row(x));
    auto b = pairs.target.row(x);
    for (size_t i = 0; i < mapped.size(); ++i) {
      double diff = mapped[i] - b[i];
      total += diff * diff;
    }
  }
  return total;
}

Matrix ObjectiveGradient(const Matrix &weights, const AlignmentPairs &pairs,
                         double ridge) {
  Matrix grad(weights.rows, weights.cols);
  for (size_t x = 0; x < pairs.source.rows; ++x) {
    auto a = pairs.source.row(x);
    std::vector<double> err = weights.Apply(a);
    auto b = pairs.target.row(x);
    for (size_t i = 0; i < err.size(); ++i) {
      double e = 2.0 * (err[i] - b[i]);
      for (size_t j = 0; j < a.size(); ++j) grad(i, j) += e * a[j];
    }
  }
  for (size_t k = 0; k < grad.data.size(); ++k) {
    grad.data[k] += 2.0 * ridge * weights.data[k];
  }
  return grad;
}

std::vector<double> MapToken(const Token &token, const JointEmbeddingTable &table,
                             const AlignmentMatrix &alignment,
                             const Matrix &token_table) {
  if (token.kind == TokenKind::kEntity) {
    std::string_view id = std::string_view(token.surface).substr(kEntityPrefix.size());
    auto index = table.EntityIndex(id);
    if (!index) {
      throw Error(ErrorCode::kMissingEmbedding,
                  "no embedding for entity '" + std::string(id) + "'",
                  std::string(id));
    }
    return alignment.weights.Apply(table.EntityVector(*index));
  }
  auto row = token_table.row(static_cast<size_t>(token.id));
  return {row.begin(), row.end()};
}

AlignedEntityVectors::AlignedEntityVectors(const JointEmbeddingTable &table,
                                           const AlignmentMatrix &alignment)
    : dim_(alignment.weights.rows) {
  if (alignment.weights.cols != static_cast<size_t>(table.dim())) {
    throw Error(ErrorCode::kInvalid,
                "alignment columns do not match the embedding dimension");
  }
  for (size_t i = 0; i < table.entities().size(); ++i) {
    vectors_.emplace(table.entities()[i],
                     alignment.weights.Apply(table.EntityVector(i)));
  }
}

bool AlignedEntityVectors::Contains(std::string_view entity_id) const {
  return vectors_.count(std::string(entity_id)) > 0;
}

std::span<const double> AlignedEntityVectors::Lookup(
    std::string_view entity_id) const {
  auto it = vectors_.find(std::string(entity_id));
  if (it == vectors_.end()) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no aligned vector for entity '" + std::string(entity_id) + "'",
                std::string(entity_id));
  }
  return it->second;
}

}  // namespace entrank
