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

#ifndef ENTRANK_ALIGNMENT_H_
#define ENTRANK_ALIGNMENT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrank/embeddings.h"
#include "entrank/matrix.h"
#include "entrank/tokenizer.h"

namespace entrank {

// Source of input vectors for entity tokens.
class EntityVectors {
 public:
  virtual ~EntityVectors() = default;
  virtual bool Contains(std::string_view entity_id) const = 0;
  // Throws MissingEmbedding.
  virtual std::span<const double> Lookup(std::string_view entity_id) const = 0;
};

struct AlignmentMatrix {
  Matrix weights;  // d_encoder x d_embedding
  double ridge = 0.0;
  size_t fitted_on = 0;
};

// Words present both in the embedding table and, as beginning pieces, in the
// encoder vocabulary. Row i of `source` / `target` belongs to keys[i].
struct AlignmentPairs {
  std::vector<std::string> keys;
  Matrix source;  // n x d_embedding
  Matrix target;  // n x d_encoder
};

// Throws EmptyIntersection.
AlignmentPairs SharedPairs(const JointEmbeddingTable &table,
                           const Vocabulary &vocab, const Matrix &token_table);

inline double DefaultRidge(size_t fitted_on) {
  return 1e-6 * static_cast<double>(fitted_on);
}

// Closed-form ridge least squares: argmin_W sum |W a - b|^2 + ridge |W|_F^2.
// Throws SingularDesign when ridge is 0 and the Gram matrix is rank-deficient.
AlignmentMatrix FitAlignment(const AlignmentPairs &pairs, double ridge);
AlignmentMatrix FitAlignment(const JointEmbeddingTable &table,
                             const Vocabulary &vocab, const Matrix &token_table,
                             std::optional<double> ridge = std::nullopt);

// sum |W a - b|^2 over the pairs.
double Residual(const Matrix &weights, const AlignmentPairs &pairs);
// Gradient of the ridge objective with respect to W.
Matrix ObjectiveGradient(const Matrix &weights, const AlignmentPairs &pairs,
                         double ridge);

// Entity tokens -> W * embedding; every other token -> its encoder row.
// Throws MissingEmbedding for entities without an embedding.
std::vector<double> MapToken(const Token &token, const JointEmbeddingTable &table,
                             const AlignmentMatrix &alignment,
                             const Matrix &token_table);

// Precomputed W * embedding for every entity of a table.
class AlignedEntityVectors : public EntityVectors {
 public:
  AlignedEntityVectors(const JointEmbeddingTable &table,
                       const AlignmentMatrix &alignment);

  bool Contains(std::string_view entity_id) const override;
  std::span<const double> Lookup(std::string_view entity_id) const override;
  size_t dim() const { return dim_; }

 private:
  size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

}  // namespace entrank

#endif  // ENTRANK_ALIGNMENT_H_
