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

#ifndef ENTRANK_EMBEDDINGS_H_
#define ENTRANK_EMBEDDINGS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entrank/corpus.h"

namespace entrank {

struct EmbeddingConfig {
  int dim = 16;
  int window = 2;     // context radius
  int negatives = 5;  // uniform negatives per positive pair
  int epochs = 5;
  double learning_rate = 0.025;
  uint64_t seed = 1;
  int min_count = 0;

  // Throws ConfigError.
  void Validate() const;
};

// Words and entities embedded in one space. Keys are plain words or
// "ENTITY/<id>". Only the input vectors are persisted; the context (output)
// vectors exist for tables that come out of training.
class JointEmbeddingTable {
 public:
  JointEmbeddingTable() = default;
  JointEmbeddingTable(int dim, std::vector<std::string> words,
                      std::vector<std::string> entities,
                      std::vector<double> word_vectors,
                      std::vector<double> entity_vectors);

  int dim() const { return dim_; }
  const std::vector<std::string> &words() const { return words_; }
  const std::vector<std::string> &entities() const { return entities_; }

  std::optional<size_t> WordIndex(std::string_view word) const;
  std::optional<size_t> EntityIndex(std::string_view entity_id) const;
  std::span<const double> WordVector(size_t index) const {
    return {word_vectors_.data() + index * dim_, static_cast<size_t>(dim_)};
  }
  std::span<const double> EntityVector(size_t index) const {
    return {entity_vectors_.data() + index * dim_, static_cast<size_t>(dim_)};
  }
  // Throws UnknownKey.
  std::span<const double> Vector(std::string_view key) const;
  bool Contains(std::string_view key) const;
  std::vector<std::string> Keys() const;

  std::string Serialize() const;
  static JointEmbeddingTable Load(const std::string &path);

  bool operator==(const JointEmbeddingTable &) const = default;

 private:
  friend class EmbeddingTrainer;

  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<std::string> entities_;
  std::vector<double> word_vectors_;
  std::vector<double> entity_vectors_;
  std::vector<double> word_context_;
  std::vector<double> entity_context_;
  std::unordered_map<std::string, size_t> word_index_;
  std::unordered_map<std::string, size_t> entity_index_;
};

// Mean logistic loss per epoch for each objective (empty when the objective
// had no training pairs).
struct EmbeddingLossTrace {
  std::vector<double> word;    // word -> context word
  std::vector<double> entity;  // entity -> linked entity
  std::vector<double> anchor;  // entity -> anchor context word
};

struct EmbeddingResult {
  JointEmbeddingTable table;
  EmbeddingLossTrace trace;
};

// Skip-gram with negative sampling over the three pair pools, shuffled
// together each epoch. Single-threaded and deterministic for a fixed seed.
// Throws EmptyCorpus.
EmbeddingResult TrainJointEmbeddings(std::span<const std::string> corpus,
                                     const KnowledgeGraph &graph,
                                     const EmbeddingConfig &config);

// Cosine similarity; throws UnknownKey.
double Similarity(const JointEmbeddingTable &table, std::string_view key_a,
                  std::string_view key_b);

// Up to k keys by descending cosine, ties by key; the query key is excluded.
std::vector<std::pair<std::string, double>> Neighbors(
    const JointEmbeddingTable &table, std::string_view key, int k);

double Cosine(std::span<const double> a, std::span<const double> b);

}  // namespace entrank

#endif  // ENTRANK_EMBEDDINGS_H_
