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

#ifndef ENTRANK_PIPELINE_H_
#define ENTRANK_PIPELINE_H_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrank/alignment.h"
#include "entrank/corpus.h"
#include "entrank/encoder.h"
#include "entrank/retrieval.h"
#include "entrank/tokenizer.h"

namespace entrank {

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
  int rank = 0;
  bool operator==(const RunEntry &) const = default;
};

// Ranked candidates per query. Ranks are 1..n and scores non-increasing.
struct Run {
  std::string tag = "entrank";
  std::map<std::string, std::vector<RunEntry>> queries;

  // Throws Invalid when ranks or scores break the ordering rules.
  void Validate() const;
  bool operator==(const Run &) const = default;
};

// Ranks are assigned in the given order.
Run MakeRun(const std::map<std::string, std::vector<ScoredDoc>> &ranked,
            std::string tag);

// BM25 first stage over every query of the collection.
Run FirstStageRun(const InvertedIndex &index, const Collection &collection,
                  int k_top, const Bm25Params &params = {},
                  std::string tag = "bm25");

// TREC format: "query_id Q0 doc_id rank score tag".
std::string SerializeRun(const Run &run);
// Throws ParseError (including non-contiguous ranks).
Run ParseRun(const std::string &content, const std::string &origin);
void WriteRun(const Run &run, const std::string &path);
Run ReadRun(const std::string &path);

// Relevance probability of one (query, document) pair.
class RerankScorer {
 public:
  virtual ~RerankScorer() = default;
  virtual double Score(const Query &query, const Document &doc) const = 0;
};

// Rescores the top `depth` candidates of each query and sorts them by score;
// ties keep their first-stage order. The remaining candidates follow in their
// original order with scores strictly below the rescored block. Throws
// MissingDocText and UnknownKey (query not in the collection).
Run Rerank(const Run &run, const Collection &collection,
           const RerankScorer &scorer, int depth, std::string tag);

// Surface form -> entity, learned from the collection's annotations. Used to
// link text that arrives without annotations (stage-1 triple queries).
class MentionDictionary {
 public:
  explicit MentionDictionary(const Collection &collection);
  MentionDictionary(const std::vector<Annotation> &annotations,
                    const Collection &collection);

  size_t size() const { return entries_.size(); }
  std::optional<std::string> Lookup(std::string_view mention) const;
  // Greedy longest match over word sequences of the normalized text.
  std::vector<Annotation> Annotate(std::string_view text,
                                   std::string_view owner_id) const;

 private:
  void Add(const std::vector<Annotation> &annotations, const Collection &c);

  std::unordered_map<std::string, std::string> entries_;
  size_t max_words_ = 0;
};

// Tokenizes queries and documents once and builds model inputs. With
// `entities` set, annotations become entity tokens when the entity has a
// vector (and an id in `vocab`); without it, text is plain word pieces.
class InputBuilder {
 public:
  InputBuilder(const Collection &collection, const Vocabulary &vocab,
               const EntityVectors *entities, InputLimits limits = {});

  bool entity_mode() const { return entities_ != nullptr; }
  const Vocabulary &vocab() const { return vocab_; }
  const EntityVectors *entities() const { return entities_; }

  const std::vector<Token> &QueryTokens(const Query &query) const;
  // Throws MissingDocText.
  const std::vector<Token> &DocTokens(std::string_view doc_id) const;
  std::vector<Token> TextTokens(std::string_view text,
                                std::span<const Annotation> annotations) const;
  ModelInput Build(const Query &query, std::string_view doc_id) const;
  ModelInput Build(std::span<const Token> query_tokens,
                   std::string_view doc_id) const;

 private:
  const Collection &collection_;
  const Vocabulary &vocab_;
  const EntityVectors *entities_;
  InputLimits limits_;
  mutable std::unordered_map<std::string, std::vector<Token>> query_cache_;
  mutable std::unordered_map<std::string, std::vector<Token>> doc_cache_;
};

class NeuralScorer : public RerankScorer {
 public:
  NeuralScorer(const InputBuilder &inputs, const EncoderWeights &weights)
      : inputs_(inputs), weights_(weights) {}
  double Score(const Query &query, const Document &doc) const override;

 private:
  const InputBuilder &inputs_;
  const EncoderWeights &weights_;
};

// Routes each query to the scorer of the fold that holds it as a test query.
class FoldScorer : public RerankScorer {
 public:
  FoldScorer(const Collection &collection,
             std::map<int, const RerankScorer *> scorers)
      : collection_(collection), scorers_(std::move(scorers)) {}
  // Throws Invalid for queries outside every test fold.
  double Score(const Query &query, const Document &doc) const override;

 private:
  const Collection &collection_;
  std::map<int, const RerankScorer *> scorers_;
};

// General-collection training triple.
struct Triple {
  std::string query_text;
  std::string positive_doc;
  std::string negative_doc;
  bool operator==(const Triple &) const = default;
};

// TSV: query_text<TAB>positive_doc_id<TAB>negative_doc_id.
std::vector<Triple> LoadTriples(const std::string &path);
std::string SerializeTriples(const std::vector<Triple> &triples);

struct StagePlan {
  std::vector<Triple> stage1;
  std::vector<FoldSpec> folds;
};

struct FinetuneOptions {
  TrainOptions stage1{.learning_rate = 0.01, .epochs = 1};
  TrainOptions stage2{.learning_rate = 0.01, .epochs = 1};
  int batch_size = 8;
  bool run_stage1 = true;
};

// One training or evaluation touch of a query, in execution order.
struct ExecutionLogEntry {
  int fold = 0;
  std::string phase;  // "train" or "eval"
  std::string query_id;
};

struct FoldTraining {
  EncoderWeights weights;
  double initial_loss = 0.0;  // mean per-example loss before stage 2
  double final_loss = 0.0;    // and after
  size_t examples = 0;
  std::vector<double> loss_trace;
};

struct FinetuneResult {
  EncoderWeights stage1;
  std::vector<double> stage1_trace;
  std::map<int, FoldTraining> folds;
  std::vector<ExecutionLogEntry> log;
};

// Stage-1 batches: each triple contributes a positive and a negative
// example; query text is linked with `mentions` in entity mode.
std::vector<TrainingBatch> Stage1Batches(std::span<const Triple> triples,
                                         const InputBuilder &inputs,
                                         const MentionDictionary *mentions,
                                         int batch_size);
// Stage-2 batches for one fold: every judged pair of the fold's training
// queries, label 1 when grade > 0.
std::vector<TrainingBatch> FoldBatches(const FoldSpec &fold,
                                       const Collection &collection,
                                       const InputBuilder &inputs,
                                       int batch_size);

// Trains stage 1 once (unless disabled), then clones those weights per fold
// and continues on the fold's training queries.
FinetuneResult TwoStageFinetune(const EncoderWeights &initial,
                                const StagePlan &plan,
                                const Collection &collection,
                                const InputBuilder &inputs,
                                const MentionDictionary *mentions,
                                const FinetuneOptions &options);

// Reranks each fold's test queries with that fold's model and appends
// "eval" entries to `log`.
Run RerankByFold(const Run &run, const Collection &collection,
                 const InputBuilder &inputs,
                 const std::map<int, FoldTraining> &folds, int depth,
                 std::string tag, std::vector<ExecutionLogEntry> *log);

// Throws Invalid if some fold evaluated a query it trained on.
void CheckFoldIsolation(std::span<const ExecutionLogEntry> log);

}  // namespace entrank

#endif  // ENTRANK_PIPELINE_H_
