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

#include "entrank/pipeline.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

void Run::Validate() const {
  for (const auto &[qid, entries] : queries) {
    for (size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != static_cast<int>(i) + 1) {
        throw Error(ErrorCode::kInvalid, "ranks are not 1..n", qid);
      }
      if (i > 0 && entries[i].score > entries[i - 1].score) {
        throw Error(ErrorCode::kInvalid, "scores increase with rank", qid);
      }
    }
  }
}

Run MakeRun(const std::map<std::string, std::vector<ScoredDoc>> &ranked,
            std::string tag) {
  Run run;
  run.tag = std::move(tag);
  for (const auto &[qid, docs] : ranked) {
    std::vector<RunEntry> &entries = run.queries[qid];
    for (size_t i = 0; i < docs.size(); ++i) {
      entries.push_back({docs[i].doc_id, docs[i].score, static_cast<int>(i) + 1});
    }
  }
  return run;
}

Run FirstStageRun(const InvertedIndex &index, const Collection &collection,
                  int k_top, const Bm25Params &params, std::string tag) {
  std::map<std::string, std::vector<ScoredDoc>> ranked;
  for (const Query &q : collection.queries()) {
    ranked[q.query_id] = Search(index, QueryTerms(q.text), k_top, params);
  }
  return MakeRun(ranked, std::move(tag));
}

std::string SerializeRun(const Run &run) {
  std::string out;
  for (const auto &[qid, entries] : run.queries) {
    for (const RunEntry &e : entries) {
      out += qid + " Q0 " + e.doc_id + " " + std::to_string(e.rank) + " " +
             FormatDouble(e.score) + " " + run.tag + "\n";
    }
  }
  return out;
}

Run ParseRun(const std::string &content, const std::string &origin) {
  Run run;
  bool tag_seen = false;
  std::vector<std::string_view> lines = SplitOn(content, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (SplitWhitespace(line).empty()) continue;
    const size_t line_no = i + 1;
    std::vector<std::string_view> f = SplitWhitespace(line);
    if (f.size() != 6) throw ParseError(origin, line_no, "expected 6 fields");
    RunEntry e;
    e.doc_id = std::string(f[2]);
    try {
      e.rank = static_cast<int>(ParseInt(f[3]));
      e.score = ParseDouble(f[4]);
    } catch (const Error &) {
      throw ParseError(origin, line_no, "bad rank or score");
    }
    if (!tag_seen) {
      run.tag = std::string(f[5]);
      tag_seen = true;
    } else if (f[5] != run.tag) {
      throw ParseError(origin, line_no, "run tag changes within the file");
    }
    std::vector<RunEntry> &entries = run.queries[std::string(f[0])];
    if (e.rank != static_cast<int>(entries.size()) + 1) {
      throw ParseError(origin, line_no,
                       "non-contiguous rank " + std::to_string(e.rank) +
                           " for query " + std::string(f[0]));
    }
    if (!entries.empty() && e.score > entries.back().score) {
      throw ParseError(origin, line_no, "score increases with rank");
    }
    entries.push_back(std::move(e));
  }
  if (!tag_seen) run.tag.clear();
  return run;
}

void WriteRun(const Run &run, const std::string &path) {
  WriteFile(path, SerializeRun(run));
}

Run ReadRun(const std::string &path) { return ParseRun(ReadFile(path), path); }

Run Rerank(const Run &run, const Collection &collection,
           const RerankScorer &scorer, int depth, std::string tag) {
  if (depth < 1) throw Error(ErrorCode::kConfig, "rerank depth must be at least 1");
  Run out;
  out.tag = std::move(tag);
  for (const auto &[qid, entries] : run.queries) {
    const Query *query = collection.FindQuery(qid);
    if (query == nullptr) {
      throw Error(ErrorCode::kUnknownKey, "run query not in collection: " + qid, qid);
    }
    const size_t block = std::min(entries.size(), static_cast<size_t>(depth));
    std::vector<ScoredDoc> head;
    for (size_t i = 0; i < block; ++i) {
      const Document *doc = collection.FindDocument(entries[i].doc_id);
      if (doc == nullptr) {
        throw Error(ErrorCode::kMissingDocText,
                    "no text for candidate " + entries[i].doc_id, entries[i].doc_id);
      }
      head.push_back({doc->doc_id, scorer.Score(*query, *doc)});
    }
    // Equal scores keep their first-stage order, which itself breaks ties by
    // doc id; a constant scorer therefore reproduces the input ranking.
    std::stable_sort(head.begin(), head.end(), [](const ScoredDoc &a, const ScoredDoc &b) {
      return a.score > b.score;
    });
    std::vector<RunEntry> &ranked = out.queries[qid];
    for (const ScoredDoc &d : head) {
      ranked.push_back({d.doc_id, d.score, static_cast<int>(ranked.size()) + 1});
    }
    const double floor = head.empty() ? 0.0 : head.back().score;
    for (size_t i = block; i < entries.size(); ++i) {
      const double score = floor - static_cast<double>(i - block + 1);
      ranked.push_back({entries[i].doc_id, score, static_cast<int>(ranked.size()) + 1});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

MentionDictionary::MentionDictionary(const Collection &collection) {
  Add(collection.annotations(), collection);
}

MentionDictionary::MentionDictionary(const std::vector<Annotation> &annotations,
                                     const Collection &collection) {
  Add(annotations, collection);
}

void MentionDictionary::Add(const std::vector<Annotation> &annotations,
                            const Collection &collection) {
  // surface -> entity -> count; the most frequent entity wins, ties by id.
  std::map<std::string, std::map<std::string, int>> counts;
  for (const Annotation &a : annotations) {
    std::optional<std::string_view> text = collection.OwnerText(a.owner_id);
    std::string surface;
    if (text) {
      const std::string normalized = NormalizeText(*text);
      if (a.char_end <= normalized.size()) {
        surface = normalized.substr(a.char_start, a.char_end - a.char_start);
      }
    }
    if (surface.empty()) surface = NormalizeText(a.mention);
    if (Words(surface).empty()) continue;
    ++counts[surface][a.entity_id];
  }
  for (const auto &[surface, by_entity] : counts) {
    auto best = std::max_element(
        by_entity.begin(), by_entity.end(),
        [](const auto &a, const auto &b) { return a.second < b.second; });
    entries_[surface] = best->first;
    max_words_ = std::max(max_words_, Words(surface).size());
  }
}

std::optional<std::string> MentionDictionary::Lookup(std::string_view mention) const {
  auto it = entries_.find(NormalizeText(mention));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<Annotation> MentionDictionary::Annotate(std::string_view text,
                                                    std::string_view owner_id) const {
  const std::string normalized = NormalizeText(text);
  std::vector<WordSpan> words = SplitWords(normalized);
  std::vector<Annotation> out;
  size_t w = 0;
  while (w < words.size()) {
    bool matched = false;
    const size_t longest = std::min(max_words_, words.size() - w);
    for (size_t len = longest; len >= 1; --len) {
      const size_t begin = words[w].begin, end = words[w + len - 1].end;
      auto it = entries_.find(normalized.substr(begin, end - begin));
      if (it != entries_.end()) {
        out.push_back({std::string(owner_id), begin, end,
                       normalized.substr(begin, end - begin), it->second});
        w += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++w;
  }
  return out;
}

// ---------------------------------------------------------------------------

InputBuilder::InputBuilder(const Collection &collection, const Vocabulary &vocab,
                           const EntityVectors *entities, InputLimits limits)
    : collection_(collection), vocab_(vocab), entities_(entities), limits_(limits) {}

std::vector<Token> InputBuilder::TextTokens(
    std::string_view text, std::span<const Annotation> annotations) const {
  if (entities_ == nullptr) return WordpieceTokenize(text, vocab_);
  const EntityVectors *entities = entities_;
  return AnnotateTokens(NormalizeText(text), annotations, vocab_,
                        [entities](std::string_view id) { return entities->Contains(id); });
}

const std::vector<Token> &InputBuilder::QueryTokens(const Query &query) const {
  auto it = query_cache_.find(query.query_id);
  if (it != query_cache_.end()) return it->second;
  std::vector<Annotation> annotations = collection_.AnnotationsFor(query.query_id);
  return query_cache_.emplace(query.query_id, TextTokens(query.text, annotations))
      .first->second;
}

const std::vector<Token> &InputBuilder::DocTokens(std::string_view doc_id) const {
  auto it = doc_cache_.find(std::string(doc_id));
  if (it != doc_cache_.end()) return it->second;
  const Document *doc = collection_.FindDocument(doc_id);
  if (doc == nullptr) {
    throw Error(ErrorCode::kMissingDocText, "no text for document " + std::string(doc_id),
                std::string(doc_id));
  }
  std::vector<Annotation> annotations = collection_.AnnotationsFor(doc_id);
  return doc_cache_.emplace(std::string(doc_id), TextTokens(doc->text, annotations))
      .first->second;
}

ModelInput InputBuilder::Build(const Query &query, std::string_view doc_id) const {
  return Build(QueryTokens(query), doc_id);
}

ModelInput InputBuilder::Build(std::span<const Token> query_tokens,
                               std::string_view doc_id) const {
  return BuildInput(query_tokens, DocTokens(doc_id), limits_);
}

double NeuralScorer::Score(const Query &query, const Document &doc) const {
  return entrank::Score(weights_, inputs_.Build(query, doc.doc_id), inputs_.entities());
}

double FoldScorer::Score(const Query &query, const Document &doc) const {
  std::optional<int> fold = collection_.TestFoldOf(query.query_id);
  if (!fold || !scorers_.count(*fold)) {
    throw Error(ErrorCode::kInvalid,
                "query " + query.query_id + " is not a test query of any trained fold",
                query.query_id);
  }
  return scorers_.at(*fold)->Score(query, doc);
}

// ---------------------------------------------------------------------------

std::vector<Triple> LoadTriples(const std::string &path) {
  std::vector<Triple> out;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string_view> f = SplitOn(lines[i], '\t');
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
      throw ParseError(path, i + 1, "expected query_text<TAB>positive<TAB>negative");
    }
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  return out;
}

std::string SerializeTriples(const std::vector<Triple> &triples) {
  std::string out;
  for (const Triple &t : triples) {
    out += t.query_text + "\t" + t.positive_doc + "\t" + t.negative_doc + "\n";
  }
  return out;
}

namespace {

void Append(std::vector<TrainingBatch> *batches, ModelInput input, int label,
            int batch_size) {
  if (batches->empty() ||
      batches->back().inputs.size() >= static_cast<size_t>(batch_size)) {
    batches->emplace_back();
  }
  batches->back().inputs.push_back(std::move(input));
  batches->back().labels.push_back(label);
}

double MeanLoss(const EncoderWeights &weights,
                std::span<const TrainingBatch> batches,
                const EntityVectors *entities) {
  double total = 0.0;
  size_t count = 0;
  for (const TrainingBatch &b : batches) {
    total += BatchLoss(weights, b, entities);
    count += b.inputs.size();
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace

std::vector<TrainingBatch> Stage1Batches(std::span<const Triple> triples,
                                         const InputBuilder &inputs,
                                         const MentionDictionary *mentions,
                                         int batch_size) {
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be positive");
  std::vector<TrainingBatch> batches;
  for (size_t i = 0; i < triples.size(); ++i) {
    const Triple &t = triples[i];
    std::vector<Annotation> annotations;
    if (inputs.entity_mode() && mentions != nullptr) {
      annotations = mentions->Annotate(t.query_text, "triple" + std::to_string(i));
    }
    std::vector<Token> query = inputs.TextTokens(t.query_text, annotations);
    // Keep a triple's two examples in one batch.
    const int size = std::max(2, batch_size + batch_size % 2);
    Append(&batches, inputs.Build(query, t.positive_doc), 1, size);
    Append(&batches, inputs.Build(query, t.negative_doc), 0, size);
  }
  return batches;
}

std::vector<TrainingBatch> FoldBatches(const FoldSpec &fold,
                                       const Collection &collection,
                                       const InputBuilder &inputs,
                                       int batch_size) {
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be positive");
  std::vector<TrainingBatch> batches;
  for (const std::string &qid : fold.train_query_ids) {
    const Query *query = collection.FindQuery(qid);
    const std::map<std::string, int> *judged = collection.Judgments(qid);
    if (query == nullptr || judged == nullptr) continue;
    for (const auto &[doc_id, grade] : *judged) {
      if (collection.FindDocument(doc_id) == nullptr) continue;
      Append(&batches, inputs.Build(*query, doc_id), grade > 0 ? 1 : 0, batch_size);
    }
  }
  return batches;
}

FinetuneResult TwoStageFinetune(const EncoderWeights &initial,
                                const StagePlan &plan,
                                const Collection &collection,
                                const InputBuilder &inputs,
                                const MentionDictionary *mentions,
                                const FinetuneOptions &options) {
  FinetuneResult result;
  result.stage1 = initial;
  if (options.run_stage1 && !plan.stage1.empty() && options.stage1.epochs > 0) {
    std::vector<TrainingBatch> batches =
        Stage1Batches(plan.stage1, inputs, mentions, options.batch_size);
    result.stage1_trace =
        TrainPointwise(result.stage1, batches, options.stage1, inputs.entities())
            .loss_trace;
  }
  for (const FoldSpec &fold : plan.folds) {
    for (const std::string &qid : fold.train_query_ids) {
      if (fold.test_query_ids.count(qid)) {
        throw Error(ErrorCode::kInvalid,
                    "fold " + std::to_string(fold.fold_id) + " trains on test query " + qid,
                    qid);
      }
    }
    FoldTraining ft;
    ft.weights = result.stage1;
    std::vector<TrainingBatch> batches =
        FoldBatches(fold, collection, inputs, options.batch_size);
    for (const std::string &qid : fold.train_query_ids) {
      result.log.push_back({fold.fold_id, "train", qid});
    }
    for (const TrainingBatch &b : batches) ft.examples += b.inputs.size();
    ft.initial_loss = MeanLoss(ft.weights, batches, inputs.entities());
    if (!batches.empty() && options.stage2.epochs > 0) {
      TrainOptions o = options.stage2;
      o.seed = options.stage2.seed + static_cast<uint64_t>(fold.fold_id);
      ft.loss_trace = TrainPointwise(ft.weights, batches, o, inputs.entities()).loss_trace;
      ft.final_loss = MeanLoss(ft.weights, batches, inputs.entities());
    } else {
      ft.final_loss = ft.initial_loss;
    }
    result.folds.emplace(fold.fold_id, std::move(ft));
  }
  return result;
}

Run RerankByFold(const Run &run, const Collection &collection,
                 const InputBuilder &inputs,
                 const std::map<int, FoldTraining> &folds, int depth,
                 std::string tag, std::vector<ExecutionLogEntry> *log) {
  std::vector<std::unique_ptr<NeuralScorer>> owned;
  std::map<int, const RerankScorer *> scorers;
  for (const auto &[fold_id, training] : folds) {
    owned.push_back(std::make_unique<NeuralScorer>(inputs, training.weights));
    scorers[fold_id] = owned.back().get();
  }
  FoldScorer scorer(collection, scorers);
  Run subset;
  subset.tag = run.tag;
  for (const auto &[qid, entries] : run.queries) {
    std::optional<int> fold = collection.TestFoldOf(qid);
    if (!fold || !folds.count(*fold)) continue;
    subset.queries[qid] = entries;
    if (log) log->push_back({*fold, "eval", qid});
  }
  return Rerank(subset, collection, scorer, depth, std::move(tag));
}

void CheckFoldIsolation(std::span<const ExecutionLogEntry> log) {
  std::map<int, std::set<std::string>> trained;
  for (const ExecutionLogEntry &e : log) {
    if (e.phase == "train") trained[e.fold].insert(e.query_id);
  }
  for (const ExecutionLogEntry &e : log) {
    if (e.phase == "eval" && trained[e.fold].count(e.query_id)) {
      throw Error(ErrorCode::kInvalid,
                  "fold " + std::to_string(e.fold) + " evaluated training query " +
                      e.query_id,
                  e.query_id);
    }
  }
}

}  // namespace entrank
