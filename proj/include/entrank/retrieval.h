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

#ifndef ENTRANK_RETRIEVAL_H_
#define ENTRANK_RETRIEVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrank/corpus.h"

namespace entrank {

struct Posting {
  uint32_t doc = 0;  // index into InvertedIndex::doc_ids()
  int tf = 0;
  bool operator==(const Posting &) const = default;
};

// Word-level inverted index. Documents are kept sorted by id, so postings
// ordered by document index are also ordered by doc_id.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  size_t num_docs() const { return doc_ids_.size(); }
  double avgdl() const { return avgdl_; }
  const std::vector<std::string> &doc_ids() const { return doc_ids_; }
  const std::vector<int> &doc_lengths() const { return doc_lengths_; }
  const std::map<std::string, std::vector<Posting>> &postings() const {
    return postings_;
  }

  std::optional<uint32_t> DocIndex(std::string_view doc_id) const;
  // nullptr for unseen terms.
  const std::vector<Posting> *Postings(std::string_view term) const;
  int DocFrequency(std::string_view term) const;
  // Throws UnknownDoc.
  int DocLength(std::string_view doc_id) const;
  int TermFrequency(std::string_view term, uint32_t doc) const;

  std::string Serialize() const;
  static InvertedIndex Parse(const std::string &content, const std::string &origin);
  static InvertedIndex Load(const std::string &path);

  bool operator==(const InvertedIndex &other) const {
    return doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ &&
           postings_ == other.postings_ && avgdl_ == other.avgdl_;
  }

 private:
  friend InvertedIndex BuildIndex(std::span<const Document> docs);
  void Finish();

  std::vector<std::string> doc_ids_;
  std::vector<int> doc_lengths_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<std::string, uint32_t> doc_index_;
  double avgdl_ = 0.0;
};

// Indexes normalized word tokens (whitespace split, punctuation as separate
// words). No stemming or stopping. Throws EmptyCorpus and DuplicateId.
InvertedIndex BuildIndex(std::span<const Document> docs);

// Terms a query contributes: the same word split the index uses.
std::vector<std::string> QueryTerms(std::string_view text);

struct Bm25Params {
  double k = 0.9;
  double b = 0.4;
};

// ln((N - df + 0.5) / (df + 0.5) + 1); never negative.
double Idf(const InvertedIndex &index, std::string_view term);

// Sum over query terms (duplicates count again). Throws UnknownDoc.
double Bm25Score(const InvertedIndex &index,
                 std::span<const std::string> query_terms,
                 std::string_view doc_id, const Bm25Params &params = {});

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  bool operator==(const ScoredDoc &) const = default;
};

// Every document is scored (zero scores included); descending score, ties
// by ascending doc_id, truncated to k_top. Throws ConfigError if k_top < 1.
std::vector<ScoredDoc> Search(const InvertedIndex &index,
                              std::span<const std::string> query_terms,
                              int k_top, const Bm25Params &params = {});

}  // namespace entrank

#endif  // ENTRANK_RETRIEVAL_H_
