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

#include "entrank/retrieval.h"

#include <algorithm>
#include <cmath>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

namespace {

double TermWeight(double idf, int tf, int dl, double avgdl,
                  const Bm25Params &p) {
  const double norm = p.k * (1.0 - p.b + p.b * dl / avgdl);
  return idf * tf * (p.k + 1.0) / (tf + norm);
}

}  // namespace

std::optional<uint32_t> InvertedIndex::DocIndex(std::string_view doc_id) const {
  auto it = doc_index_.find(std::string(doc_id));
  if (it == doc_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<Posting> *InvertedIndex::Postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  return it == postings_.end() ? nullptr : &it->second;
}

int InvertedIndex::DocFrequency(std::string_view term) const {
  const std::vector<Posting> *p = Postings(term);
  return p ? static_cast<int>(p->size()) : 0;
}

int InvertedIndex::DocLength(std::string_view doc_id) const {
  std::optional<uint32_t> i = DocIndex(doc_id);
  if (!i) {
    throw Error(ErrorCode::kUnknownDoc, "document not in index: " + std::string(doc_id),
                std::string(doc_id));
  }
  return doc_lengths_[*i];
}

int InvertedIndex::TermFrequency(std::string_view term, uint32_t doc) const {
  const std::vector<Posting> *p = Postings(term);
  if (p == nullptr) return 0;
  auto it = std::lower_bound(p->begin(), p->end(), doc,
                             [](const Posting &a, uint32_t d) { return a.doc < d; });
  return it != p->end() && it->doc == doc ? it->tf : 0;
}

void InvertedIndex::Finish() {
  doc_index_.clear();
  for (uint32_t i = 0; i < doc_ids_.size(); ++i) {
    if (!doc_index_.emplace(doc_ids_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate doc_id " + doc_ids_[i],
                  doc_ids_[i]);
    }
  }
  double total = 0.0;
  for (int len : doc_lengths_) total += len;
  avgdl_ = doc_ids_.empty() ? 0.0 : total / static_cast<double>(doc_ids_.size());
}

InvertedIndex BuildIndex(std::span<const Document> docs) {
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents to index");
  std::vector<const Document *> sorted;
  for (const Document &d : docs) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const Document *a, const Document *b) { return a->doc_id < b->doc_id; });
  InvertedIndex index;
  for (uint32_t i = 0; i < sorted.size(); ++i) {
    index.doc_ids_.push_back(sorted[i]->doc_id);
    std::vector<std::string> words = QueryTerms(sorted[i]->text);
    index.doc_lengths_.push_back(static_cast<int>(words.size()));
    std::map<std::string, int> tf;
    for (std::string &w : words) ++tf[std::move(w)];
    for (auto &[term, count] : tf) index.postings_[term].push_back({i, count});
  }
  index.Finish();
  return index;
}

std::vector<std::string> QueryTerms(std::string_view text) {
  return Words(NormalizeText(text));
}

double Idf(const InvertedIndex &index, std::string_view term) {
  const double n = static_cast<double>(index.num_docs());
  const double df = index.DocFrequency(term);
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Bm25Score(const InvertedIndex &index,
                 std::span<const std::string> query_terms,
                 std::string_view doc_id, const Bm25Params &params) {
  const int dl = index.DocLength(doc_id);
  const uint32_t doc = *index.DocIndex(doc_id);
  double score = 0.0;
  for (const std::string &term : query_terms) {
    const int tf = index.TermFrequency(term, doc);
    if (tf == 0) continue;
    score += TermWeight(Idf(index, term), tf, dl, index.avgdl(), params);
  }
  return score;
}

std::vector<ScoredDoc> Search(const InvertedIndex &index,
                              std::span<const std::string> query_terms,
                              int k_top, const Bm25Params &params) {
  if (k_top < 1) throw Error(ErrorCode::kConfig, "k_top must be at least 1");
  std::vector<double> acc(index.num_docs(), 0.0);
  // Term-at-a-time in query order, so each document sees the same sequence
  // of additions as Bm25Score.
  for (const std::string &term : query_terms) {
    const std::vector<Posting> *postings = index.Postings(term);
    if (postings == nullptr) continue;
    const double idf = Idf(index, term);
    for (const Posting &p : *postings) {
      acc[p.doc] += TermWeight(idf, p.tf, index.doc_lengths()[p.doc],
                               index.avgdl(), params);
    }
  }
  std::vector<uint32_t> order(acc.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  // Document indices follow doc_id order, so index order breaks ties.
  auto better = [&](uint32_t a, uint32_t b) {
    return acc[a] != acc[b] ? acc[a] > acc[b] : a < b;
  };
  const size_t keep = std::min<size_t>(static_cast<size_t>(k_top), order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);
  std::vector<ScoredDoc> out;
  out.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    out.push_back({index.doc_ids()[order[i]], acc[order[i]]});
  }
  return out;
}

std::string InvertedIndex::Serialize() const {
  std::string out = "entrank-index\t1\n";
  out += "docs\t" + std::to_string(doc_ids_.size()) + "\n";
  for (size_t i = 0; i < doc_ids_.size(); ++i) {
    out += doc_ids_[i] + "\t" + std::to_string(doc_lengths_[i]) + "\n";
  }
  out += "terms\t" + std::to_string(postings_.size()) + "\n";
  for (const auto &[term, list] : postings_) {
    out += term;
    for (const Posting &p : list) {
      out += '\t' + std::to_string(p.doc) + ':' + std::to_string(p.tf);
    }
    out += '\n';
  }
  return out;
}

InvertedIndex InvertedIndex::Parse(const std::string &content,
                                   const std::string &origin) {
  std::vector<std::string_view> lines = SplitOn(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  size_t at = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    if (at >= lines.size()) throw ParseError(origin, at + 1, "unexpected end of file");
    return SplitOn(lines[at++], '\t');
  };
  auto count = [&](std::string_view key) {
    auto f = next();
    if (f.size() != 2 || f[0] != key) throw ParseError(origin, at, "expected " + std::string(key));
    return static_cast<size_t>(ParseInt(f[1]));
  };
  auto header = next();
  if (header.size() != 2 || header[0] != "entrank-index" || header[1] != "1") {
    throw ParseError(origin, 1, "not an index file");
  }
  InvertedIndex index;
  try {
    const size_t n = count("docs");
    for (size_t i = 0; i < n; ++i) {
      auto f = next();
      if (f.size() != 2) throw ParseError(origin, at, "expected doc_id<TAB>length");
      index.doc_ids_.emplace_back(f[0]);
      index.doc_lengths_.push_back(static_cast<int>(ParseInt(f[1])));
    }
    const size_t terms = count("terms");
    for (size_t t = 0; t < terms; ++t) {
      auto f = next();
      if (f.size() < 2) throw ParseError(origin, at, "term without postings");
      std::vector<Posting> &list = index.postings_[std::string(f[0])];
      for (size_t j = 1; j < f.size(); ++j) {
        const size_t colon = f[j].find(':');
        if (colon == std::string_view::npos) throw ParseError(origin, at, "bad posting");
        const long long doc = ParseInt(f[j].substr(0, colon));
        if (doc < 0 || static_cast<size_t>(doc) >= n ||
            (!list.empty() && list.back().doc >= doc)) {
          throw ParseError(origin, at, "posting out of order or range");
        }
        list.push_back({static_cast<uint32_t>(doc),
                        static_cast<int>(ParseInt(f[j].substr(colon + 1)))});
      }
    }
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kParse && e.line() > 0) throw;
    throw ParseError(origin, at, e.what());
  }
  if (!std::is_sorted(index.doc_ids_.begin(), index.doc_ids_.end())) {
    throw ParseError(origin, 3, "documents are not sorted by id");
  }
  index.Finish();
  return index;
}

InvertedIndex InvertedIndex::Load(const std::string &path) {
  return Parse(ReadFile(path), path);
}

}  // namespace entrank
