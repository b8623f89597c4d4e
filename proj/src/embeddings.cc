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

#include "entrank/embeddings.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "entrank/status.h"
#include "entrank/text.h"
#include "entrank/tokenizer.h"

namespace entrank {

namespace {

double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double Dot(const double *a, const double *b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::string_view EntityKey(std::string_view key) {
  return key.substr(kEntityPrefix.size());
}

}  // namespace

void EmbeddingConfig::Validate() const {
  if (dim <= 0 || window <= 0 || negatives <= 0 || epochs < 0 ||
      learning_rate <= 0 || min_count < 0) {
    throw Error(ErrorCode::kConfig,
                "embedding config needs dim, window, negatives, learning rate "
                "> 0 and epochs, min_count >= 0");
  }
}

JointEmbeddingTable::JointEmbeddingTable(int dim, std::vector<std::string> words,
                                         std::vector<std::string> entities,
                                         std::vector<double> word_vectors,
                                         std::vector<double> entity_vectors)
    : dim_(dim),
      words_(std::move(words)),
      entities_(std::move(entities)),
      word_vectors_(std::move(word_vectors)),
      entity_vectors_(std::move(entity_vectors)) {
  if (dim_ <= 0 || word_vectors_.size() != words_.size() * dim_ ||
      entity_vectors_.size() != entities_.size() * dim_) {
    throw Error(ErrorCode::kInvalid, "embedding table shape mismatch");
  }
  for (size_t i = 0; i < words_.size(); ++i) {
    if (!word_index_.emplace(words_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate word " + words_[i],
                  words_[i]);
    }
  }
  for (size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_index_.emplace(entities_[i], i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate entity " + entities_[i],
                  entities_[i]);
    }
  }
}

std::optional<size_t> JointEmbeddingTable::WordIndex(std::string_view w) const {
  auto it = word_index_.find(std::string(w));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> JointEmbeddingTable::EntityIndex(
    std::string_view e) const {
  auto it = entity_index_.find(std::string(e));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

bool JointEmbeddingTable::Contains(std::string_view key) const {
  if (key.starts_with(kEntityPrefix)) {
    return EntityIndex(EntityKey(key)).has_value();
  }
  return WordIndex(key).has_value();
}

std::span<const double> JointEmbeddingTable::Vector(std::string_view key) const {
  if (key.starts_with(kEntityPrefix)) {
    if (auto i = EntityIndex(EntityKey(key))) return EntityVector(*i);
  } else if (auto i = WordIndex(key)) {
    return WordVector(*i);
  }
  throw Error(ErrorCode::kUnknownKey, "no vector for '" + std::string(key) + "'",
              std::string(key));
}

std::vector<std::string> JointEmbeddingTable::Keys() const {
  std::vector<std::string> keys = words_;
  for (const std::string &e : entities_) {
    keys.push_back(std::string(kEntityPrefix) + e);
  }
  return keys;
}

std::string JointEmbeddingTable::Serialize() const {
  std::string out = std::to_string(dim_) + "\t" + std::to_string(words_.size()) +
                    "\t" + std::to_string(entities_.size()) + "\n";
  auto row = [&](const std::string &key, std::span<const double> v) {
    out += key;
    out += '\t';
    for (size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out += ' ';
      out += FormatDouble(v[i]);
    }
    out += '\n';
  };
  for (size_t i = 0; i < words_.size(); ++i) row(words_[i], WordVector(i));
  for (size_t i = 0; i < entities_.size(); ++i) {
    row(std::string(kEntityPrefix) + entities_[i], EntityVector(i));
  }
  return out;
}

JointEmbeddingTable JointEmbeddingTable::Load(const std::string &path) {
  std::vector<std::string> lines = ReadLines(path);
  if (lines.empty()) throw ParseError(path, 1, "missing header");
  auto header = SplitOn(lines[0], '\t');
  if (header.size() != 3) throw ParseError(path, 1, "expected dim, words, entities");
  int dim;
  size_t n_words, n_entities;
  try {
    dim = static_cast<int>(ParseInt(header[0]));
    n_words = static_cast<size_t>(ParseInt(header[1]));
    n_entities = static_cast<size_t>(ParseInt(header[2]));
  } catch (const Error &) {
    throw ParseError(path, 1, "header fields must be integers");
  }
  if (lines.size() != 1 + n_words + n_entities) {
    throw ParseError(path, lines.size(), "row count does not match header");
  }
  std::vector<std::string> words, entities;
  std::vector<double> wv, ev;
  for (size_t i = 1; i < lines.size(); ++i) {
    auto f = SplitOn(lines[i], '\t');
    if (f.size() != 2) throw ParseError(path, i + 1, "expected key<TAB>vector");
    auto values = SplitWhitespace(f[1]);
    if (values.size() != static_cast<size_t>(dim)) {
      throw ParseError(path, i + 1, "vector length differs from dim");
    }
    bool entity = i > n_words;
    if (entity != f[0].starts_with(kEntityPrefix)) {
      throw ParseError(path, i + 1, "word/entity section mismatch");
    }
    auto &dst = entity ? ev : wv;
    for (std::string_view v : values) {
      try {
        dst.push_back(ParseDouble(v));
      } catch (const Error &) {
        throw ParseError(path, i + 1, "bad vector component");
      }
    }
    if (entity) {
      entities.emplace_back(EntityKey(f[0]));
    } else {
      words.emplace_back(f[0]);
    }
  }
  return JointEmbeddingTable(dim, std::move(words), std::move(entities),
                             std::move(wv), std::move(ev));
}

// ---------------------------------------------------------------------------

class EmbeddingTrainer {
 public:
  enum Objective : uint8_t { kWord = 0, kEntity = 1, kAnchor = 2 };
  struct Pair {
    Objective objective;
    uint32_t input;
    uint32_t target;
  };

  EmbeddingTrainer(std::span<const std::string> corpus,
                   const KnowledgeGraph &graph, const EmbeddingConfig &config)
      : config_(config), rng_(config.seed) {
    config.Validate();
    std::vector<std::vector<std::string>> sentences;
    std::map<std::string, long long> counts;
    for (const std::string &text : corpus) {
      sentences.push_back(Words(NormalizeText(text)));
      for (const std::string &w : sentences.back()) ++counts[w];
    }
    for (const Anchor &a : graph.anchors()) {
      for (const std::string &w : a.context) ++counts[w];
    }
    std::vector<std::string> words;
    for (const auto &[w, c] : counts) {
      if (c >= config.min_count) words.push_back(w);
    }
    if (words.empty()) {
      throw Error(ErrorCode::kEmptyCorpus, "embedding corpus has no words");
    }

    const int dim = config.dim;
    std::uniform_real_distribution<double> init(-0.5 / dim, 0.5 / dim);
    std::vector<double> wv(words.size() * dim), ev(graph.entities().size() * dim);
    for (double &x : wv) x = init(rng_);
    for (double &x : ev) x = init(rng_);
    table_ = JointEmbeddingTable(dim, std::move(words), graph.entities(),
                                 std::move(wv), std::move(ev));
    table_.word_context_.assign(table_.word_vectors_.size(), 0.0);
    table_.entity_context_.assign(table_.entity_vectors_.size(), 0.0);

    for (const auto &sentence : sentences) {
      std::vector<uint32_t> ids;
      for (const std::string &w : sentence) {
        if (auto i = table_.WordIndex(w)) ids.push_back(static_cast<uint32_t>(*i));
      }
      const long n = static_cast<long>(ids.size());
      for (long i = 0; i < n; ++i) {
        for (long j = std::max(0L, i - config.window);
             j <= std::min(n - 1, i + config.window); ++j) {
          if (j != i) pairs_.push_back({kWord, ids[i], ids[j]});
        }
      }
    }
    for (const auto &[src, dst] : graph.links()) {
      auto a = static_cast<uint32_t>(*table_.EntityIndex(src));
      auto b = static_cast<uint32_t>(*table_.EntityIndex(dst));
      pairs_.push_back({kEntity, a, b});
      pairs_.push_back({kEntity, b, a});
    }
    for (const Anchor &anchor : graph.anchors()) {
      auto e = static_cast<uint32_t>(*table_.EntityIndex(anchor.entity_id));
      for (const std::string &w : anchor.context) {
        if (auto i = table_.WordIndex(w)) {
          pairs_.push_back({kAnchor, e, static_cast<uint32_t>(*i)});
        }
      }
    }
  }

  EmbeddingResult Run() {
    EmbeddingResult result;
    const double total_steps =
        static_cast<double>(pairs_.size()) * std::max(config_.epochs, 1);
    long long step = 0;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      std::shuffle(pairs_.begin(), pairs_.end(), rng_);
      double loss[3] = {0, 0, 0};
      long long count[3] = {0, 0, 0};
      for (const Pair &p : pairs_) {
        double alpha = config_.learning_rate *
                       std::max(1e-4, 1.0 - static_cast<double>(step++) / total_steps);
        loss[p.objective] += Update(p, alpha);
        ++count[p.objective];
      }
      std::vector<double> *traces[3] = {&result.trace.word, &result.trace.entity,
                                        &result.trace.anchor};
      for (int o = 0; o < 3; ++o) {
        if (count[o] > 0) traces[o]->push_back(loss[o] / count[o]);
      }
    }
    result.table = std::move(table_);
    return result;
  }

 private:
  // One SGD step on a positive pair and its negatives; returns the loss
  // measured before the update.
  double Update(const Pair &p, double alpha) {
    const int dim = config_.dim;
    double *input = p.objective == kWord
                        ? &table_.word_vectors_[p.input * dim]
                        : &table_.entity_vectors_[p.input * dim];
    std::vector<double> &context =
        p.objective == kEntity ? table_.entity_context_ : table_.word_context_;
    const uint32_t n_targets =
        static_cast<uint32_t>(context.size() / static_cast<size_t>(dim));
    std::uniform_int_distribution<uint32_t> pick(0, n_targets - 1);

    grad_.assign(dim, 0.0);
    double loss = 0.0;
    for (int k = 0; k <= config_.negatives; ++k) {
      uint32_t target = p.target;
      double label = 1.0;
      if (k > 0) {
        target = pick(rng_);
        if (target == p.target) continue;
        label = 0.0;
      }
      double *out = &context[static_cast<size_t>(target) * dim];
      double score = Dot(input, out, dim);
      loss -= label > 0 ? LogSigmoid(score) : LogSigmoid(-score);
      double g = (label - Sigmoid(score)) * alpha;
      for (int i = 0; i < dim; ++i) grad_[i] += g * out[i];
      for (int i = 0; i < dim; ++i) out[i] += g * input[i];
    }
    for (int i = 0; i < dim; ++i) input[i] += grad_[i];
    return loss;
  }

  EmbeddingConfig config_;
  std::mt19937_64 rng_;
  JointEmbeddingTable table_;
  std::vector<Pair> pairs_;
  std::vector<double> grad_;
};

EmbeddingResult TrainJointEmbeddings(std::span<const std::string> corpus,
                                     const KnowledgeGraph &graph,
                                     const EmbeddingConfig &config) {
  EmbeddingTrainer trainer(corpus, graph, config);
  return trainer.Run();
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double Similarity(const JointEmbeddingTable &table, std::string_view key_a,
                  std::string_view key_b) {
  return Cosine(table.Vector(key_a), table.Vector(key_b));
}

std::vector<std::pair<std::string, double>> Neighbors(
    const JointEmbeddingTable &table, std::string_view key, int k) {
  if (k < 1) throw Error(ErrorCode::kConfig, "neighbors needs k >= 1");
  std::span<const double> query = table.Vector(key);
  std::vector<std::pair<std::string, double>> ranked;
  for (std::string &other : table.Keys()) {
    if (other == key) continue;
    double c = Cosine(query, table.Vector(other));
    ranked.emplace_back(std::move(other), c);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<size_t>(k)) ranked.resize(k);
  return ranked;
}

}  // namespace entrank
