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

#ifndef ENTRANK_SYNTHETIC_H_
#define ENTRANK_SYNTHETIC_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "entrank/corpus.h"
#include "entrank/pipeline.h"
#include "entrank/tokenizer.h"

namespace entrank {

// A small entity-retrieval world. Every entity has an abstract about one
// topic. Half of each topic's entities are "notable" and link densely to
// other notable entities, so notability is visible in the knowledge graph
// but not in any text. Clusters of linked entities, which mention each other
// in their abstracts, form within one kind and within one block of topics:
// each fold's evaluation topics are a block, the training topics another. Rare
// entities (whole topics of them) are written with two different
// multi-piece aliases, one in their own abstract and one elsewhere and in
// queries; common entities use one single-piece alias everywhere.
//
// Evaluation queries name a notable entity of an evaluation topic; the
// entity's abstract is grade 2, the other notable abstracts of the topic and
// the abstracts of cluster mates are grade 1, the rest of the topic is
// grade 0. Stage-1 triples come from the remaining topics only, and folds
// group queries by topic.
struct SyntheticConfig {
  int n_topics = 20;
  int docs_per_topic = 10;
  int cluster_size = 5;
  int eval_topics = 10;       // half rare, half common
  int queries_per_topic = 4;  // 40 evaluation queries by default
  int n_folds = 5;
  int words_per_topic = 4;
  int filler_words = 40;
  int cross_links = 60;  // extra links to same-kind entities outside the cluster
  int negatives_per_triple = 2;
  uint64_t seed = 1;
};

struct SyntheticWorld {
  Collection collection;  // abstracts, eval queries, qrels, annotations, folds
  KnowledgeGraph graph;
  Vocabulary vocab;        // word pieces only
  std::vector<Triple> triples;  // stage-1 training triples
  std::map<std::string, int> cluster_of;
  std::set<std::string> split_queries;  // eval queries with a rare mention
  std::set<std::string> notable;        // notable entity ids
  std::vector<std::string> corpus;      // abstract texts
};

SyntheticWorld GenerateWorld(const SyntheticConfig &config);

// File names used by WriteWorld.
struct WorldFiles {
  static constexpr const char *kDocuments = "documents.tsv";
  static constexpr const char *kQueries = "queries.tsv";
  static constexpr const char *kQrels = "qrels.txt";
  static constexpr const char *kAnnotations = "annotations.tsv";
  static constexpr const char *kFolds = "folds.tsv";
  static constexpr const char *kGraph = "graph.txt";
  static constexpr const char *kVocab = "vocab.txt";
  static constexpr const char *kTriples = "triples.tsv";
};

// Writes every artifact of the world into an existing directory.
void WriteWorld(const SyntheticWorld &world, const std::string &dir);
CollectionPaths WorldCollectionPaths(const std::string &dir);

}  // namespace entrank

#endif  // ENTRANK_SYNTHETIC_H_
