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

#ifndef ENTRANK_CORPUS_H_
#define ENTRANK_CORPUS_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace entrank {

enum class QueryType { kSemSearch, kInexLd, kListSearch, kQald2, kOther };

inline constexpr QueryType kAllQueryTypes[] = {
    QueryType::kSemSearch, QueryType::kInexLd, QueryType::kListSearch,
    QueryType::kQald2, QueryType::kOther};

std::string_view QueryTypeName(QueryType type);
std::optional<QueryType> ParseQueryType(std::string_view name);
// Benchmark-style ids ("INEX_LD-2009022", "QALD2_te-5", ...).
QueryType InferQueryType(std::string_view query_id);

struct Document {
  std::string doc_id;
  std::string text;
};

struct Query {
  std::string query_id;
  std::string text;
  QueryType query_type = QueryType::kOther;
  // True when the type came from an explicit third column.
  bool type_given = false;
};

struct Qrel {
  std::string query_id;
  std::string doc_id;
  int grade = 0;
};

// [char_start, char_end) are byte offsets into the owner's normalized text.
struct Annotation {
  std::string owner_id;
  size_t char_start = 0;
  size_t char_end = 0;
  std::string mention;
  std::string entity_id;
};

struct Anchor {
  std::string entity_id;
  std::vector<std::string> context;
};

struct FoldAssignment {
  int fold_id = 0;
  std::string query_id;
  bool test = false;
};

struct FoldSpec {
  int fold_id = 0;
  std::set<std::string> train_query_ids;
  std::set<std::string> test_query_ids;
};

inline constexpr int kMaxFolds = 5;

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  // Throws DuplicateId for repeated entities, DanglingLink for link or anchor
  // endpoints that are not declared entities.
  KnowledgeGraph(std::vector<std::string> entities,
                 std::vector<std::pair<std::string, std::string>> links,
                 std::vector<Anchor> anchors);

  const std::vector<std::string> &entities() const { return entities_; }
  const std::vector<std::pair<std::string, std::string>> &links() const {
    return links_;
  }
  const std::vector<Anchor> &anchors() const { return anchors_; }
  bool contains(std::string_view entity_id) const {
    return index_.count(std::string(entity_id)) > 0;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::pair<std::string, std::string>> links_;
  std::vector<Anchor> anchors_;
  std::unordered_set<std::string> index_;
};

KnowledgeGraph LoadGraph(const std::string &path);
std::string SerializeGraph(const KnowledgeGraph &graph);

// Immutable after construction. The constructor enforces every type
// invariant except cross-references to the knowledge graph and qrels that
// point at unknown ids; those are reported by Validate().
class Collection {
 public:
  Collection() = default;
  Collection(std::vector<Document> documents, std::vector<Query> queries,
             std::vector<Qrel> qrels, std::vector<Annotation> annotations,
             std::vector<FoldAssignment> fold_assignments = {});

  const std::vector<Document> &documents() const { return documents_; }
  const std::vector<Query> &queries() const { return queries_; }
  const std::vector<Qrel> &qrels() const { return qrels_; }
  const std::vector<Annotation> &annotations() const { return annotations_; }
  const std::vector<FoldAssignment> &fold_assignments() const {
    return fold_assignments_;
  }
  const std::vector<FoldSpec> &folds() const { return folds_; }

  const Document *FindDocument(std::string_view doc_id) const;
  const Query *FindQuery(std::string_view query_id) const;
  // Text of a query or document.
  std::optional<std::string_view> OwnerText(std::string_view owner_id) const;
  // Annotations of one owner, in file order.
  std::vector<Annotation> AnnotationsFor(std::string_view owner_id) const;
  // doc_id -> grade for one query, nullptr when the query has no judgments.
  const std::map<std::string, int> *Judgments(std::string_view query_id) const;
  // Fold whose test set contains the query, if any.
  std::optional<int> TestFoldOf(std::string_view query_id) const;

 private:
  std::vector<Document> documents_;
  std::vector<Query> queries_;
  std::vector<Qrel> qrels_;
  std::vector<Annotation> annotations_;
  std::vector<FoldAssignment> fold_assignments_;
  std::vector<FoldSpec> folds_;
  std::unordered_map<std::string, size_t> doc_index_;
  std::unordered_map<std::string, size_t> query_index_;
  std::unordered_map<std::string, std::vector<size_t>> annotations_by_owner_;
  std::unordered_map<std::string, std::map<std::string, int>> judgments_;
};

struct CollectionPaths {
  std::string documents;
  std::string queries;
  std::string qrels;
  std::string annotations;  // optional
  std::string folds;        // optional
};

Collection LoadCollection(const CollectionPaths &paths);

std::vector<Document> LoadDocuments(const std::string &path);
std::vector<Query> LoadQueries(const std::string &path);
std::vector<Qrel> LoadQrels(const std::string &path);

std::string SerializeDocuments(const std::vector<Document> &documents);
std::string SerializeQueries(const std::vector<Query> &queries);
std::string SerializeQrels(const std::vector<Qrel> &qrels);
std::string SerializeAnnotations(const std::vector<Annotation> &annotations);
std::string SerializeFolds(const std::vector<FoldAssignment> &folds);

// Writes every file of the collection that has a non-empty path.
void SaveCollection(const Collection &collection, const CollectionPaths &paths);

struct ValidationReport {
  std::vector<Annotation> unknown_entities;
  std::vector<Qrel> dangling_qrels;
  std::vector<std::string> unannotated_queries;
  // Pairs sharing a character where neither contains the other.
  std::vector<std::pair<Annotation, Annotation>> overlapping_annotations;

  bool empty() const {
    return unknown_entities.empty() && dangling_qrels.empty() &&
           unannotated_queries.empty() && overlapping_annotations.empty();
  }
  std::string ToTsv() const;
};

ValidationReport Validate(const Collection &collection,
                          const KnowledgeGraph &graph);

bool AnnotationsCross(const Annotation &a, const Annotation &b);

}  // namespace entrank

#endif  // ENTRANK_CORPUS_H_
