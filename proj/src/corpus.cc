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

#include "entrank/corpus.h"

#include <algorithm>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

namespace {

Error Duplicate(std::string_view what, const std::string &id,
                std::string_view path = {}, size_t line = 0) {
  std::string msg = "duplicate " + std::string(what) + " '" + id + "'";
  if (!path.empty()) msg += " at " + std::string(path) + ":" + std::to_string(line);
  return Error(ErrorCode::kDuplicateId, msg, id, line);
}

// Returns an explanation when the annotation does not fit its owner text.
std::optional<std::string> CheckAnnotationSpan(const Annotation &a,
                                               std::string_view text) {
  if (a.char_start >= a.char_end) return "empty or inverted span";
  if (a.char_end > text.size()) {
    return "span end " + std::to_string(a.char_end) + " exceeds text length " +
           std::to_string(text.size());
  }
  std::string_view slice = text.substr(a.char_start, a.char_end - a.char_start);
  if (NormalizeText(slice) != a.mention) {
    return "mention '" + a.mention + "' does not match text '" +
           std::string(slice) + "'";
  }
  return std::nullopt;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

std::string_view QueryTypeName(QueryType type) {
  switch (type) {
    case QueryType::kSemSearch: return "SemSearch";
    case QueryType::kInexLd: return "INEX-LD";
    case QueryType::kListSearch: return "ListSearch";
    case QueryType::kQald2: return "QALD-2";
    case QueryType::kOther: return "Other";
  }
  return "Other";
}

std::optional<QueryType> ParseQueryType(std::string_view name) {
  for (QueryType t : kAllQueryTypes) {
    if (QueryTypeName(t) == name) return t;
  }
  return std::nullopt;
}

QueryType InferQueryType(std::string_view id) {
  if (id.starts_with("SemSearch_ES")) return QueryType::kSemSearch;
  if (id.starts_with("INEX_LD")) return QueryType::kInexLd;
  if (id.starts_with("SemSearch_LS") || id.starts_with("INEX_XER") ||
      id.starts_with("TREC_Entity")) {
    return QueryType::kListSearch;
  }
  if (id.starts_with("QALD2")) return QueryType::kQald2;
  return QueryType::kOther;
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph::KnowledgeGraph(
    std::vector<std::string> entities,
    std::vector<std::pair<std::string, std::string>> links,
    std::vector<Anchor> anchors)
    : entities_(std::move(entities)),
      links_(std::move(links)),
      anchors_(std::move(anchors)) {
  for (const std::string &e : entities_) {
    if (!index_.insert(e).second) throw Duplicate("entity", e);
  }
  for (const auto &[src, dst] : links_) {
    for (const std::string *end : {&src, &dst}) {
      if (!contains(*end)) {
        throw Error(ErrorCode::kDanglingLink,
                    "link endpoint '" + *end + "' is not a declared entity",
                    *end);
      }
    }
  }
  for (const Anchor &a : anchors_) {
    if (!contains(a.entity_id)) {
      throw Error(ErrorCode::kDanglingLink,
                  "anchor entity '" + a.entity_id + "' is not declared",
                  a.entity_id);
    }
  }
}

KnowledgeGraph LoadGraph(const std::string &path) {
  enum class Section { kNone, kEntities, kLinks, kAnchors };
  Section section = Section::kNone;
  std::vector<std::string> entities;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<Anchor> anchors;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    size_t lineno = i + 1;
    if (line == "#entities") { section = Section::kEntities; continue; }
    if (line == "#links") { section = Section::kLinks; continue; }
    if (line == "#anchors") { section = Section::kAnchors; continue; }
    if (IsBlank(line)) continue;
    switch (section) {
      case Section::kNone:
        throw ParseError(path, lineno, "row outside of any section");
      case Section::kEntities:
        if (line.find('\t') != std::string::npos) {
          throw ParseError(path, lineno, "entity id contains a tab");
        }
        entities.push_back(line);
        break;
      case Section::kLinks: {
        auto f = SplitOn(line, '\t');
        if (f.size() != 2 || f[0].empty() || f[1].empty()) {
          throw ParseError(path, lineno, "expected src<TAB>dst");
        }
        links.emplace_back(std::string(f[0]), std::string(f[1]));
        break;
      }
      case Section::kAnchors: {
        auto f = SplitOn(line, '\t');
        if (f.size() != 2 || f[0].empty()) {
          throw ParseError(path, lineno, "expected entity<TAB>context words");
        }
        Anchor a{std::string(f[0]), {}};
        for (std::string_view w : SplitOn(f[1], ' ')) {
          if (!w.empty()) a.context.push_back(NormalizeText(w));
        }
        anchors.push_back(std::move(a));
        break;
      }
    }
  }
  return KnowledgeGraph(std::move(entities), std::move(links),
                        std::move(anchors));
}

std::string SerializeGraph(const KnowledgeGraph &graph) {
  std::string out = "#entities\n";
  for (const std::string &e : graph.entities()) out += e + "\n";
  out += "#links\n";
  for (const auto &[src, dst] : graph.links()) out += src + "\t" + dst + "\n";
  out += "#anchors\n";
  for (const Anchor &a : graph.anchors()) {
    out += a.entity_id + "\t" + Join(a.context, " ") + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collection

Collection::Collection(std::vector<Document> documents,
                       std::vector<Query> queries, std::vector<Qrel> qrels,
                       std::vector<Annotation> annotations,
                       std::vector<FoldAssignment> fold_assignments)
    : documents_(std::move(documents)),
      queries_(std::move(queries)),
      qrels_(std::move(qrels)),
      annotations_(std::move(annotations)),
      fold_assignments_(std::move(fold_assignments)) {
  for (size_t i = 0; i < documents_.size(); ++i) {
    const Document &d = documents_[i];
    if (d.text.empty()) {
      throw Error(ErrorCode::kInvalid, "document '" + d.doc_id + "' is empty",
                  d.doc_id);
    }
    if (!doc_index_.emplace(d.doc_id, i).second) {
      throw Duplicate("document", d.doc_id);
    }
  }
  for (size_t i = 0; i < queries_.size(); ++i) {
    if (!query_index_.emplace(queries_[i].query_id, i).second) {
      throw Duplicate("query", queries_[i].query_id);
    }
  }
  for (const Qrel &q : qrels_) {
    if (q.grade < 0 || q.grade > 2) {
      throw Error(ErrorCode::kInvalid, "grade out of range for " + q.query_id,
                  q.query_id);
    }
    if (!judgments_[q.query_id].emplace(q.doc_id, q.grade).second) {
      throw Duplicate("judgment", q.query_id + " " + q.doc_id);
    }
  }
  for (size_t i = 0; i < annotations_.size(); ++i) {
    const Annotation &a = annotations_[i];
    auto text = OwnerText(a.owner_id);
    if (!text) {
      throw Error(ErrorCode::kInvalid,
                  "annotation owner '" + a.owner_id + "' is unknown",
                  a.owner_id);
    }
    if (auto why = CheckAnnotationSpan(a, *text)) {
      throw Error(ErrorCode::kInvalid, "annotation of " + a.owner_id + ": " + *why,
                  a.owner_id);
    }
    annotations_by_owner_[a.owner_id].push_back(i);
  }

  std::map<int, FoldSpec> folds;
  for (const FoldAssignment &f : fold_assignments_) {
    if (f.fold_id < 0 || f.fold_id >= kMaxFolds) {
      throw Error(ErrorCode::kInvalid, "fold id out of range", f.query_id);
    }
    if (!query_index_.count(f.query_id)) {
      throw Error(ErrorCode::kInvalid,
                  "fold references unknown query '" + f.query_id + "'",
                  f.query_id);
    }
    FoldSpec &spec = folds[f.fold_id];
    spec.fold_id = f.fold_id;
    auto &target = f.test ? spec.test_query_ids : spec.train_query_ids;
    if (!target.insert(f.query_id).second) {
      throw Duplicate("fold assignment", f.query_id);
    }
  }
  if (!folds.empty()) {
    std::set<std::string> covered;
    for (auto &[id, spec] : folds) {
      for (const std::string &q : spec.test_query_ids) {
        if (spec.train_query_ids.count(q)) {
          throw Error(ErrorCode::kInvalid,
                      "query '" + q + "' is both train and test in fold " +
                          std::to_string(id),
                      q);
        }
        if (!covered.insert(q).second) {
          throw Error(ErrorCode::kInvalid,
                      "query '" + q + "' is a test query in two folds", q);
        }
      }
      folds_.push_back(spec);
    }
    if (covered.size() != queries_.size()) {
      throw Error(ErrorCode::kInvalid,
                  "fold test sets do not cover every query");
    }
  }
}

const Document *Collection::FindDocument(std::string_view doc_id) const {
  auto it = doc_index_.find(std::string(doc_id));
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

const Query *Collection::FindQuery(std::string_view query_id) const {
  auto it = query_index_.find(std::string(query_id));
  return it == query_index_.end() ? nullptr : &queries_[it->second];
}

std::optional<std::string_view> Collection::OwnerText(
    std::string_view owner_id) const {
  if (const Query *q = FindQuery(owner_id)) return q->text;
  if (const Document *d = FindDocument(owner_id)) return d->text;
  return std::nullopt;
}

std::vector<Annotation> Collection::AnnotationsFor(
    std::string_view owner_id) const {
  std::vector<Annotation> out;
  auto it = annotations_by_owner_.find(std::string(owner_id));
  if (it == annotations_by_owner_.end()) return out;
  for (size_t i : it->second) out.push_back(annotations_[i]);
  return out;
}

const std::map<std::string, int> *Collection::Judgments(
    std::string_view query_id) const {
  auto it = judgments_.find(std::string(query_id));
  return it == judgments_.end() ? nullptr : &it->second;
}

std::optional<int> Collection::TestFoldOf(std::string_view query_id) const {
  for (const FoldSpec &f : folds_) {
    if (f.test_query_ids.count(std::string(query_id))) return f.fold_id;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Loading

std::vector<Document> LoadDocuments(const std::string &path) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto f = SplitOn(lines[i], '\t');
    if (f.size() != 2 || f[0].empty()) {
      throw ParseError(path, i + 1, "expected id<TAB>text");
    }
    std::string id(f[0]);
    std::string text = NormalizeText(f[1]);
    if (text.empty()) throw ParseError(path, i + 1, "empty document text");
    if (!seen.insert(id).second) throw Duplicate("document", id, path, i + 1);
    docs.push_back({std::move(id), std::move(text)});
  }
  return docs;
}

std::vector<Query> LoadQueries(const std::string &path) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto f = SplitOn(lines[i], '\t');
    if ((f.size() != 2 && f.size() != 3) || f[0].empty()) {
      throw ParseError(path, i + 1, "expected id<TAB>text[<TAB>type]");
    }
    Query q;
    q.query_id = std::string(f[0]);
    q.text = NormalizeText(f[1]);
    if (f.size() == 3) {
      auto type = ParseQueryType(f[2]);
      if (!type) {
        throw ParseError(path, i + 1,
                         "unknown query type '" + std::string(f[2]) + "'");
      }
      q.query_type = *type;
      q.type_given = true;
    } else {
      q.query_type = InferQueryType(q.query_id);
    }
    if (!seen.insert(q.query_id).second) {
      throw Duplicate("query", q.query_id, path, i + 1);
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<Qrel> LoadQrels(const std::string &path) {
  std::vector<Qrel> qrels;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto f = SplitWhitespace(lines[i]);
    if (f.size() != 4) {
      throw ParseError(path, i + 1, "expected 'query_id 0 doc_id grade'");
    }
    long long grade;
    try {
      grade = ParseInt(f[3]);
    } catch (const Error &) {
      throw ParseError(path, i + 1, "grade is not an integer");
    }
    if (grade < 0 || grade > 2) {
      throw ParseError(path, i + 1, "grade must be 0, 1 or 2");
    }
    Qrel q{std::string(f[0]), std::string(f[2]), static_cast<int>(grade)};
    if (!seen.emplace(q.query_id, q.doc_id).second) {
      throw Duplicate("judgment", q.query_id + " " + q.doc_id, path, i + 1);
    }
    qrels.push_back(std::move(q));
  }
  return qrels;
}

namespace {

std::vector<Annotation> LoadAnnotations(
    const std::string &path,
    const std::unordered_map<std::string, std::string_view> &owners) {
  std::vector<Annotation> out;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto f = SplitOn(lines[i], '\t');
    if (f.size() != 5 || f[0].empty() || f[4].empty()) {
      throw ParseError(path, i + 1,
                       "expected owner<TAB>start<TAB>end<TAB>mention<TAB>entity");
    }
    Annotation a;
    a.owner_id = std::string(f[0]);
    try {
      long long start = ParseInt(f[1]);
      long long end = ParseInt(f[2]);
      if (start < 0 || end < 0) throw Error(ErrorCode::kParse, "negative");
      a.char_start = static_cast<size_t>(start);
      a.char_end = static_cast<size_t>(end);
    } catch (const Error &) {
      throw ParseError(path, i + 1, "offsets must be non-negative integers");
    }
    a.mention = NormalizeText(f[3]);
    a.entity_id = std::string(f[4]);
    auto owner = owners.find(a.owner_id);
    if (owner == owners.end()) {
      throw ParseError(path, i + 1, "unknown owner '" + a.owner_id + "'");
    }
    if (auto why = CheckAnnotationSpan(a, owner->second)) {
      throw ParseError(path, i + 1, *why);
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<FoldAssignment> LoadFolds(const std::string &path) {
  std::vector<FoldAssignment> out;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto f = SplitOn(lines[i], '\t');
    if (f.size() != 3) {
      throw ParseError(path, i + 1, "expected fold<TAB>query<TAB>train|test");
    }
    FoldAssignment a;
    try {
      a.fold_id = static_cast<int>(ParseInt(f[0]));
    } catch (const Error &) {
      throw ParseError(path, i + 1, "fold id is not an integer");
    }
    if (a.fold_id < 0 || a.fold_id >= kMaxFolds) {
      throw ParseError(path, i + 1, "fold id must be in 0..4");
    }
    a.query_id = std::string(f[1]);
    if (f[2] == "test") {
      a.test = true;
    } else if (f[2] != "train") {
      throw ParseError(path, i + 1, "split must be 'train' or 'test'");
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

Collection LoadCollection(const CollectionPaths &paths) {
  std::vector<Document> docs = LoadDocuments(paths.documents);
  std::vector<Query> queries = LoadQueries(paths.queries);
  std::vector<Qrel> qrels =
      paths.qrels.empty() ? std::vector<Qrel>{} : LoadQrels(paths.qrels);
  std::vector<Annotation> annotations;
  if (!paths.annotations.empty()) {
    std::unordered_map<std::string, std::string_view> owners;
    for (const Document &d : docs) owners.emplace(d.doc_id, d.text);
    for (const Query &q : queries) owners.emplace(q.query_id, q.text);
    annotations = LoadAnnotations(paths.annotations, owners);
  }
  std::vector<FoldAssignment> folds;
  if (!paths.folds.empty()) folds = LoadFolds(paths.folds);
  return Collection(std::move(docs), std::move(queries), std::move(qrels),
                    std::move(annotations), std::move(folds));
}

// ---------------------------------------------------------------------------
// Saving

std::string SerializeDocuments(const std::vector<Document> &documents) {
  std::string out;
  for (const Document &d : documents) out += d.doc_id + "\t" + d.text + "\n";
  return out;
}

std::string SerializeQueries(const std::vector<Query> &queries) {
  std::string out;
  for (const Query &q : queries) {
    out += q.query_id + "\t" + q.text;
    if (q.type_given) out += "\t" + std::string(QueryTypeName(q.query_type));
    out += "\n";
  }
  return out;
}

std::string SerializeQrels(const std::vector<Qrel> &qrels) {
  std::string out;
  for (const Qrel &q : qrels) {
    out += q.query_id + " 0 " + q.doc_id + " " + std::to_string(q.grade) + "\n";
  }
  return out;
}

std::string SerializeAnnotations(const std::vector<Annotation> &annotations) {
  std::string out;
  for (const Annotation &a : annotations) {
    out += a.owner_id + "\t" + std::to_string(a.char_start) + "\t" +
           std::to_string(a.char_end) + "\t" + a.mention + "\t" + a.entity_id +
           "\n";
  }
  return out;
}

std::string SerializeFolds(const std::vector<FoldAssignment> &folds) {
  std::string out;
  for (const FoldAssignment &f : folds) {
    out += std::to_string(f.fold_id) + "\t" + f.query_id + "\t" +
           (f.test ? "test" : "train") + "\n";
  }
  return out;
}

void SaveCollection(const Collection &c, const CollectionPaths &paths) {
  if (!paths.documents.empty()) {
    WriteFile(paths.documents, SerializeDocuments(c.documents()));
  }
  if (!paths.queries.empty()) {
    WriteFile(paths.queries, SerializeQueries(c.queries()));
  }
  if (!paths.qrels.empty()) WriteFile(paths.qrels, SerializeQrels(c.qrels()));
  if (!paths.annotations.empty()) {
    WriteFile(paths.annotations, SerializeAnnotations(c.annotations()));
  }
  if (!paths.folds.empty()) {
    WriteFile(paths.folds, SerializeFolds(c.fold_assignments()));
  }
}

// ---------------------------------------------------------------------------
// Validation

bool AnnotationsCross(const Annotation &a, const Annotation &b) {
  if (a.owner_id != b.owner_id) return false;
  bool share = a.char_start < b.char_end && b.char_start < a.char_end;
  if (!share) return false;
  bool a_in_b = b.char_start <= a.char_start && a.char_end <= b.char_end;
  bool b_in_a = a.char_start <= b.char_start && b.char_end <= a.char_end;
  return !a_in_b && !b_in_a;
}

ValidationReport Validate(const Collection &collection,
                          const KnowledgeGraph &graph) {
  ValidationReport report;
  for (const Annotation &a : collection.annotations()) {
    if (!graph.contains(a.entity_id)) report.unknown_entities.push_back(a);
  }
  for (const Qrel &q : collection.qrels()) {
    if (!collection.FindQuery(q.query_id) ||
        !collection.FindDocument(q.doc_id)) {
      report.dangling_qrels.push_back(q);
    }
  }
  for (const Query &q : collection.queries()) {
    if (collection.AnnotationsFor(q.query_id).empty()) {
      report.unannotated_queries.push_back(q.query_id);
    }
  }
  std::map<std::string, std::vector<const Annotation *>> by_owner;
  for (const Annotation &a : collection.annotations()) {
    by_owner[a.owner_id].push_back(&a);
  }
  for (const auto &[owner, list] : by_owner) {
    for (size_t i = 0; i < list.size(); ++i) {
      for (size_t j = i + 1; j < list.size(); ++j) {
        if (AnnotationsCross(*list[i], *list[j])) {
          report.overlapping_annotations.emplace_back(*list[i], *list[j]);
        }
      }
    }
  }
  return report;
}

std::string ValidationReport::ToTsv() const {
  std::string out = "kind\towner_or_query\tdetail\n";
  for (const Annotation &a : unknown_entities) {
    out += "unknown_entity\t" + a.owner_id + "\t" + a.entity_id + "\n";
  }
  for (const Qrel &q : dangling_qrels) {
    out += "dangling_qrel\t" + q.query_id + "\t" + q.doc_id + "\n";
  }
  for (const std::string &q : unannotated_queries) {
    out += "no_linked_entity\t" + q + "\t-\n";
  }
  for (const auto &[a, b] : overlapping_annotations) {
    out += "overlap\t" + a.owner_id + "\t" + a.entity_id + "," + b.entity_id +
           "\n";
  }
  return out;
}

}  // namespace entrank
