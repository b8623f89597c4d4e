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

#include "entrank/synthetic.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

namespace {

// Rare aliases are built from these syllables; whole-word vocabulary entries
// start with other letters, so a rare alias never matches one as a prefix.
constexpr std::string_view kSyllableConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kWordConsonants = "chjqwxy";

const char *kQueryPrefixes[] = {"SemSearch_ES-", "INEX_LD-", "QALD2_te-",
                                "SemSearch_LS-"};

class Namer {
 public:
  explicit Namer(std::mt19937_64 &rng) : rng_(rng) {}

  std::string Syllable() {
    std::string s;
    s += kSyllableConsonants[Pick(kSyllableConsonants.size())];
    s += kVowels[Pick(kVowels.size())];
    return s;
  }

  // Three syllables, unused before.
  std::string RareAlias() {
    for (;;) {
      std::string w = Syllable() + Syllable() + Syllable();
      if (used_.insert(w).second) return w;
    }
  }

  // Single vocabulary word, unused before.
  std::string Word(int syllables) {
    for (;;) {
      std::string w;
      for (int i = 0; i < syllables; ++i) {
        w += kWordConsonants[Pick(kWordConsonants.size())];
        w += kVowels[Pick(kVowels.size())];
      }
      w += kWordConsonants[Pick(kWordConsonants.size())];
      if (used_.insert(w).second) return w;
    }
  }

  size_t Pick(size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng_);
  }

 private:
  std::mt19937_64 &rng_;
  std::set<std::string> used_;
};

struct Entity {
  std::string id;
  int topic = 0;
  int cluster = 0;
  bool rare = false;
  std::string alias_own;    // used in the entity's own abstract
  std::string alias_other;  // used in other abstracts and in queries
};

// Appends `word` to `text` and returns its byte span.
std::pair<size_t, size_t> AppendWord(std::string *text, const std::string &word) {
  if (!text->empty()) *text += ' ';
  const size_t begin = text->size();
  *text += word;
  return {begin, text->size()};
}

}  // namespace

SyntheticWorld GenerateWorld(const SyntheticConfig &config) {
  const int n = config.n_topics * config.docs_per_topic;
  const int per_kind = config.docs_per_topic / 2;
  const int training_topics = config.n_topics - config.eval_topics;
  if (config.n_topics < 2 || config.docs_per_topic < 4 ||
      config.docs_per_topic % 2 != 0 || config.cluster_size < 2 ||
      config.n_folds < 2 || config.n_folds > kMaxFolds ||
      config.eval_topics < 2 || config.eval_topics % 2 != 0 ||
      training_topics < 1 || (config.eval_topics / 2) % config.n_folds != 0 ||
      (config.eval_topics / config.n_folds * per_kind) % config.cluster_size != 0 ||
      (training_topics * per_kind) % config.cluster_size != 0 ||
      config.queries_per_topic < 1 || config.queries_per_topic > per_kind) {
    throw Error(ErrorCode::kConfig, "inconsistent synthetic world configuration");
  }
  std::mt19937_64 rng(config.seed);
  Namer namer(rng);

  std::vector<std::vector<std::string>> topic_words(config.n_topics);
  for (auto &words : topic_words) {
    for (int i = 0; i < config.words_per_topic; ++i) words.push_back(namer.Word(2));
  }
  std::vector<std::string> filler;
  for (int i = 0; i < config.filler_words; ++i) filler.push_back(namer.Word(1 + i % 2));

  // Topic roles: evaluation topics (half rare, half common) and training
  // topics (likewise).
  std::vector<int> topics(config.n_topics);
  std::iota(topics.begin(), topics.end(), 0);
  std::shuffle(topics.begin(), topics.end(), rng);
  std::vector<int> eval_rare, eval_common;
  std::vector<bool> rare_topic(config.n_topics), eval_topic(config.n_topics);
  for (int i = 0; i < config.n_topics; ++i) {
    const int t = topics[i];
    rare_topic[t] = i % 2 == 0;
    if (i < config.eval_topics) {
      eval_topic[t] = true;
      (rare_topic[t] ? eval_rare : eval_common).push_back(t);
    }
  }

  std::vector<Entity> entities(n);
  std::vector<bool> notable(n);
  for (int t = 0; t < config.n_topics; ++t) {
    std::vector<int> slots(config.docs_per_topic);
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    for (int k = 0; k < per_kind; ++k) notable[slots[k] * config.n_topics + t] = true;
  }
  std::set<std::string> syllables;
  for (int i = 0; i < n; ++i) {
    Entity &e = entities[i];
    char id[16];
    std::snprintf(id, sizeof(id), "E%03d", i);
    e.id = id;
    e.topic = i % config.n_topics;
    e.rare = rare_topic[e.topic];
    if (e.rare) {
      e.alias_own = namer.RareAlias();
      e.alias_other = namer.RareAlias();
      for (const std::string *a : {&e.alias_own, &e.alias_other}) {
        for (size_t k = 0; k < a->size(); k += 2) syllables.insert(a->substr(k, 2));
      }
    } else {
      e.alias_own = e.alias_other = namer.Word(2);
    }
  }

  // Fold f evaluates one rare and one common topic per round; training
  // topics form the last block.
  std::vector<std::vector<int>> fold_topics(config.n_folds);
  for (size_t k = 0; k < eval_rare.size(); ++k) {
    fold_topics[k % config.n_folds].push_back(eval_rare[k]);
    fold_topics[k % config.n_folds].push_back(eval_common[k]);
  }
  std::vector<int> block(config.n_topics, config.n_folds);
  for (int f = 0; f < config.n_folds; ++f) {
    for (int t : fold_topics[f]) block[t] = f;
  }

  // Clusters within each (block, kind) group, mixing topics.
  std::map<int, std::vector<int>> members;
  int next_cluster = 0;
  for (int b = 0; b <= config.n_folds; ++b) {
    for (bool kind : {true, false}) {
      std::vector<int> ids;
      for (int i = 0; i < n; ++i) {
        if (notable[i] == kind && block[entities[i].topic] == b) ids.push_back(i);
      }
      std::shuffle(ids.begin(), ids.end(), rng);
      for (size_t k = 0; k < ids.size(); ++k) {
        const int c = next_cluster + static_cast<int>(k) / config.cluster_size;
        entities[ids[k]].cluster = c;
        members[c].push_back(ids[k]);
      }
      next_cluster += static_cast<int>(ids.size()) / config.cluster_size;
    }
  }
  for (auto &[c, list] : members) std::sort(list.begin(), list.end());

  // Vocabulary: every letter in both positions, every syllable in both
  // positions, and the whole words (topic words, filler, common aliases).
  std::set<std::string> pieces;
  for (char c = 'a'; c <= 'z'; ++c) {
    pieces.insert(std::string(1, c));
    pieces.insert("##" + std::string(1, c));
  }
  for (const std::string &syl : syllables) {
    pieces.insert(syl);
    pieces.insert("##" + syl);
  }
  for (const auto &words : topic_words) pieces.insert(words.begin(), words.end());
  pieces.insert(filler.begin(), filler.end());
  for (const Entity &e : entities) {
    if (!e.rare) pieces.insert(e.alias_own);
  }

  SyntheticWorld world;
  world.vocab = Vocabulary(std::vector<std::string>(pieces.begin(), pieces.end()));

  // Abstracts.
  std::vector<Document> docs;
  std::vector<Annotation> annotations;
  for (const Entity &e : entities) {
    std::string text;
    auto topic_word = [&] {
      return topic_words[e.topic][namer.Pick(topic_words[e.topic].size())];
    };
    auto fill = [&](int count) {
      for (int i = 0; i < count; ++i) AppendWord(&text, filler[namer.Pick(filler.size())]);
    };
    auto mention = [&](const Entity &target, const std::string &alias) {
      auto [b, end] = AppendWord(&text, alias);
      annotations.push_back({e.id, b, end, alias, target.id});
    };
    AppendWord(&text, topic_word());
    mention(e, e.alias_own);
    fill(1);
    AppendWord(&text, topic_word());
    for (int m : members[e.cluster]) {
      if (entities[m].id == e.id) continue;
      fill(1);
      mention(entities[m], entities[m].alias_other);
    }
    fill(static_cast<int>(namer.Pick(2)));
    AppendWord(&text, topic_word());
    mention(e, e.alias_own);
    docs.push_back({e.id, text});
    world.corpus.push_back(text);
  }

  // Evaluation queries: notable entities of the evaluation topics.
  std::vector<Query> queries;
  std::vector<Qrel> qrels;
  std::vector<FoldAssignment> folds;
  std::vector<std::pair<std::string, int>> query_fold;
  int query_number = 0;
  for (int f = 0; f < config.n_folds; ++f) {
    for (int t : fold_topics[f]) {
      std::vector<int> targets;
      for (int i = 0; i < n; ++i) {
        if (entities[i].topic == t && notable[i]) targets.push_back(i);
      }
      std::shuffle(targets.begin(), targets.end(), rng);
      targets.resize(config.queries_per_topic);
      std::sort(targets.begin(), targets.end());
      for (int x : targets) {
        const Entity &e = entities[x];
        char num[24];
        std::snprintf(num, sizeof(num), "%02d", ++query_number);
        Query q;
        q.query_id = std::string(kQueryPrefixes[query_number % 4]) + num;
        q.query_type = InferQueryType(q.query_id);
        std::string text;
        AppendWord(&text, topic_words[t][namer.Pick(topic_words[t].size())]);
        auto [b, end] = AppendWord(&text, e.alias_other);
        q.text = text;
        annotations.push_back({q.query_id, b, end, e.alias_other, e.id});
        if (e.rare) world.split_queries.insert(q.query_id);
        std::map<std::string, int> grades;
        for (int i = 0; i < n; ++i) {
          if (entities[i].topic == t) grades[entities[i].id] = notable[i] ? 1 : 0;
        }
        for (int m : members[e.cluster]) grades[entities[m].id] = 1;
        grades[e.id] = 2;
        for (const auto &[doc, grade] : grades) qrels.push_back({q.query_id, doc, grade});
        query_fold.push_back({q.query_id, f});
        queries.push_back(std::move(q));
      }
    }
  }
  for (int f = 0; f < config.n_folds; ++f) {
    for (const auto &[qid, test_fold] : query_fold) {
      folds.push_back({f, qid, test_fold == f});
    }
  }

  // Stage-1 triples from the training topics: a notable entity's query, its
  // abstract, and a non-notable abstract of the same topic.
  for (int i = 0; i < n; ++i) {
    const Entity &e = entities[i];
    if (eval_topic[e.topic] || !notable[i]) continue;
    std::vector<int> negatives;
    for (int j = 0; j < n; ++j) {
      if (entities[j].topic == e.topic && !notable[j]) negatives.push_back(j);
    }
    std::shuffle(negatives.begin(), negatives.end(), rng);
    const std::string query =
        topic_words[e.topic][namer.Pick(topic_words[e.topic].size())] + " " +
        e.alias_other;
    for (int k = 0; k < config.negatives_per_triple &&
                    k < static_cast<int>(negatives.size());
         ++k) {
      world.triples.push_back({query, e.id, entities[negatives[k]].id});
    }
  }

  // Knowledge graph: cluster cliques plus a few links to same-kind entities
  // elsewhere; anchors from abstract contexts.
  std::vector<std::string> ids;
  for (const Entity &e : entities) ids.push_back(e.id);
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto &[cluster, list] : members) {
    for (int a : list) {
      for (int b : list) {
        if (a != b) links.push_back({entities[a].id, entities[b].id});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> same;
    for (int j = 0; j < n; ++j) {
      if (notable[j] == notable[i] && entities[j].cluster != entities[i].cluster) {
        same.push_back(j);
      }
    }
    std::shuffle(same.begin(), same.end(), rng);
    for (int k = 0; k < config.cross_links && k < static_cast<int>(same.size()); ++k) {
      links.push_back({entities[i].id, entities[same[k]].id});
    }
  }
  std::vector<Anchor> anchors;
  std::map<std::string, const Document *> doc_by_id;
  for (const Document &d : docs) doc_by_id[d.doc_id] = &d;
  for (const Annotation &a : annotations) {
    auto it = doc_by_id.find(a.owner_id);
    if (it == doc_by_id.end()) continue;
    const std::string &text = it->second->text;
    std::vector<WordSpan> spans = SplitWords(text);
    Anchor anchor{a.entity_id, {}};
    for (size_t w = 0; w < spans.size(); ++w) {
      if (spans[w].begin != a.char_start) continue;
      for (size_t c = w >= 2 ? w - 2 : 0; c < std::min(spans.size(), w + 3); ++c) {
        if (c != w) anchor.context.push_back(text.substr(spans[c].begin, spans[c].end - spans[c].begin));
      }
    }
    anchors.push_back(std::move(anchor));
  }

  for (int i = 0; i < n; ++i) {
    world.cluster_of[entities[i].id] = entities[i].cluster;
    if (notable[i]) world.notable.insert(entities[i].id);
  }
  world.graph = KnowledgeGraph(ids, links, anchors);
  world.collection = Collection(std::move(docs), std::move(queries),
                                std::move(qrels), std::move(annotations),
                                std::move(folds));
  return world;
}

CollectionPaths WorldCollectionPaths(const std::string &dir) {
  return {dir + "/" + WorldFiles::kDocuments, dir + "/" + WorldFiles::kQueries,
          dir + "/" + WorldFiles::kQrels, dir + "/" + WorldFiles::kAnnotations,
          dir + "/" + WorldFiles::kFolds};
}

void WriteWorld(const SyntheticWorld &world, const std::string &dir) {
  SaveCollection(world.collection, WorldCollectionPaths(dir));
  WriteFile(dir + "/" + WorldFiles::kGraph, SerializeGraph(world.graph));
  WriteFile(dir + "/" + WorldFiles::kVocab, world.vocab.Serialize());
  WriteFile(dir + "/" + WorldFiles::kTriples, SerializeTriples(world.triples));
}

}  // namespace entrank
