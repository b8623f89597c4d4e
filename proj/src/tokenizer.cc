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

#include "entrank/tokenizer.h"

#include <algorithm>
#include <map>
#include <set>

#include "entrank/status.h"
#include "entrank/text.h"

namespace entrank {

namespace {

std::string StripContinuation(std::string_view piece) {
  if (piece.starts_with(kContinuationPrefix)) {
    piece.remove_prefix(kContinuationPrefix.size());
  }
  return std::string(piece);
}

Token SpecialToken(int id) {
  return {TokenKind::kSpecial, id, Vocabulary::SpecialSurfaces()[id]};
}

// Greedy longest-match-first over one already-normalized word.
void TokenizeWord(std::string_view word, const Vocabulary &vocab,
                  std::vector<Token> *out) {
  std::vector<size_t> bounds;  // code point boundaries
  for (size_t pos = 0; pos < word.size(); pos += Utf8Length(word, pos)) {
    bounds.push_back(pos);
  }
  bounds.push_back(word.size());
  size_t start = 0;
  std::string candidate;
  while (start + 1 < bounds.size()) {
    bool matched = false;
    for (size_t end = bounds.size() - 1; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate.append(kContinuationPrefix);
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if (auto id = vocab.PieceId(candidate)) {
        out->push_back(vocab.MakeToken(*id));
        start = end;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out->push_back({TokenKind::kSpecial, Vocabulary::kUnk,
                      std::string(word.substr(bounds[start],
                                              bounds[start + 1] - bounds[start]))});
      ++start;
    }
  }
}

}  // namespace

const std::vector<std::string> &Vocabulary::SpecialSurfaces() {
  static const std::vector<std::string> kSurfaces = {"[PAD]", "[UNK]", "[CLS]",
                                                     "[SEP]", "/"};
  return kSurfaces;
}

Vocabulary::Vocabulary(std::vector<std::string> pieces,
                       std::vector<std::string> entity_ids)
    : pieces_(std::move(pieces)), entities_(std::move(entity_ids)) {
  surfaces_ = SpecialSurfaces();
  piece_ids_.emplace("/", kSlash);
  for (const std::string &p : pieces_) {
    int id = static_cast<int>(surfaces_.size());
    if (p.empty() || !piece_ids_.emplace(p, id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate or empty piece '" + p + "'",
                  p);
    }
    surfaces_.push_back(p);
  }
  for (const std::string &e : entities_) {
    int id = static_cast<int>(surfaces_.size());
    if (!entity_ids_.emplace(e, id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate entity token '" + e + "'",
                  e);
    }
    surfaces_.push_back(std::string(kEntityPrefix) + e);
  }
}

std::optional<int> Vocabulary::PieceId(std::string_view piece) const {
  auto it = piece_ids_.find(std::string(piece));
  if (it == piece_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::EntityTokenId(std::string_view entity_id) const {
  auto it = entity_ids_.find(std::string(entity_id));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

TokenKind Vocabulary::Kind(int id) const {
  if (id < kNumSpecials) return TokenKind::kSpecial;
  if (id < native_size()) return TokenKind::kWordPiece;
  return TokenKind::kEntity;
}

Vocabulary Vocabulary::WithEntities(
    const std::vector<std::string> &entity_ids) const {
  std::vector<std::string> merged = entities_;
  std::set<std::string> seen(entities_.begin(), entities_.end());
  for (const std::string &e : entity_ids) {
    if (seen.insert(e).second) merged.push_back(e);
  }
  return Vocabulary(pieces_, std::move(merged));
}

std::string Vocabulary::Serialize() const {
  std::string out;
  for (const std::string &s : SpecialSurfaces()) out += s + "\n";
  for (const std::string &p : pieces_) out += p + "\n";
  out += "#entities\n";
  for (const std::string &e : entities_) {
    out += std::string(kEntityPrefix) + e + "\n";
  }
  return out;
}

Vocabulary Vocabulary::Parse(std::string_view content,
                             const std::string &origin) {
  std::vector<std::string> pieces;
  std::vector<std::string> entities;
  const auto &specials = SpecialSurfaces();
  bool in_entities = false;
  size_t lineno = 0;
  for (std::string_view line : SplitOn(content, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line == "#entities") {
      in_entities = true;
      continue;
    }
    if (in_entities) {
      if (!line.starts_with(kEntityPrefix) || line.size() == kEntityPrefix.size()) {
        throw ParseError(origin, lineno, "entity token must start with ENTITY/");
      }
      entities.emplace_back(line.substr(kEntityPrefix.size()));
    } else if (std::find(specials.begin(), specials.end(), line) ==
               specials.end()) {
      pieces.emplace_back(line);
    }
  }
  return Vocabulary(std::move(pieces), std::move(entities));
}

Vocabulary Vocabulary::Load(const std::string &path) {
  return Parse(ReadFile(path), path);
}

// ---------------------------------------------------------------------------

Vocabulary BuildVocab(std::span<const std::string> corpus, int target_size) {
  std::map<std::string, long long> word_counts;
  for (const std::string &text : corpus) {
    for (std::string &w : Words(NormalizeText(text))) ++word_counts[w];
  }
  if (word_counts.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "vocabulary corpus has no words");
  }

  struct Entry {
    std::vector<std::string> symbols;
    long long count;
  };
  std::vector<Entry> words;
  std::set<std::string> alphabet;
  for (const auto &[word, count] : word_counts) {
    Entry e{{}, count};
    std::vector<std::string> chars = Utf8Chars(word);
    for (size_t i = 0; i < chars.size(); ++i) {
      e.symbols.push_back(i == 0 ? chars[i]
                                 : std::string(kContinuationPrefix) + chars[i]);
    }
    for (const std::string &s : e.symbols) {
      if (s != "/") alphabet.insert(s);
    }
    words.push_back(std::move(e));
  }
  const int base = Vocabulary::kNumSpecials + static_cast<int>(alphabet.size());
  if (target_size < base) {
    throw Error(ErrorCode::kTargetTooSmall,
                "target size " + std::to_string(target_size) +
                    " is below the " + std::to_string(base) +
                    " entries needed for specials and characters");
  }

  std::vector<std::string> pieces(alphabet.begin(), alphabet.end());
  std::set<std::string> known(alphabet.begin(), alphabet.end());
  while (Vocabulary::kNumSpecials + static_cast<int>(pieces.size()) <
         target_size) {
    std::map<std::pair<std::string, std::string>, long long> pair_counts;
    for (const Entry &e : words) {
      for (size_t i = 0; i + 1 < e.symbols.size(); ++i) {
        pair_counts[{e.symbols[i], e.symbols[i + 1]}] += e.count;
      }
    }
    if (pair_counts.empty()) break;
    // Highest count wins; std::map order makes ties lexicographic.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [left, right] = best->first;
    std::string merged = left + StripContinuation(right);
    for (Entry &e : words) {
      std::vector<std::string> next;
      next.reserve(e.symbols.size());
      for (size_t i = 0; i < e.symbols.size(); ++i) {
        if (i + 1 < e.symbols.size() && e.symbols[i] == left &&
            e.symbols[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(e.symbols[i]);
        }
      }
      e.symbols = std::move(next);
    }
    if (known.insert(merged).second) pieces.push_back(merged);
  }
  return Vocabulary(std::move(pieces));
}

std::vector<Token> WordpieceTokenize(std::string_view text,
                                     const Vocabulary &vocab) {
  std::string normalized = NormalizeText(text);
  std::vector<Token> tokens;
  for (const WordSpan &w : SplitWords(normalized)) {
    TokenizeWord(std::string_view(normalized).substr(w.begin, w.end - w.begin),
                 vocab, &tokens);
  }
  return tokens;
}

std::vector<Token> AnnotateTokens(std::string_view text,
                                  std::span<const Annotation> annotations,
                                  const Vocabulary &vocab,
                                  const EntityFilter &keep) {
  for (size_t i = 0; i < annotations.size(); ++i) {
    for (size_t j = i + 1; j < annotations.size(); ++j) {
      if (AnnotationsCross(annotations[i], annotations[j])) {
        throw Error(ErrorCode::kOverlapUnresolved,
                    "annotations '" + annotations[i].entity_id + "' and '" +
                        annotations[j].entity_id + "' cross",
                    annotations[i].owner_id);
      }
    }
  }
  std::vector<WordSpan> words = SplitWords(text);
  // Insertion points, keyed by the index of the word they follow (-1 = front).
  std::multimap<long, int> inserts;
  for (const Annotation &a : annotations) {
    auto id = vocab.EntityTokenId(a.entity_id);
    if (!id) continue;
    if (keep && !keep(a.entity_id)) continue;
    long after = -1;
    for (size_t w = 0; w < words.size(); ++w) {
      if (words[w].begin < a.char_end) after = static_cast<long>(w);
    }
    inserts.emplace(after, *id);
  }
  std::vector<Token> tokens;
  auto emit_inserts = [&](long after) {
    auto [lo, hi] = inserts.equal_range(after);
    for (auto it = lo; it != hi; ++it) {
      tokens.push_back(SpecialToken(Vocabulary::kSlash));
      tokens.push_back(vocab.MakeToken(it->second));
    }
  };
  emit_inserts(-1);
  for (size_t w = 0; w < words.size(); ++w) {
    TokenizeWord(text.substr(words[w].begin, words[w].end - words[w].begin),
                 vocab, &tokens);
    emit_inserts(static_cast<long>(w));
  }
  return tokens;
}

std::string_view MentionCategoryName(MentionCategory category) {
  switch (category) {
    case MentionCategory::kNoEntity: return "NoEntity";
    case MentionCategory::kOneToken: return "OneToken";
    case MentionCategory::kMultiNoCont: return "MultiNoCont";
    case MentionCategory::kOneCont: return "OneCont";
    case MentionCategory::kMultiCont: return "MultiCont";
  }
  return "NoEntity";
}

MentionCategory CategorizeMention(std::string_view mention,
                                  const Vocabulary &vocab) {
  std::vector<Token> tokens = WordpieceTokenize(mention, vocab);
  if (tokens.empty()) return MentionCategory::kNoEntity;
  if (tokens.size() == 1) return MentionCategory::kOneToken;
  long cont = std::count_if(tokens.begin(), tokens.end(),
                            [](const Token &t) { return t.continuation(); });
  if (cont == 0) return MentionCategory::kMultiNoCont;
  if (cont == 1) return MentionCategory::kOneCont;
  return MentionCategory::kMultiCont;
}

MentionCategory CategorizeMentions(std::span<const std::string> mentions,
                                   const Vocabulary &vocab) {
  MentionCategory worst = MentionCategory::kNoEntity;
  for (const std::string &m : mentions) {
    worst = std::max(worst, CategorizeMention(m, vocab));
  }
  return worst;
}

MentionCategory CategorizeAnnotations(std::span<const Annotation> annotations,
                                      const Vocabulary &vocab) {
  std::vector<std::string> mentions;
  for (const Annotation &a : annotations) mentions.push_back(a.mention);
  return CategorizeMentions(mentions, vocab);
}

bool IsSplitCategory(MentionCategory category) {
  return category == MentionCategory::kOneCont ||
         category == MentionCategory::kMultiCont;
}

std::vector<int> ModelInput::token_ids() const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const Token &t : tokens) ids.push_back(t.id);
  return ids;
}

ModelInput BuildInput(std::span<const Token> query_tokens,
                      std::span<const Token> doc_tokens,
                      const InputLimits &limits) {
  const int room = std::max(0, limits.max_total - 3);
  int q = std::min<int>({static_cast<int>(query_tokens.size()),
                         limits.max_query, room});
  int d = std::min<int>(static_cast<int>(doc_tokens.size()), room - q);
  ModelInput input;
  input.query_length = q;
  input.tokens.reserve(q + d + 3);
  input.tokens.push_back(SpecialToken(Vocabulary::kCls));
  input.tokens.insert(input.tokens.end(), query_tokens.begin(),
                      query_tokens.begin() + q);
  input.tokens.push_back(SpecialToken(Vocabulary::kSep));
  input.segment_ids.assign(input.tokens.size(), 0);
  input.tokens.insert(input.tokens.end(), doc_tokens.begin(),
                      doc_tokens.begin() + d);
  input.tokens.push_back(SpecialToken(Vocabulary::kSep));
  input.segment_ids.resize(input.tokens.size(), 1);
  return input;
}

}  // namespace entrank
