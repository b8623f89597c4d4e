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

#ifndef ENTRANK_TOKENIZER_H_
#define ENTRANK_TOKENIZER_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrank/corpus.h"

namespace entrank {

enum class TokenKind { kWordPiece, kEntity, kSpecial };

struct Token {
  TokenKind kind = TokenKind::kWordPiece;
  int id = 0;
  std::string surface;

  bool continuation() const {
    return kind == TokenKind::kWordPiece && surface.starts_with("##");
  }
  bool operator==(const Token &) const = default;
};

inline constexpr std::string_view kEntityPrefix = "ENTITY/";
inline constexpr std::string_view kContinuationPrefix = "##";

// Id layout: the five specials first, then word pieces in file order, then
// entity tokens. Ids below native_size() have rows in the encoder's token
// table; entity tokens never do.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kSlash = 4;
  static constexpr int kNumSpecials = 5;
  static const std::vector<std::string> &SpecialSurfaces();

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  // Throws DuplicateId on repeated pieces or entities.
  explicit Vocabulary(std::vector<std::string> pieces,
                      std::vector<std::string> entity_ids = {});

  int size() const { return native_size() + static_cast<int>(entities_.size()); }
  int native_size() const {
    return kNumSpecials + static_cast<int>(pieces_.size());
  }
  const std::vector<std::string> &pieces() const { return pieces_; }
  const std::vector<std::string> &entity_ids() const { return entities_; }

  std::optional<int> PieceId(std::string_view piece) const;
  std::optional<int> EntityTokenId(std::string_view entity_id) const;
  const std::string &Surface(int id) const { return surfaces_.at(id); }
  TokenKind Kind(int id) const;
  Token MakeToken(int id) const { return {Kind(id), id, Surface(id)}; }

  // Copy with additional entity tokens (already present ones are skipped).
  Vocabulary WithEntities(const std::vector<std::string> &entity_ids) const;

  std::string Serialize() const;
  static Vocabulary Load(const std::string &path);
  static Vocabulary Parse(std::string_view content, const std::string &origin);

 private:
  std::vector<std::string> pieces_;
  std::vector<std::string> entities_;
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, int> piece_ids_;
  std::unordered_map<std::string, int> entity_ids_;
};

// Learns a word-piece vocabulary of `target_size` entries (specials
// included) by greedy pair merging over word-initial / word-internal symbol
// sequences. Throws EmptyCorpus and TargetTooSmall.
Vocabulary BuildVocab(std::span<const std::string> corpus, int target_size);

// Greedy longest-match-first word pieces. Text is normalized first. Code
// points without a piece become [UNK] tokens whose surface is the character.
std::vector<Token> WordpieceTokenize(std::string_view text,
                                     const Vocabulary &vocab);

// Predicate deciding whether an entity token may be emitted.
using EntityFilter = std::function<bool(std::string_view entity_id)>;

// Word pieces with "mention / ENTITY/<id>" insertions. The entity marker goes
// after the last piece of the word containing the mention end. Entities not
// in the vocabulary, or rejected by `keep`, are skipped. Throws
// OverlapUnresolved for crossing annotations.
std::vector<Token> AnnotateTokens(std::string_view text,
                                  std::span<const Annotation> annotations,
                                  const Vocabulary &vocab,
                                  const EntityFilter &keep = nullptr);

enum class MentionCategory { kNoEntity, kOneToken, kMultiNoCont, kOneCont, kMultiCont };

inline constexpr MentionCategory kAllCategories[] = {
    MentionCategory::kOneToken, MentionCategory::kMultiNoCont,
    MentionCategory::kOneCont, MentionCategory::kMultiCont,
    MentionCategory::kNoEntity};

std::string_view MentionCategoryName(MentionCategory category);
MentionCategory CategorizeMention(std::string_view mention,
                                  const Vocabulary &vocab);
// Most severe category over the mentions; NoEntity when there are none.
MentionCategory CategorizeMentions(std::span<const std::string> mentions,
                                   const Vocabulary &vocab);
// Category of one owner's annotations.
MentionCategory CategorizeAnnotations(std::span<const Annotation> annotations,
                                      const Vocabulary &vocab);
bool IsSplitCategory(MentionCategory category);

struct InputLimits {
  int max_query = 64;
  int max_total = 512;
};

// [CLS] query [SEP] document [SEP] with segment 0 up to and including the
// first [SEP].
struct ModelInput {
  std::vector<Token> tokens;
  std::vector<int> segment_ids;
  int query_length = 0;

  size_t size() const { return tokens.size(); }
  std::vector<int> token_ids() const;
};

ModelInput BuildInput(std::span<const Token> query_tokens,
                      std::span<const Token> doc_tokens,
                      const InputLimits &limits = {});

}  // namespace entrank

#endif  // ENTRANK_TOKENIZER_H_
