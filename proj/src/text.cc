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

#include "entrank/text.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "entrank/status.h"

namespace entrank {

namespace {

char32_t DecodeAt(std::string_view text, size_t pos, size_t *length) {
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_NEXT(text.data(), i, static_cast<int32_t>(text.size()), c);
  *length = static_cast<size_t>(i) - pos;
  if (*length == 0) *length = 1;
  return c < 0 ? U'�' : static_cast<char32_t>(c);
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kInvalid: return "Invalid";
    case ErrorCode::kDanglingLink: return "DanglingLink";
    case ErrorCode::kTargetTooSmall: return "TargetTooSmall";
    case ErrorCode::kOverlapUnresolved: return "OverlapUnresolved";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kEmptyIntersection: return "EmptyIntersection";
    case ErrorCode::kSingularDesign: return "SingularDesign";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kUnknownDoc: return "UnknownDoc";
    case ErrorCode::kMissingDocText: return "MissingDocText";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string &message, std::string subject,
             size_t line)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)),
      line_(line) {}

Error ParseError(std::string_view path, size_t line, std::string_view what) {
  std::string msg = std::string(path) + ":" + std::to_string(line) + ": " +
                    std::string(what);
  return Error(ErrorCode::kParse, msg, std::string(path), line);
}

std::string NormalizeText(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kConfig, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInvalid, "text cannot be NFC-normalized");
  }
  normalized.toLower(icu::Locale::getRoot());
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool IsPunctuation(char32_t c) {
  // ASCII symbols count as punctuation, as in BERT's basic tokenizer.
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(static_cast<UChar32>(c));
}

bool IsWhitespace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
         u_isUWhiteSpace(static_cast<UChar32>(c));
}

std::vector<WordSpan> SplitWords(std::string_view text) {
  std::vector<WordSpan> words;
  size_t pos = 0;
  size_t start = std::string_view::npos;
  while (pos < text.size()) {
    size_t len;
    char32_t c = DecodeAt(text, pos, &len);
    if (IsWhitespace(c) || IsPunctuation(c)) {
      if (start != std::string_view::npos) {
        words.push_back({start, pos});
        start = std::string_view::npos;
      }
      if (!IsWhitespace(c)) words.push_back({pos, pos + len});
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos += len;
  }
  if (start != std::string_view::npos) words.push_back({start, text.size()});
  return words;
}

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> out;
  for (const WordSpan &w : SplitWords(text)) {
    out.emplace_back(text.substr(w.begin, w.end - w.begin));
  }
  return out;
}

size_t Utf8Length(std::string_view text, size_t pos) {
  size_t len;
  DecodeAt(text, pos, &len);
  return len;
}

std::vector<std::string> Utf8Chars(std::string_view text) {
  std::vector<std::string> chars;
  for (size_t pos = 0; pos < text.size();) {
    size_t len = Utf8Length(text, pos);
    chars.emplace_back(text.substr(pos, len));
    pos += len;
  }
  return chars;
}

std::vector<std::string_view> SplitOn(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    size_t next = line.find(sep, start);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, next - start));
    start = next + 1;
  }
  return fields;
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::string Join(const std::vector<std::string> &parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

double ParseDouble(std::string_view token) {
  double value = 0.0;
  auto [end, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw Error(ErrorCode::kParse,
                "not a number: '" + std::string(token) + "'");
  }
  return value;
}

long long ParseInt(std::string_view token) {
  long long value = 0;
  auto [end, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw Error(ErrorCode::kParse,
                "not an integer: '" + std::string(token) + "'");
  }
  return value;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::string content = ReadFile(path);
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < content.size()) {
    size_t nl = content.find('\n', start);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

void WriteFile(const std::string &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path, path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path, path);
}

}  // namespace entrank
