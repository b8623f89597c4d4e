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

#ifndef ENTRANK_TEXT_H_
#define ENTRANK_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace entrank {

// NFC normalization followed by full Unicode lower-casing. Idempotent.
std::string NormalizeText(std::string_view text);

// Byte span [begin, end) of a word inside a UTF-8 string.
struct WordSpan {
  size_t begin = 0;
  size_t end = 0;
};

// Splits on whitespace; every punctuation code point becomes its own word.
std::vector<WordSpan> SplitWords(std::string_view text);
std::vector<std::string> Words(std::string_view text);

// Byte length of the UTF-8 sequence starting at text[pos] (1 for invalid
// lead bytes, so iteration always advances).
size_t Utf8Length(std::string_view text, size_t pos);
std::vector<std::string> Utf8Chars(std::string_view text);

bool IsPunctuation(char32_t c);
bool IsWhitespace(char32_t c);

std::vector<std::string_view> SplitOn(std::string_view line, char sep);
std::vector<std::string_view> SplitWhitespace(std::string_view line);
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Shortest decimal form that reads back to the same double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view token);
long long ParseInt(std::string_view token);

// Line-oriented file access. Lines are returned without their terminator;
// a trailing newline does not produce an empty final line.
std::vector<std::string> ReadLines(const std::string &path);
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view content);

}  // namespace entrank

#endif  // ENTRANK_TEXT_H_
