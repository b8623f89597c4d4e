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

#ifndef ENTRANK_STATUS_H_
#define ENTRANK_STATUS_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace entrank {

enum class ErrorCode {
  kIo,
  kParse,
  kDuplicateId,
  kInvalid,
  kDanglingLink,
  kTargetTooSmall,
  kOverlapUnresolved,
  kEmptyCorpus,
  kUnknownKey,
  kEmptyIntersection,
  kSingularDesign,
  kMissingEmbedding,
  kNonFiniteLoss,
  kUnknownDoc,
  kMissingDocText,
  kLengthMismatch,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error. `subject` carries the offending
// id or key when there is one; `line` is 1-based for parse errors, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message, std::string subject = {},
        size_t line = 0);

  ErrorCode code() const { return code_; }
  const std::string &subject() const { return subject_; }
  size_t line() const { return line_; }

 private:
  ErrorCode code_;
  std::string subject_;
  size_t line_;
};

// Parse failure at a given line of a given file.
Error ParseError(std::string_view path, size_t line, std::string_view what);

}  // namespace entrank

#endif  // ENTRANK_STATUS_H_
