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


#ifndef ENTRANK_CLI_H_
#define ENTRANK_CLI_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace entrank {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Outputs without an
// --out path go to `out`; diagnostics go to `err`.
int Dispatch(const std::vector<std::string> &args, std::ostream &out,
             std::ostream &err);

// "key=value" lines; blank lines and lines starting with '#' are skipped.
// Throws ParseError.
std::map<std::string, std::string> ParseConfig(const std::string &content,
                                               const std::string &origin);

}  // namespace entrank

#endif  // ENTRANK_CLI_H_
