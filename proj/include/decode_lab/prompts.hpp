// Copyright 2026 The decode_lab Authors.
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

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "decode_lab/error.hpp"

namespace decode_lab {

struct PromptSet {
  std::vector<std::string> prompts;
  std::string source;
};

/// One prompt per non-blank line, order preserved. Line endings (LF or CRLF)
/// are stripped; nothing else is altered.
inline PromptSet ingest_prompts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read prompts " + path);
  PromptSet set{{}, path};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t\v\f") == std::string::npos) continue;
    set.prompts.push_back(std::move(line));
  }
  if (set.prompts.empty()) throw Error(Errc::kEmptyPromptSet, path + " has no non-blank lines");
  return set;
}

}  // namespace decode_lab
