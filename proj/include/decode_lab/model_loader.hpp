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
#include <memory>
#include <string>

#include "decode_lab/error.hpp"
#include "decode_lab/fixture_model.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/ngram_model.hpp"
#include "decode_lab/sidecar.hpp"

namespace decode_lab {

/// Resolves a model argument: `stdio:`/`tcp:` endpoints connect to a sidecar,
/// files starting with '{' are n-gram models written by `train`, anything
/// else is parsed as a fixture table.
inline std::unique_ptr<LanguageModel> load_model(const std::string& source) {
  if (is_sidecar_endpoint(source)) return SidecarClient::connect(source);
  std::ifstream in(source);
  if (!in) throw Error(Errc::kIoError, "cannot read model " + source);
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  in.close();
  if (first == '{') return std::make_unique<NGramModel>(NGramModel::load(source));
  return std::make_unique<FixtureModel>(load_fixture_model(source));
}

}  // namespace decode_lab
