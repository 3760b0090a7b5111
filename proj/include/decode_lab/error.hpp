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

#include <stdexcept>
#include <string>
#include <string_view>

namespace decode_lab {

enum class Errc {
  kInvalidArgument,
  kInvalidConfig,
  kEmptyCorpus,
  kParseError,
  kRowNotNormalized,
  kMissingEmbeddings,
  kUnknownStrategy,
  kUnknownSimilarityFn,
  kUnknownMetric,
  kNotImplemented,
  kEmptyText,
  kEmptyInput,
  kTooShort,
  kNeedTwoTexts,
  kIoError,
  kEmptyPromptSet,
  kNoRecords,
  kSchemaMismatch,
  kUnreachable,
  kVersionMismatch,
  kMalformedHandshake,
  kSidecarUnavailable,
  kBadDistribution,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kEmptyCorpus: return "EmptyCorpus";
    case Errc::kParseError: return "ParseError";
    case Errc::kRowNotNormalized: return "RowNotNormalized";
    case Errc::kMissingEmbeddings: return "MissingEmbeddings";
    case Errc::kUnknownStrategy: return "UnknownStrategy";
    case Errc::kUnknownSimilarityFn: return "UnknownSimilarityFn";
    case Errc::kUnknownMetric: return "UnknownMetric";
    case Errc::kNotImplemented: return "NotImplemented";
    case Errc::kEmptyText: return "EmptyText";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kTooShort: return "TooShort";
    case Errc::kNeedTwoTexts: return "NeedTwoTexts";
    case Errc::kIoError: return "IoError";
    case Errc::kEmptyPromptSet: return "EmptyPromptSet";
    case Errc::kNoRecords: return "NoRecords";
    case Errc::kSchemaMismatch: return "SchemaMismatch";
    case Errc::kUnreachable: return "Unreachable";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kMalformedHandshake: return "MalformedHandshake";
    case Errc::kSidecarUnavailable: return "SidecarUnavailable";
    case Errc::kBadDistribution: return "BadDistribution";
  }
  return "Unknown";
}

/// Process exit code for an error: 1 usage, 2 data, 3 backend unavailable.
constexpr int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kInvalidConfig:
    case Errc::kUnknownStrategy:
    case Errc::kUnknownSimilarityFn:
    case Errc::kUnknownMetric:
    case Errc::kNotImplemented:
      return 1;
    case Errc::kUnreachable:
    case Errc::kVersionMismatch:
    case Errc::kMalformedHandshake:
    case Errc::kSidecarUnavailable:
    case Errc::kBadDistribution:
      return 3;
    default:
      return 2;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace decode_lab
