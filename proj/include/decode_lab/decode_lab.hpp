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

#include "decode_lab/comparison.hpp"
#include "decode_lab/config.hpp"
#include "decode_lab/contrastive.hpp"
#include "decode_lab/decoding.hpp"
#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/fixture_model.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/metrics.hpp"
#include "decode_lab/model_loader.hpp"
#include "decode_lab/ngram_model.hpp"
#include "decode_lab/prompts.hpp"
#include "decode_lab/report.hpp"
#include "decode_lab/rng.hpp"
#include "decode_lab/run_record.hpp"
#include "decode_lab/sidecar.hpp"
#include "decode_lab/transforms.hpp"
#include "decode_lab/vocabulary.hpp"
