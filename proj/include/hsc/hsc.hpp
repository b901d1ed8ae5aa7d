// Copyright 2026 The HSC Authors.
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

// Umbrella header.

#pragma once

#include "hsc/adapter.hpp"
#include "hsc/corpus.hpp"
#include "hsc/embedding.hpp"
#include "hsc/embedding_io.hpp"
#include "hsc/emission.hpp"
#include "hsc/encoder.hpp"
#include "hsc/error.hpp"
#include "hsc/evaluation.hpp"
#include "hsc/io.hpp"
#include "hsc/pipeline.hpp"
#include "hsc/reasoning.hpp"
#include "hsc/rng.hpp"
#include "hsc/taxonomy.hpp"
#include "hsc/theory.hpp"
