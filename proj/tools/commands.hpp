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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hsc/hsc.hpp"

namespace hsc::cli {

struct EncoderSpec {
  std::string type = "hashing";  // "hashing" or "http"
  std::size_t dim = 256;
  std::string url;
  std::size_t batch_size = 64;
};

/// Everything a subcommand needs. Relative paths in the config file are
/// resolved against the file's directory.
struct RunConfig {
  std::filesystem::path taxonomy;
  std::filesystem::path enterprises;
  std::filesystem::path intensities;
  std::filesystem::path stopwords;
  std::filesystem::path case_table;
  std::optional<double> stated_mape;
  bool preprocess = true;

  EncoderSpec encoder;
  // Precomputed vectors instead of an encoder: class vectors per level and
  // one query file shared by every level.
  std::map<int, std::filesystem::path> class_embeddings;
  std::filesystem::path query_embeddings;

  std::map<int, std::filesystem::path> adapters;
  std::filesystem::path adapter_dir;  // holds adapter_level<L>.adp

  SplitRatios split;
  std::size_t k = 1;
  std::size_t final_list_size = 10;
  TrainConfig train;
  std::vector<std::size_t> ks{1, 3, 5, 10};

  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  SearchMode mode = SearchMode::kGroup;
  std::size_t threads = 1;
  bool timing = true;
};

RunConfig load_config(const std::filesystem::path& path);

/// Flag values; set fields win over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::size_t> topn;
  std::optional<std::size_t> threads;
  bool no_timing = false;
};

void apply_overrides(RunConfig& config, const Overrides& o);

struct EstimateOptions {
  std::string codes_from = "classify";  // or "labels"
  std::optional<std::string> audit;     // case table path
  std::optional<double> stated_mape;
};

int cmd_validate(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_classify(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, bool ablation, std::ostream& log);
int cmd_estimate(const RunConfig& config, const EstimateOptions& options,
                 std::ostream& log);
int cmd_theorem_check(std::size_t k, const std::filesystem::path& out,
                      std::ostream& log);

}  // namespace hsc::cli
