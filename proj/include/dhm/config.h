// Copyright 2026 The DHM Authors.
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


// Flat `key = value` run configuration shared by every command. Flags on
// the command line mirror the keys with '_' replaced by '-'.

#ifndef DHM_CONFIG_H_
#define DHM_CONFIG_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dhm/pipeline.h"
#include "dhm/synth.h"

namespace dhm {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  // Inputs. When `dataset` names a directory, unset table paths default to
  // the file names written by the synth command.
  std::string dataset;
  std::string edges;
  std::string zones;
  std::string features;
  std::string shares;
  std::string areas;
  std::string embeddings;       // node embeddings
  std::string zone_embeddings;  // readout output
  std::string model;
  // Outputs.
  std::string out;
  std::string out_dir;

  std::uint64_t seed = 1;  // master seed; stage seeds derive from it
  int threads = 1;

  PipelineConfig pipeline;
  PredictorKind predictor = PredictorKind::kMnl;  // single-model commands
  InputMode input_mode = InputMode::kConcat;
  double feature_threshold = 0.05;
  int clusters = 30;
  std::vector<double> quantiles = kDefaultQuantiles;
  SynthConfig synth;

  // Parses one entry. UsageError for an unknown key or a malformed value.
  void Set(const std::string& key, const std::string& value);
  void Load(const std::string& path);  // config file entries, in order

  // Derives stage seeds and thread counts, fills dataset paths, and
  // validates every section. UsageError on a violated invariant.
  void Finalize();

  std::string ToText() const;  // one line per key, schema order
};

// Stage names used for seed derivation.
std::uint64_t StageSeed(std::uint64_t master, const std::string& stage);

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& ConfigKeys();

// FNV-1a over the key names, as 16 hex digits.
std::string SchemaHash();

}  // namespace dhm

#endif  // DHM_CONFIG_H_
