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


#include "dhm/config.h"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "dhm/error.h"
#include "dhm/random.h"
#include "dhm/text.h"

namespace dhm {
namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

[[noreturn]] void Bad(const std::string& key, const std::string& what,
                      const std::string& value) {
  throw UsageError("'" + key + "': expected " + what + ", got '" + value + "'");
}

double AsReal(const std::string& key, const std::string& v) {
  const auto d = ParseDouble(v);
  if (!d) Bad(key, "a number", v);
  return *d;
}

long long AsInt(const std::string& key, const std::string& v) {
  const auto i = ParseInt(v);
  if (!i) Bad(key, "an integer", v);
  return *i;
}

int AsInt32(const std::string& key, const std::string& v) {
  const long long i = AsInt(key, v);
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    Bad(key, "a 32-bit integer", v);
  }
  return static_cast<int>(i);
}

std::uint64_t AsSeed(const std::string& key, const std::string& v) {
  const long long i = AsInt(key, v);
  if (i < 0) Bad(key, "a non-negative integer", v);
  return static_cast<std::uint64_t>(i);
}

bool AsBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Bad(key, "true or false", v);
}

template <typename T, typename F>
std::vector<T> AsList(const std::string& v, F parse) {
  std::vector<T> out;
  for (const std::string& item : Split(v, ',')) {
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& items, F show) {
  std::string out;
  for (const auto& x : items) out += (out.empty() ? "" : ",") + show(x);
  return out;
}

std::string Bool(bool b) { return b ? "true" : "false"; }

ConfigKey Str(const char* name, const char* help, std::string RunConfig::*field) {
  return {name, help, [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

std::vector<ConfigKey> BuildKeys() {
  std::vector<ConfigKey> k;
  k.push_back(Str("dataset", "directory with edges/zones/features/shares/areas CSVs",
                  &RunConfig::dataset));
  k.push_back(Str("edges", "edge CSV (src,dst,weight)", &RunConfig::edges));
  k.push_back(Str("zones", "node-to-zone CSV (node,zone)", &RunConfig::zones));
  k.push_back(Str("features", "zone feature CSV", &RunConfig::features));
  k.push_back(Str("shares", "zone mode-share CSV", &RunConfig::shares));
  k.push_back(Str("areas", "zone area CSV (zone,area)", &RunConfig::areas));
  k.push_back(Str("embeddings", "node embedding file", &RunConfig::embeddings));
  k.push_back(Str("zone_embeddings", "zone embedding file", &RunConfig::zone_embeddings));
  k.push_back(Str("model", "fitted model file", &RunConfig::model));
  k.push_back(Str("out", "output file", &RunConfig::out));
  k.push_back(Str("out_dir", "output directory", &RunConfig::out_dir));

  const auto add = [&k](const char* name, const char* help, Setter set, Getter get) {
    k.push_back({name, help, std::move(set), std::move(get)});
  };
  add("seed", "master seed; stage seeds derive from it",
      [](RunConfig& c, const std::string& v) { c.seed = AsSeed("seed", v); },
      [](const RunConfig& c) { return std::to_string(c.seed); });
  add("threads", "worker threads (1 = deterministic)",
      [](RunConfig& c, const std::string& v) { c.threads = AsInt32("threads", v); },
      [](const RunConfig& c) { return std::to_string(c.threads); });

  // Walks.
  add("p", "return parameter",
      [](RunConfig& c, const std::string& v) { c.pipeline.walk.p = AsReal("p", v); },
      [](const RunConfig& c) { return FormatShort(c.pipeline.walk.p); });
  add("q", "in-out parameter",
      [](RunConfig& c, const std::string& v) { c.pipeline.walk.q = AsReal("q", v); },
      [](const RunConfig& c) { return FormatShort(c.pipeline.walk.q); });
  add("walk_length", "nodes per walk",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.walk.walk_length = AsInt32("walk_length", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.walk.walk_length); });
  add("walks_per_node", "walks started from every node",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.walk.walks_per_node = AsInt32("walks_per_node", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.walk.walks_per_node); });
  add("weight_transform", "inverse (1/length) or identity",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.walk.weight_transform = ParseWeightTransform(v);
      },
      [](const RunConfig& c) { return ToString(c.pipeline.walk.weight_transform); });
  add("table_budget", "max precomputed second-order entries",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.walk.table_budget = AsSeed("table_budget", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.walk.table_budget); });

  // Skip-gram.
  add("dim", "embedding dimension",
      [](RunConfig& c, const std::string& v) { c.pipeline.train.dim = AsInt32("dim", v); },
      [](const RunConfig& c) { return std::to_string(c.pipeline.train.dim); });
  add("epochs", "passes over the walk corpus",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.train.epochs = AsInt32("epochs", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.train.epochs); });
  add("learning_rate", "SGD step size",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.train.learning_rate = AsReal("learning_rate", v);
      },
      [](const RunConfig& c) { return FormatShort(c.pipeline.train.learning_rate); });
  add("negatives", "negative samples per positive pair",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.train.negatives_per_positive = AsInt32("negatives", v);
      },
      [](const RunConfig& c) {
        return std::to_string(c.pipeline.train.negatives_per_positive);
      });
  add("window", "skip-gram context window",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.train.window = AsInt32("window", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.train.window); });
  add("resample_walks", "draw a fresh walk corpus every epoch",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.train.resample_walks_each_epoch = AsBool("resample_walks", v);
      },
      [](const RunConfig& c) { return Bool(c.pipeline.train.resample_walks_each_epoch); });

  // Graph preparation.
  add("simplify", "contract degree-2 chains before embedding",
      [](RunConfig& c, const std::string& v) { c.pipeline.simplify = AsBool("simplify", v); },
      [](const RunConfig& c) { return Bool(c.pipeline.simplify); });
  add("prune_rounds", "dead-end pruning rounds after simplification",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.prune_rounds = AsInt32("prune_rounds", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.prune_rounds); });

  // Evaluation.
  add("train_fraction", "share of zones in the training split",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.split.train_fraction = AsReal("train_fraction", v);
      },
      [](const RunConfig& c) { return FormatShort(c.pipeline.split.train_fraction); });
  add("predictors", "comma list of mnl, random_forest, gradient_boost",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.predictors = AsList<PredictorKind>(v, ParsePredictorKind);
      },
      [](const RunConfig& c) {
        return JoinList(c.pipeline.predictors, [](PredictorKind x) { return ToString(x); });
      });
  add("input_modes", "comma list of baseline, ger, concat",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.input_modes = AsList<InputMode>(v, ParseInputMode);
      },
      [](const RunConfig& c) {
        return JoinList(c.pipeline.input_modes, [](InputMode x) { return ToString(x); });
      });
  add("predictor", "predictor for the fit command",
      [](RunConfig& c, const std::string& v) { c.predictor = ParsePredictorKind(v); },
      [](const RunConfig& c) { return ToString(c.predictor); });
  add("input_mode", "input mode for the fit command",
      [](RunConfig& c, const std::string& v) { c.input_mode = ParseInputMode(v); },
      [](const RunConfig& c) { return ToString(c.input_mode); });
  add("mnl_l2", "ridge penalty on non-constant MNL coefficients",
      [](RunConfig& c, const std::string& v) { c.pipeline.mnl.l2_lambda = AsReal("mnl_l2", v); },
      [](const RunConfig& c) { return FormatShort(c.pipeline.mnl.l2_lambda); });
  add("mnl_max_iters", "MNL gradient-descent iteration cap",
      [](RunConfig& c, const std::string& v) {
        c.pipeline.mnl.max_iters = AsInt32("mnl_max_iters", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pipeline.mnl.max_iters); });
  add("mnl_tol", "MNL gradient max-norm tolerance",
      [](RunConfig& c, const std::string& v) { c.pipeline.mnl.tol = AsReal("mnl_tol", v); },
      [](const RunConfig& c) { return FormatShort(c.pipeline.mnl.tol); });
  add("feature_threshold", "minimum |r| with every mode to keep a feature",
      [](RunConfig& c, const std::string& v) {
        c.feature_threshold = AsReal("feature_threshold", v);
      },
      [](const RunConfig& c) { return FormatShort(c.feature_threshold); });
  add("clusters", "k for k-means over zone embeddings",
      [](RunConfig& c, const std::string& v) { c.clusters = AsInt32("clusters", v); },
      [](const RunConfig& c) { return std::to_string(c.clusters); });
  add("quantiles", "comma list of readout quantiles",
      [](RunConfig& c, const std::string& v) {
        c.quantiles = AsList<double>(v, [](const std::string& s) { return AsReal("quantiles", s); });
      },
      [](const RunConfig& c) {
        return JoinList(c.quantiles, [](double x) { return FormatShort(x); });
      });

  // Synthetic city.
  add("n_zones", "synthetic zones",
      [](RunConfig& c, const std::string& v) { c.synth.n_zones = AsInt32("n_zones", v); },
      [](const RunConfig& c) { return std::to_string(c.synth.n_zones); });
  add("nodes_per_zone", "synthetic nodes per zone",
      [](RunConfig& c, const std::string& v) {
        c.synth.nodes_per_zone = AsInt32("nodes_per_zone", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.nodes_per_zone); });
  add("dense_zone_fraction", "share of zones built as dense lattices",
      [](RunConfig& c, const std::string& v) {
        c.synth.dense_zone_fraction = AsReal("dense_zone_fraction", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.dense_zone_fraction); });
  add("layout_jitter", "noise on the downtown ranking of dense zones",
      [](RunConfig& c, const std::string& v) {
        c.synth.layout_jitter = AsReal("layout_jitter", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.layout_jitter); });
  add("intra_edge_prob_dense", "extra lattice link probability in dense zones",
      [](RunConfig& c, const std::string& v) {
        c.synth.intra_edge_prob_dense = AsReal("intra_edge_prob_dense", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.intra_edge_prob_dense); });
  add("intra_edge_prob_sparse", "extra lattice link probability in sparse zones",
      [](RunConfig& c, const std::string& v) {
        c.synth.intra_edge_prob_sparse = AsReal("intra_edge_prob_sparse", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.intra_edge_prob_sparse); });
  add("inter_edge_prob", "link probability between facing boundary nodes",
      [](RunConfig& c, const std::string& v) {
        c.synth.inter_edge_prob = AsReal("inter_edge_prob", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.inter_edge_prob); });
  add("n_baseline_features", "synthetic feature columns",
      [](RunConfig& c, const std::string& v) {
        c.synth.n_baseline_features = AsInt32("n_baseline_features", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.n_baseline_features); });
  add("feature_signal", "weight of the planted signal in each feature",
      [](RunConfig& c, const std::string& v) {
        c.synth.feature_signal = AsReal("feature_signal", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.feature_signal); });
  add("share_noise_scale", "utility noise standard deviation",
      [](RunConfig& c, const std::string& v) {
        c.synth.share_noise_scale = AsReal("share_noise_scale", v);
      },
      [](const RunConfig& c) { return FormatShort(c.synth.share_noise_scale); });
  return k;
}

}  // namespace

std::uint64_t StageSeed(std::uint64_t master, const std::string& stage) {
  return DeriveSeed(master, stage);
}

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = BuildKeys();
  return keys;
}

std::string SchemaHash() {
  std::string names;
  for (const auto& k : ConfigKeys()) names += k.name + "\n";
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, HashString(names));
  return buf;
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  for (const auto& k : ConfigKeys()) {
    if (k.name == key) {
      k.set(*this, value);
      return;
    }
  }
  throw UsageError("unknown configuration key '" + key + "'");
}

void RunConfig::Load(const std::string& path) {
  std::vector<std::string> lines;
  try {
    lines = ReadLines(path);
  } catch (const DataError&) {
    throw UsageError("cannot open config file " + path);
  }
  std::vector<KeyValue> entries;
  try {
    entries = ParseKeyValues(lines, path);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  for (const auto& kv : entries) {
    try {
      Set(kv.key, kv.value);
    } catch (const UsageError& e) {
      throw UsageError(path + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
}

void RunConfig::Finalize() {
  if (!dataset.empty()) {
    const std::filesystem::path base(dataset);
    const auto fill = [&base](std::string& field, const char* name) {
      if (field.empty()) field = (base / name).string();
    };
    fill(edges, "edges.csv");
    fill(zones, "zones.csv");
    fill(features, "features.csv");
    fill(shares, "shares.csv");
    fill(areas, "areas.csv");
  }
  if (threads < 1) throw UsageError("threads must be >= 1");
  pipeline.walk.seed = StageSeed(seed, "walk");
  pipeline.train.seed = StageSeed(seed, "train");
  pipeline.split.seed = StageSeed(seed, "split");
  pipeline.tree_seed = StageSeed(seed, "trees");
  synth.seed = StageSeed(seed, "synth");
  pipeline.walk.threads = threads;
  pipeline.train.threads = threads;

  pipeline.walk.Validate();
  pipeline.train.Validate();
  pipeline.split.Validate();
  synth.Validate();
  if (pipeline.prune_rounds < 0) throw UsageError("prune_rounds must be >= 0");
  if (!(pipeline.mnl.l2_lambda >= 0.0)) throw UsageError("mnl_l2 must be >= 0");
  if (pipeline.mnl.max_iters < 1) throw UsageError("mnl_max_iters must be >= 1");
  if (!(pipeline.mnl.tol > 0.0)) throw UsageError("mnl_tol must be > 0");
  if (pipeline.predictors.empty()) throw UsageError("predictors is empty");
  if (pipeline.input_modes.empty()) throw UsageError("input_modes is empty");
  if (!(feature_threshold >= 0.0 && feature_threshold <= 1.0)) {
    throw UsageError("feature_threshold must be in [0, 1]");
  }
  if (clusters < 1) throw UsageError("clusters must be >= 1");
  for (double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw UsageError("quantiles must lie in [0, 1]");
  }
}

std::string RunConfig::ToText() const {
  std::string out;
  for (const auto& k : ConfigKeys()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

}  // namespace dhm
