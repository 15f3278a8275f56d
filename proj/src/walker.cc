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

#include "dhm/walker.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "dhm/error.h"
#include "dhm/text.h"

namespace dhm {

WeightTransform ParseWeightTransform(const std::string& name) {
  if (name == "inverse") return WeightTransform::kInverse;
  if (name == "identity") return WeightTransform::kIdentity;
  throw UsageError("weight_transform must be 'inverse' or 'identity', got '" +
                   name + "'");
}

std::string ToString(WeightTransform t) {
  return t == WeightTransform::kInverse ? "inverse" : "identity";
}

void WalkConfig::Validate() const {
  if (!(p > 0.0) || !std::isfinite(p)) throw UsageError("p must be > 0");
  if (!(q > 0.0) || !std::isfinite(q)) throw UsageError("q must be > 0");
  if (walk_length < 1) throw UsageError("walk_length must be >= 1");
  if (walks_per_node < 1) throw UsageError("walks_per_node must be >= 1");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

double TransitionWeight(double length, WeightTransform t) {
  return t == WeightTransform::kInverse ? 1.0 / length : length;
}

double SearchBias(const Graph& g, NodeId t, NodeId x, double p, double q) {
  if (x == t) return 1.0 / p;
  if (g.has_edge(t, x)) return 1.0;
  return 1.0 / q;
}

std::vector<double> TransitionProbs(const Graph& g, NodeId t, NodeId v,
                                    double p, double q,
                                    WeightTransform transform) {
  const auto nb = g.neighbors(v);
  std::vector<double> probs(nb.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    probs[k] = SearchBias(g, t, nb[k].id, p, q) *
               TransitionWeight(nb[k].weight, transform);
    total += probs[k];
  }
  for (double& x : probs) x /= total;
  return probs;
}

std::vector<double> FirstStepProbs(const Graph& g, NodeId v,
                                   WeightTransform transform) {
  const auto nb = g.neighbors(v);
  std::vector<double> probs(nb.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    probs[k] = TransitionWeight(nb[k].weight, transform);
    total += probs[k];
  }
  for (double& x : probs) x /= total;
  return probs;
}

namespace {

std::uint32_t SampleLinear(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<std::uint32_t>(k);
  }
  // Round-off: fall back to the last outcome with positive mass.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return static_cast<std::uint32_t>(k);
  }
  return 0;
}

}  // namespace

std::uint64_t TransitionTable::SecondOrderEntries(const Graph& g) {
  std::uint64_t total = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const std::uint64_t d = g.degree(v);
    total += d * d;
  }
  return total;
}

TransitionTable::TransitionTable(const Graph& g, const WalkConfig& cfg)
    : graph_(g), cfg_(cfg) {
  cfg.Validate();
  precomputed_ = SecondOrderEntries(g) <= cfg.table_budget;
  if (!precomputed_) return;

  first_.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) == 0) continue;
    first_[v] = AliasTable(FirstStepProbs(g, v, cfg.weight_transform));
  }
  second_.resize(g.directed_edge_count());
  for (NodeId t = 0; t < g.node_count(); ++t) {
    const auto nb = g.neighbors(t);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      second_[g.edge_offset(t) + k] = AliasTable(
          TransitionProbs(g, t, nb[k].id, cfg.p, cfg.q, cfg.weight_transform));
    }
  }
}

std::uint32_t TransitionTable::SampleFirst(NodeId v, Rng& rng) const {
  if (precomputed_) return first_[v].Sample(rng);
  return SampleLinear(FirstStepProbs(graph_, v, cfg_.weight_transform), rng);
}

std::uint32_t TransitionTable::SampleNext(NodeId t, NodeId v,
                                          std::size_t in_edge,
                                          Rng& rng) const {
  if (precomputed_) return second_[in_edge].Sample(rng);
  return SampleLinear(
      TransitionProbs(graph_, t, v, cfg_.p, cfg_.q, cfg_.weight_transform), rng);
}

namespace {

std::vector<NodeId> WalkFrom(const Graph& g, const TransitionTable& table,
                             NodeId source, int length, Rng& rng) {
  std::vector<NodeId> walk;
  walk.reserve(static_cast<std::size_t>(length));
  walk.push_back(source);
  if (length < 2 || g.degree(source) == 0) return walk;

  std::uint32_t slot = table.SampleFirst(source, rng);
  std::size_t in_edge = g.edge_offset(source) + slot;
  NodeId prev = source;
  NodeId cur = g.directed_edge(in_edge).id;
  walk.push_back(cur);
  while (walk.size() < static_cast<std::size_t>(length)) {
    // deg(cur) >= 1 since we arrived over an edge.
    slot = table.SampleNext(prev, cur, in_edge, rng);
    in_edge = g.edge_offset(cur) + slot;
    prev = cur;
    cur = g.directed_edge(in_edge).id;
    walk.push_back(cur);
  }
  return walk;
}

}  // namespace

WalkCorpus GenerateWalks(const Graph& g, const WalkConfig& cfg) {
  cfg.Validate();
  const TransitionTable table(g, cfg);
  const std::size_t n = g.node_count();
  const std::size_t total = n * static_cast<std::size_t>(cfg.walks_per_node);

  WalkCorpus corpus;
  corpus.walks.resize(total);
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t rep = idx / n;
      const auto source = static_cast<NodeId>(idx % n);
      Rng rng(DeriveSeed(cfg.seed, {source, rep}));
      corpus.walks[idx] = WalkFrom(g, table, source, cfg.walk_length, rng);
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), std::max<std::size_t>(total, 1));
  if (workers <= 1) {
    run(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  corpus.node_frequency.assign(n, 0);
  for (const auto& walk : corpus.walks) {
    for (NodeId v : walk) ++corpus.node_frequency[v];
  }
  return corpus;
}

void WriteCorpus(const Graph& g, const WalkCorpus& corpus,
                 const std::string& path) {
  std::ostringstream os;
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      os << (i ? " " : "") << g.label(walk[i]);
    }
    os << '\n';
  }
  WriteFile(path, os.str());
}

}  // namespace dhm
