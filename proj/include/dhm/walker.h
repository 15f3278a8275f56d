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

// Second-order biased random walks.
//
// After traversing t -> v, the walk moves to neighbor x of v with
// probability proportional to bias(t, x) * w(v, x), where bias is 1/p when
// x == t, 1 when x is adjacent to t and 1/q otherwise. The first step of
// a walk has no predecessor and is weight-proportional.

#ifndef DHM_WALKER_H_
#define DHM_WALKER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dhm/alias.h"
#include "dhm/graph.h"

namespace dhm {

// How an edge length enters the transition weight.
enum class WeightTransform {
  kInverse,   // w = 1 / length: nearby intersections are preferred
  kIdentity,  // w = length
};

WeightTransform ParseWeightTransform(const std::string& name);
std::string ToString(WeightTransform t);

struct WalkConfig {
  double p = 1.0;
  double q = 1.0;
  int walk_length = 20;
  int walks_per_node = 10;
  std::uint64_t seed = 1;
  WeightTransform weight_transform = WeightTransform::kInverse;
  // Above this many second-order entries, transitions are normalized on the
  // fly instead of being precomputed.
  std::uint64_t table_budget = 100'000'000;
  int threads = 1;

  // Throws UsageError on an invalid field.
  void Validate() const;
};

double TransitionWeight(double length, WeightTransform t);

// Search bias for moving to x after arriving from t. x must neighbor the
// current node, so the t-x distance is 0, 1 or 2.
double SearchBias(const Graph& g, NodeId t, NodeId x, double p, double q);

// Normalized distribution over neighbors(v) after the step t -> v.
std::vector<double> TransitionProbs(
    const Graph& g, NodeId t, NodeId v, double p, double q,
    WeightTransform transform);

// First-step distribution over neighbors(v).
std::vector<double> FirstStepProbs(const Graph& g, NodeId v,
                                   WeightTransform transform);

class TransitionTable {
 public:
  TransitionTable(const Graph& g, const WalkConfig& cfg);

  bool precomputed() const { return precomputed_; }

  // Slot k in neighbors(v) for the first move away from v.
  std::uint32_t SampleFirst(NodeId v, Rng& rng) const;

  // Slot in neighbors(v) after arriving over the directed edge with flat
  // offset `in_edge` (an edge t -> v).
  std::uint32_t SampleNext(NodeId t, NodeId v, std::size_t in_edge,
                           Rng& rng) const;

  // Number of second-order entries, sum over v of deg(v)^2.
  static std::uint64_t SecondOrderEntries(const Graph& g);

 private:
  const Graph& graph_;
  WalkConfig cfg_;
  bool precomputed_ = false;
  std::vector<AliasTable> first_;
  std::vector<AliasTable> second_;  // indexed by directed edge offset
};

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  std::vector<std::uint64_t> node_frequency;
};

// walks_per_node * N walks, ordered repetition-major (all sources for
// repetition 0, then repetition 1, ...). Each walk draws from its own
// stream seeded by (seed, source, repetition), so the corpus does not
// depend on the thread count.
WalkCorpus GenerateWalks(const Graph& g, const WalkConfig& cfg);

// One line per walk, space-separated node labels.
void WriteCorpus(const Graph& g, const WalkCorpus& corpus,
                 const std::string& path);

}  // namespace dhm

#endif  // DHM_WALKER_H_
