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

// Skip-gram with negative sampling over a walk corpus, and mean-pooling of
// node embeddings into zone embeddings.

#ifndef DHM_EMBEDDING_H_
#define DHM_EMBEDDING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dhm/alias.h"
#include "dhm/graph.h"
#include "dhm/matrix.h"
#include "dhm/walker.h"

namespace dhm {

struct TrainConfig {
  int dim = 128;
  int epochs = 100;
  double learning_rate = 0.01;
  int negatives_per_positive = 1;
  int window = 5;
  std::uint64_t seed = 1;
  bool resample_walks_each_epoch = false;
  // 1 = deterministic single-threaded SGD. More threads run lock-free
  // updates on shared tables; results then depend on the thread count.
  int threads = 1;

  void Validate() const;
};

// Center table `rows` is the exported embedding; `context_rows` is the
// output layer.
struct EmbeddingMatrix {
  Matrix rows;
  Matrix context_rows;
};

// rows ~ U[-0.5/dim, 0.5/dim] from the seed, context rows zero.
EmbeddingMatrix InitEmbeddings(std::size_t n, const TrainConfig& cfg);

// log(sigmoid(x)) without overflow.
double LogSigmoid(double x);
double Sigmoid(double x);

// Negative of  log s(c_v . r_u) + sum_n log s(-c_n . r_u).
double PairLoss(std::span<const double> center,
                std::span<const double> context,
                const std::vector<std::span<const double>>& negatives);

// Gradient of PairLoss with respect to the center row, the positive
// context row and each negative context row.
struct PairGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};
PairGradient PairLossGradient(std::span<const double> center,
                              std::span<const double> context,
                              const std::vector<std::span<const double>>& negatives);

// One SGD step on the pair (u, v) with the given negatives. All three
// gradients are taken at the pre-step values. Returns the pre-step loss.
// `scratch` must have size dim.
double SgnsPairStep(EmbeddingMatrix& emb, NodeId u, NodeId v,
                    std::span<const NodeId> negatives, double lr,
                    std::span<double> scratch);

// Noise distribution over nodes, proportional to corpus frequency^0.75.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::uint64_t>& node_frequency);

  // Redraws while the sample equals `exclude`. If `exclude` holds all the
  // mass it is returned as is.
  NodeId Sample(Rng& rng, NodeId exclude) const;

  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  AliasTable table_;
  std::size_t support_ = 0;
};

struct TrainResult {
  EmbeddingMatrix embedding;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
  std::uint64_t pairs_processed = 0;
};

// Runs `cfg.epochs` passes over the corpus. For every walk position i and
// every j with 0 < |i - j| <= window, (walk[i], walk[j]) is one positive
// pair. With resample_walks_each_epoch, epochs after the first use a fresh
// corpus seeded from (walk seed, epoch).
TrainResult Train(const WalkCorpus& corpus, const TrainConfig& cfg,
                  const Graph& g, const WalkConfig& walk_cfg);

struct ZoneEmbedding {
  std::vector<std::string> zone_ids;
  Matrix matrix;
  std::vector<double> embd_readout;  // row means
};

// Zone row = arithmetic mean of its nodes' rows.
ZoneEmbedding Readout(const Matrix& node_rows, const TractAssignment& assignment);

// Row labels plus values, as stored on disk.
struct LabeledMatrix {
  std::vector<std::string> labels;
  Matrix values;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Format: first line "<count> <dim> seed=<s> config=<hash>", then one line
// per row "<label> v1 ... vdim" with 17 significant digits.
void SaveEmbeddings(const LabeledMatrix& m, const std::string& path);
LabeledMatrix LoadEmbeddings(const std::string& path);

ZoneEmbedding ToZoneEmbedding(const LabeledMatrix& m);
LabeledMatrix ToLabeled(const ZoneEmbedding& z);

std::string ConfigHash(const TrainConfig& t, const WalkConfig& w);

}  // namespace dhm

#endif  // DHM_EMBEDDING_H_
