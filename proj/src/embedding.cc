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

#include "dhm/embedding.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "dhm/error.h"
#include "dhm/text.h"

namespace dhm {

void TrainConfig::Validate() const {
  if (dim < 1) throw UsageError("dim must be >= 1");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning_rate must be > 0");
  }
  if (negatives_per_positive < 0) {
    throw UsageError("negatives_per_positive must be >= 0");
  }
  if (window < 1) throw UsageError("window must be >= 1");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

EmbeddingMatrix InitEmbeddings(std::size_t n, const TrainConfig& cfg) {
  cfg.Validate();
  if (n < 1) throw UsageError("cannot embed an empty graph");
  const auto dim = static_cast<std::size_t>(cfg.dim);
  EmbeddingMatrix emb{Matrix(n, dim), Matrix(n, dim)};
  Rng rng(DeriveSeed(cfg.seed, "init"));
  const double half = 0.5 / static_cast<double>(dim);
  for (double& x : emb.rows.data()) x = rng.Uniform(-half, half);
  return emb;
}

double LogSigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double PairLoss(std::span<const double> center,
                std::span<const double> context,
                const std::vector<std::span<const double>>& negatives) {
  double loss = -LogSigmoid(Dot(context, center));
  for (const auto& c : negatives) loss -= LogSigmoid(-Dot(c, center));
  return loss;
}

PairGradient PairLossGradient(
    std::span<const double> center, std::span<const double> context,
    const std::vector<std::span<const double>>& negatives) {
  const std::size_t dim = center.size();
  PairGradient g;
  g.loss = PairLoss(center, context, negatives);
  g.center.assign(dim, 0.0);

  // d/ds [-log s(s)] = s(s) - 1 ; d/ds [-log s(-s)] = s(s)
  const double pos = Sigmoid(Dot(context, center)) - 1.0;
  g.context.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    g.context[k] = pos * center[k];
    g.center[k] += pos * context[k];
  }
  for (const auto& c : negatives) {
    const double neg = Sigmoid(Dot(c, center));
    std::vector<double> gc(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      gc[k] = neg * center[k];
      g.center[k] += neg * c[k];
    }
    g.negatives.push_back(std::move(gc));
  }
  return g;
}

double SgnsPairStep(EmbeddingMatrix& emb, NodeId u, NodeId v,
                    std::span<const NodeId> negatives, double lr,
                    std::span<double> scratch) {
  auto r = emb.rows.row(u);
  const std::size_t dim = r.size();
  std::fill(scratch.begin(), scratch.end(), 0.0);

  const auto update = [&](NodeId target, double label) {
    auto c = emb.context_rows.row(target);
    const double s = Dot(c, r);
    // Ascent coefficient on log s(+/-s).
    const double coef = label - Sigmoid(s);
    for (std::size_t k = 0; k < dim; ++k) scratch[k] += coef * c[k];
    for (std::size_t k = 0; k < dim; ++k) c[k] += lr * coef * r[k];
    return label > 0.5 ? -LogSigmoid(s) : -LogSigmoid(-s);
  };

  double loss = update(v, 1.0);
  for (NodeId n : negatives) loss += update(n, 0.0);
  for (std::size_t k = 0; k < dim; ++k) r[k] += lr * scratch[k];
  return loss;
}

namespace {

// Same update as SgnsPairStep on tables shared between threads. Loads and
// stores are relaxed atomics; concurrent updates may interleave.
double SharedPairStep(EmbeddingMatrix& emb, NodeId u, NodeId v,
                      std::span<const NodeId> negatives, double lr,
                      std::span<double> scratch, std::span<double> local) {
  using Ref = std::atomic_ref<double>;
  auto r = emb.rows.row(u);
  const std::size_t dim = r.size();
  for (std::size_t k = 0; k < dim; ++k) {
    local[k] = Ref(r[k]).load(std::memory_order_relaxed);
  }
  std::fill(scratch.begin(), scratch.end(), 0.0);

  const auto update = [&](NodeId target, double label) {
    auto c = emb.context_rows.row(target);
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      s += Ref(c[k]).load(std::memory_order_relaxed) * local[k];
    }
    const double coef = label - Sigmoid(s);
    for (std::size_t k = 0; k < dim; ++k) {
      Ref ck(c[k]);
      const double old = ck.load(std::memory_order_relaxed);
      scratch[k] += coef * old;
      ck.store(old + lr * coef * local[k], std::memory_order_relaxed);
    }
    return label > 0.5 ? -LogSigmoid(s) : -LogSigmoid(-s);
  };

  double loss = update(v, 1.0);
  for (NodeId n : negatives) loss += update(n, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    Ref rk(r[k]);
    rk.store(rk.load(std::memory_order_relaxed) + lr * scratch[k],
             std::memory_order_relaxed);
  }
  return loss;
}

struct EpochStats {
  double loss = 0.0;
  std::uint64_t pairs = 0;
};

template <typename Step>
void RunWalks(const WalkCorpus& corpus, std::size_t first, std::size_t stride,
              const TrainConfig& cfg, const NegativeSampler& sampler,
              Rng& rng, int epoch, Step&& step, EpochStats& stats) {
  std::vector<NodeId> negs(static_cast<std::size_t>(cfg.negatives_per_positive));
  const auto window = static_cast<std::ptrdiff_t>(cfg.window);
  for (std::size_t w = first; w < corpus.walks.size(); w += stride) {
    const auto& walk = corpus.walks[w];
    const auto len = static_cast<std::ptrdiff_t>(walk.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + window);
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const NodeId u = walk[static_cast<std::size_t>(i)];
        const NodeId v = walk[static_cast<std::size_t>(j)];
        for (auto& n : negs) n = sampler.Sample(rng, v);
        const double loss = step(u, v, negs);
        if (!std::isfinite(loss)) {
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                               ", step " + std::to_string(stats.pairs));
        }
        stats.loss += loss;
        ++stats.pairs;
      }
    }
  }
}

}  // namespace

NegativeSampler::NegativeSampler(
    const std::vector<std::uint64_t>& node_frequency) {
  weights_.resize(node_frequency.size());
  for (std::size_t i = 0; i < node_frequency.size(); ++i) {
    weights_[i] = std::pow(static_cast<double>(node_frequency[i]), 0.75);
    if (weights_[i] > 0.0) ++support_;
  }
  table_ = AliasTable(weights_);
}

NodeId NegativeSampler::Sample(Rng& rng, NodeId exclude) const {
  if (support_ <= 1 && exclude < weights_.size() && weights_[exclude] > 0.0) {
    return exclude;
  }
  while (true) {
    const NodeId n = table_.Sample(rng);
    if (n != exclude) return n;
  }
}

TrainResult Train(const WalkCorpus& corpus, const TrainConfig& cfg,
                  const Graph& g, const WalkConfig& walk_cfg) {
  cfg.Validate();
  TrainResult result;
  result.embedding = InitEmbeddings(g.node_count(), cfg);
  if (cfg.epochs == 0) return result;
  if (corpus.node_frequency.size() != g.node_count()) {
    throw UsageError("corpus does not match the graph");
  }

  const auto dim = static_cast<std::size_t>(cfg.dim);
  WalkCorpus fresh;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const WalkCorpus* current = &corpus;
    if (cfg.resample_walks_each_epoch && epoch > 0) {
      WalkConfig wc = walk_cfg;
      wc.seed = DeriveSeed(walk_cfg.seed, {static_cast<std::uint64_t>(epoch)});
      fresh = GenerateWalks(g, wc);
      current = &fresh;
    }
    const NegativeSampler sampler(current->node_frequency);

    EpochStats total;
    if (cfg.threads <= 1) {
      Rng rng(DeriveSeed(cfg.seed, {0x5eedULL, static_cast<std::uint64_t>(epoch)}));
      std::vector<double> scratch(dim);
      RunWalks(*current, 0, 1, cfg, sampler, rng, epoch,
               [&](NodeId u, NodeId v, const std::vector<NodeId>& negs) {
                 return SgnsPairStep(result.embedding, u, v, negs,
                                     cfg.learning_rate, scratch);
               },
               total);
    } else {
      const auto workers = static_cast<std::size_t>(cfg.threads);
      std::vector<EpochStats> stats(workers);
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            Rng rng(DeriveSeed(cfg.seed, {0x5eedULL, static_cast<std::uint64_t>(epoch), w}));
            std::vector<double> scratch(dim), local(dim);
            RunWalks(*current, w, workers, cfg, sampler, rng, epoch,
                     [&](NodeId u, NodeId v, const std::vector<NodeId>& negs) {
                       return SharedPairStep(result.embedding, u, v, negs,
                                             cfg.learning_rate, scratch, local);
                     },
                     stats[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (const auto& s : stats) {
        total.loss += s.loss;
        total.pairs += s.pairs;
      }
    }
    result.pairs_processed += total.pairs;
    result.epoch_loss.push_back(
        total.pairs ? total.loss / static_cast<double>(total.pairs) : 0.0);
  }
  return result;
}

ZoneEmbedding Readout(const Matrix& node_rows,
                      const TractAssignment& assignment) {
  if (assignment.node_count() != node_rows.rows()) {
    throw UsageError("zone assignment covers " +
                     std::to_string(assignment.node_count()) + " nodes, embedding has " +
                     std::to_string(node_rows.rows()));
  }
  const std::size_t dim = node_rows.cols();
  ZoneEmbedding z;
  z.zone_ids = assignment.zones();
  z.matrix = Matrix(assignment.zone_count(), dim);
  z.embd_readout.resize(assignment.zone_count());
  for (std::size_t zi = 0; zi < assignment.zone_count(); ++zi) {
    const auto nodes = assignment.zone_nodes_at(zi);
    auto out = z.matrix.row(zi);
    for (NodeId v : nodes) {
      const auto row = node_rows.row(v);
      for (std::size_t k = 0; k < dim; ++k) out[k] += row[k];
    }
    const auto count = static_cast<double>(nodes.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      out[k] /= count;
      sum += out[k];
    }
    z.embd_readout[zi] = dim ? sum / static_cast<double>(dim) : 0.0;
  }
  return z;
}

void SaveEmbeddings(const LabeledMatrix& m, const std::string& path) {
  std::ostringstream os;
  os << m.values.rows() << ' ' << m.values.cols() << " seed=" << m.seed
     << " config=" << (m.config_hash.empty() ? "-" : m.config_hash) << '\n';
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    os << m.labels[r];
    for (double x : m.values.row(r)) os << ' ' << FormatDouble(x);
    os << '\n';
  }
  WriteFile(path, os.str());
}

LabeledMatrix LoadEmbeddings(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || Trim(lines[0]).empty()) {
    throw DataError(path + ": empty embedding file");
  }
  const auto header = SplitWhitespace(lines[0]);
  std::optional<long long> count, dim;
  if (header.size() >= 2) {
    count = ParseInt(header[0]);
    dim = ParseInt(header[1]);
  }
  if (!count || !dim || *count < 0 || *dim < 1) {
    throw DataError(path + ":1: corrupt header, expected '<count> <dim>'");
  }
  LabeledMatrix m;
  for (std::size_t i = 2; i < header.size(); ++i) {
    const auto& tok = header[i];
    if (tok.rfind("seed=", 0) == 0) {
      auto s = ParseInt(tok.substr(5));
      if (!s) {
        // Seeds above INT64_MAX.
        try {
          m.seed = std::stoull(tok.substr(5));
        } catch (...) {
          throw DataError(path + ":1: corrupt seed field");
        }
      } else {
        m.seed = static_cast<std::uint64_t>(*s);
      }
    } else if (tok.rfind("config=", 0) == 0) {
      m.config_hash = tok.substr(7);
    } else {
      throw DataError(path + ":1: unexpected header token '" + tok + "'");
    }
  }

  const auto rows = static_cast<std::size_t>(*count);
  const auto cols = static_cast<std::size_t>(*dim);
  m.values = Matrix(rows, cols);
  std::size_t r = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const auto tokens = SplitWhitespace(lines[i]);
    if (tokens.size() != cols + 1) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected " +
                      std::to_string(cols) + " values, found " +
                      std::to_string(tokens.empty() ? 0 : tokens.size() - 1));
    }
    if (r >= rows) {
      throw DataError(path + ": more rows than the header count " +
                      std::to_string(rows));
    }
    m.labels.push_back(tokens[0]);
    for (std::size_t k = 0; k < cols; ++k) {
      auto v = ParseDouble(tokens[k + 1]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(path + ":" + std::to_string(i + 1) + ": bad value '" +
                        tokens[k + 1] + "'");
      }
      m.values(r, k) = *v;
    }
    ++r;
  }
  if (r != rows) {
    throw DataError(path + ": header declares " + std::to_string(rows) +
                    " rows, found " + std::to_string(r));
  }
  return m;
}

ZoneEmbedding ToZoneEmbedding(const LabeledMatrix& m) {
  ZoneEmbedding z;
  z.zone_ids = m.labels;
  z.matrix = m.values;
  z.embd_readout.resize(m.values.rows());
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    double sum = 0.0;
    for (double x : m.values.row(r)) sum += x;
    z.embd_readout[r] = sum / static_cast<double>(m.values.cols());
  }
  return z;
}

LabeledMatrix ToLabeled(const ZoneEmbedding& z) {
  LabeledMatrix m;
  m.labels = z.zone_ids;
  m.values = z.matrix;
  return m;
}

std::string ConfigHash(const TrainConfig& t, const WalkConfig& w) {
  std::ostringstream os;
  os << "dim=" << t.dim << ";epochs=" << t.epochs
     << ";lr=" << FormatDouble(t.learning_rate)
     << ";neg=" << t.negatives_per_positive << ";window=" << t.window
     << ";resample=" << t.resample_walks_each_epoch << ";p=" << FormatDouble(w.p)
     << ";q=" << FormatDouble(w.q) << ";l=" << w.walk_length
     << ";walks=" << w.walks_per_node << ";wt=" << ToString(w.weight_transform)
     << ";walk_seed=" << w.seed;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(HashString(os.str())));
  return buf;
}

}  // namespace dhm
