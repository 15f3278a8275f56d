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


#include "dhm/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <type_traits>
#include <sstream>

#include "dhm/error.h"
#include "dhm/mnl.h"
#include "dhm/random.h"
#include "dhm/text.h"

namespace dhm {
namespace {

constexpr int kMaxAttempts = 10;

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw UsageError(std::string(name) + " must be in [0, 1], got " + FormatShort(p));
  }
}

int SideOf(int n) { return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))); }

std::string ZoneLabel(int z) {
  std::string s = std::to_string(z + 1);
  return "Z" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool Connected(const Graph& g) {
  if (g.node_count() == 0) return true;
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<NodeId> stack = {0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : g.neighbors(v)) {
      if (!seen[nb.id]) {
        seen[nb.id] = 1;
        ++count;
        stack.push_back(nb.id);
      }
    }
  }
  return count == g.node_count();
}

struct Layout {
  int side;  // lattice width inside a zone
  int npz;
  // Local index at lattice cell (x, y), or -1 past the last node.
  int at(int x, int y) const {
    const int i = y * side + x;
    return (x >= 0 && x < side && y >= 0 && i < npz) ? i : -1;
  }
  int rows() const { return (npz + side - 1) / side; }
};

SynthDataset GenerateOnce(const SynthConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const int nz = cfg.n_zones;
  const Layout lay{SideOf(cfg.nodes_per_zone), cfg.nodes_per_zone};
  const auto node = [&](int z, int local) {
    return static_cast<NodeId>(z * cfg.nodes_per_zone + local);
  };
  const auto jitter = [&] { return 1.0 + rng.Uniform(0.0, 0.1); };

  SynthDataset d;
  d.config = cfg;
  std::vector<std::string> labels;
  std::vector<std::string> zone_of;
  for (int z = 0; z < nz; ++z) {
    for (int i = 0; i < cfg.nodes_per_zone; ++i) {
      labels.push_back(ZoneLabel(z) + "_" + std::to_string(i));
      zone_of.push_back(ZoneLabel(z));
    }
  }

  // Dense zones cluster along a downtown edge picked per city: zones are
  // ranked by normalized distance from that edge plus layout jitter, and
  // the closest dense_zone_fraction become dense.
  const int zside = SideOf(nz);
  const int zrows = (nz + zside - 1) / zside;
  const auto downtown = rng.Below(4);
  std::vector<std::pair<double, int>> rank;
  for (int z = 0; z < nz; ++z) {
    const double x = zside > 1 ? static_cast<double>(z % zside) / (zside - 1) : 0.0;
    const double y = zrows > 1 ? static_cast<double>(z / zside) / (zrows - 1) : 0.0;
    const double dist = downtown == 0 ? x : downtown == 1 ? 1.0 - x
                      : downtown == 2 ? y : 1.0 - y;
    rank.emplace_back(dist + cfg.layout_jitter * rng.Normal(), z);
  }
  std::sort(rank.begin(), rank.end());
  const int n_dense = static_cast<int>(std::lround(cfg.dense_zone_fraction * nz));
  d.dense.assign(nz, 0);
  for (int k = 0; k < n_dense; ++k) d.dense[rank[k].second] = 1;

  std::vector<Edge> edges;
  std::vector<std::size_t> intra(nz, 0);
  for (int z = 0; z < nz; ++z) {
    std::vector<std::pair<int, int>> cand;
    for (int y = 0; y < lay.rows(); ++y) {
      for (int x = 0; x < lay.side; ++x) {
        const int i = lay.at(x, y);
        if (i < 0) continue;
        if (const int r = lay.at(x + 1, y); r >= 0) cand.emplace_back(i, r);
        if (const int b = lay.at(x, y + 1); b >= 0) cand.emplace_back(i, b);
      }
    }
    rng.Shuffle(cand.begin(), cand.end());
    // Random spanning tree first, then extras.
    DisjointSets sets(cfg.nodes_per_zone);
    std::vector<std::uint8_t> used(cand.size(), 0);
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (sets.Union(cand[k].first, cand[k].second)) used[k] = 1;
    }
    const double extra = d.dense[z] ? cfg.intra_edge_prob_dense : cfg.intra_edge_prob_sparse;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (!used[k] && rng.Bernoulli(extra)) used[k] = 1;
    }
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (!used[k]) continue;
      edges.push_back({node(z, cand[k].first), node(z, cand[k].second), jitter()});
      ++intra[z];
    }
  }

  // Facing boundary cells of neighbouring zones are linked with
  // inter_edge_prob.
  for (int z = 0; z < nz; ++z) {
    const int zx = z % zside;
    if (zx + 1 < zside && z + 1 < nz) {
      for (int y = 0; y < lay.rows(); ++y) {
        int a = -1;
        for (int x = lay.side - 1; x >= 0 && a < 0; --x) a = lay.at(x, y);
        const int b = lay.at(0, y);
        if (a >= 0 && b >= 0 && rng.Bernoulli(cfg.inter_edge_prob)) {
          edges.push_back({node(z, a), node(z + 1, b), jitter()});
        }
      }
    }
    if (z + zside < nz) {
      for (int x = 0; x < lay.side; ++x) {
        int a = -1;
        for (int y = lay.rows() - 1; y >= 0 && a < 0; --y) a = lay.at(x, y);
        const int b = lay.at(x, 0);
        if (a >= 0 && b >= 0 && rng.Bernoulli(cfg.inter_edge_prob)) {
          edges.push_back({node(z, a), node(z + zside, b), jitter()});
        }
      }
    }
  }
  d.graph = Graph::FromEdges(labels, edges);
  d.assignment = TractAssignment(zone_of);

  d.intra_density.resize(nz);
  for (int z = 0; z < nz; ++z) {
    d.intra_density[z] = static_cast<double>(intra[z]) / cfg.nodes_per_zone;
  }
  const auto [lo, hi] = std::minmax_element(d.intra_density.begin(), d.intra_density.end());
  d.planted.resize(nz);
  for (int z = 0; z < nz; ++z) {
    d.planted[z] = *hi > *lo ? (d.intra_density[z] - *lo) / (*hi - *lo) : 0.5;
  }

  const auto& modes = SynthModes();
  const std::size_t m = modes.size();
  d.shares.zone_ids = d.assignment.zones();
  for (const auto& c : modes) d.shares.mode_names.push_back(c.mode);
  d.shares.shares = Matrix(nz, m);
  std::vector<double> u(m);
  for (int z = 0; z < nz; ++z) {
    for (std::size_t k = 0; k < m; ++k) {
      u[k] = modes[k].a + modes[k].b * d.planted[z] + cfg.share_noise_scale * rng.Normal();
    }
    const auto p = Softmax(u);
    for (std::size_t k = 0; k < m; ++k) d.shares.shares(z, k) = p[k];
  }

  const int nf = cfg.n_baseline_features;
  d.features.zone_ids = d.assignment.zones();
  for (int j = 0; j < nf; ++j) d.features.column_names.push_back("f" + std::to_string(j + 1));
  d.features.values = Matrix(nz, nf);
  d.features.missing.assign(static_cast<std::size_t>(nz) * nf, 0);
  for (int z = 0; z < nz; ++z) {
    for (int j = 0; j < nf; ++j) {
      d.features.values(z, j) =
          cfg.feature_signal * d.planted[z] + (1.0 - cfg.feature_signal) * rng.Normal();
    }
  }

  d.areas.resize(nz);
  for (int z = 0; z < nz; ++z) d.areas[z] = rng.Uniform(0.5, 1.5);
  return d;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_zones < 4) throw UsageError("n_zones must be >= 4");
  if (nodes_per_zone < 3) throw UsageError("nodes_per_zone must be >= 3");
  if (n_baseline_features < 1) throw UsageError("n_baseline_features must be >= 1");
  CheckProbability(dense_zone_fraction, "dense_zone_fraction");
  CheckProbability(intra_edge_prob_dense, "intra_edge_prob_dense");
  CheckProbability(intra_edge_prob_sparse, "intra_edge_prob_sparse");
  CheckProbability(inter_edge_prob, "inter_edge_prob");
  CheckProbability(feature_signal, "feature_signal");
  if (!(layout_jitter >= 0.0) || !std::isfinite(layout_jitter)) {
    throw UsageError("layout_jitter must be a finite non-negative number");
  }
  if (!(share_noise_scale >= 0.0) || !std::isfinite(share_noise_scale)) {
    throw UsageError("share_noise_scale must be a finite non-negative number");
  }
}

std::string SynthConfig::ToText() const {
  std::ostringstream out;
  out << "n_zones = " << n_zones << "\n"
      << "nodes_per_zone = " << nodes_per_zone << "\n"
      << "dense_zone_fraction = " << FormatShort(dense_zone_fraction) << "\n"
      << "layout_jitter = " << FormatShort(layout_jitter) << "\n"
      << "intra_edge_prob_dense = " << FormatShort(intra_edge_prob_dense) << "\n"
      << "intra_edge_prob_sparse = " << FormatShort(intra_edge_prob_sparse) << "\n"
      << "inter_edge_prob = " << FormatShort(inter_edge_prob) << "\n"
      << "n_baseline_features = " << n_baseline_features << "\n"
      << "feature_signal = " << FormatShort(feature_signal) << "\n"
      << "share_noise_scale = " << FormatShort(share_noise_scale) << "\n"
      << "seed = " << seed << "\n";
  return out.str();
}

SynthConfig ParseSynthConfig(const std::vector<KeyValue>& entries,
                             const std::string& source) {
  SynthConfig c;
  for (const auto& kv : entries) {
    const std::string where = source + ":" + std::to_string(kv.line);
    const auto real = [&](double& out) {
      const auto v = ParseDouble(kv.value);
      if (!v) throw DataError(where + ": '" + kv.key + "' is not a number");
      out = *v;
    };
    const auto integer = [&](auto& out) {
      const auto v = ParseInt(kv.value);
      if (!v) throw DataError(where + ": '" + kv.key + "' is not an integer");
      out = static_cast<std::remove_reference_t<decltype(out)>>(*v);
    };
    if (kv.key == "n_zones") integer(c.n_zones);
    else if (kv.key == "nodes_per_zone") integer(c.nodes_per_zone);
    else if (kv.key == "dense_zone_fraction") real(c.dense_zone_fraction);
    else if (kv.key == "layout_jitter") real(c.layout_jitter);
    else if (kv.key == "intra_edge_prob_dense") real(c.intra_edge_prob_dense);
    else if (kv.key == "intra_edge_prob_sparse") real(c.intra_edge_prob_sparse);
    else if (kv.key == "inter_edge_prob") real(c.inter_edge_prob);
    else if (kv.key == "n_baseline_features") integer(c.n_baseline_features);
    else if (kv.key == "feature_signal") real(c.feature_signal);
    else if (kv.key == "share_noise_scale") real(c.share_noise_scale);
    else if (kv.key == "seed") integer(c.seed);
    else if (kv.key.starts_with("mode.") || kv.key == "attempts") continue;
    else throw DataError(where + ": unknown key '" + kv.key + "'");
  }
  return c;
}

const std::vector<ModeCoefficients>& SynthModes() {
  static const std::vector<ModeCoefficients> modes = {
      {"driving", 0.5, -2.0},
      {"transit", 0.0, 0.0},
      {"walking", -1.0, 2.0},
  };
  return modes;
}

ZoneMap SynthDataset::zone_map() const {
  ZoneMap m;
  m.zone_order = assignment.zones();
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    m.zone_of.emplace(graph.label(v), assignment.zone_of(v));
  }
  return m;
}

std::string SynthDataset::Manifest() const {
  std::ostringstream out;
  out << "# synthetic city\n" << config.ToText() << "attempts = " << attempts << "\n";
  for (const auto& c : SynthModes()) {
    out << "mode." << c.mode << ".a = " << FormatShort(c.a) << "\n"
        << "mode." << c.mode << ".b = " << FormatShort(c.b) << "\n";
  }
  return out.str();
}

SynthDataset GenerateCity(const SynthConfig& cfg) {
  cfg.Validate();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    SynthDataset d = GenerateOnce(cfg, DeriveSeed(cfg.seed, {0x5c17u, std::uint64_t(attempt)}));
    if (Connected(d.graph)) {
      d.attempts = attempt + 1;
      return d;
    }
  }
  throw DataError("synthetic graph still disconnected after " +
                  std::to_string(kMaxAttempts) + " attempts; raise inter_edge_prob");
}

void WriteDataset(const SynthDataset& data, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  WriteEdgeCsv(data.graph, (base / "edges.csv").string());
  WriteZoneCsv(data.graph, data.assignment, (base / "zones.csv").string());
  WriteFeatureCsv(data.features, (base / "features.csv").string());
  WriteShareCsv(data.shares, (base / "shares.csv").string());
  WriteAreaCsv(data.assignment.zones(), data.areas, (base / "areas.csv").string());
  WriteFile((base / "manifest.txt").string(), data.Manifest());
}

std::vector<ModeDelta> CompareInputs(const EvaluationReport& report) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<ModeDelta> out;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (const auto& cell : report.cells) {
    const auto key = std::make_pair(cell.predictor, cell.travel_mode);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({cell.predictor, cell.travel_mode, kNaN, kNaN, kNaN});
    }
    ModeDelta& d = out[it->second];
    if (cell.input_mode == ToString(InputMode::kBaseline)) d.baseline = cell.osr2;
    if (cell.input_mode == ToString(InputMode::kGer)) d.ger = cell.osr2;
    if (cell.input_mode == ToString(InputMode::kConcat)) d.concat = cell.osr2;
  }
  return out;
}

ExperimentResult RunExperiment(const SynthConfig& synth, const PipelineConfig& cfg) {
  const SynthDataset data = GenerateCity(synth);
  ExperimentResult res;
  res.pipeline = RunPipeline(data.graph, data.zone_map(), data.features, data.shares, cfg);
  res.deltas = CompareInputs(res.pipeline.report);
  return res;
}

std::string DeltaCsv(const std::vector<ModeDelta>& deltas) {
  std::string out = "predictor,travel_mode,baseline,ger,concat,ger_delta,concat_delta\n";
  for (const auto& d : deltas) {
    out += d.predictor + "," + d.travel_mode + "," + FormatShort(d.baseline) + "," +
           FormatShort(d.ger) + "," + FormatShort(d.concat) + "," +
           FormatShort(d.ger - d.baseline) + "," + FormatShort(d.concat - d.baseline) + "\n";
  }
  return out;
}

}  // namespace dhm
