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

#include "dhm/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "dhm/error.h"
#include "dhm/random.h"
#include "dhm/text.h"

namespace dhm {

void SplitSpec::Validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must be in (0, 1)");
  }
}

TrainTestSplit SplitIndices(std::size_t n, const SplitSpec& spec) {
  spec.Validate();
  if (n < 2) throw UsageError("need at least 2 rows to split");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(DeriveSeed(spec.seed, "split"));
  rng.Shuffle(idx.begin(), idx.end());
  auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  TrainTestSplit s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double RSquared(std::span<const double> y, std::span<const double> f) {
  if (y.size() != f.size()) throw UsageError("r_squared: length mismatch");
  if (y.size() < 2) throw UsageError("r_squared: need at least 2 values");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - f[i]) * (y[i] - f[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (!(sst > 0.0)) throw NumericalError("r_squared: target is constant");
  return 1.0 - sse / sst;
}

PearsonResult Pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("pearson: length mismatch");
  PearsonResult res;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    sa += a[i];
    sb += b[i];
    ++res.pairs;
  }
  if (res.pairs < 2) {
    res.degenerate = true;
    return res;
  }
  const double ma = sa / static_cast<double>(res.pairs);
  const double mb = sb / static_cast<double>(res.pairs);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    const double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (!(va > 0.0) || !(vb > 0.0)) {
    res.degenerate = true;
    return res;
  }
  res.r = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
  return res;
}

std::optional<std::size_t> CorrelationMatrix::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

double CorrelationMatrix::at(const std::string& a, const std::string& b) const {
  auto i = find(a), j = find(b);
  if (!i || !j) throw UsageError("unknown variable in correlation matrix");
  return r(*i, *j);
}

CorrelationMatrix BuildCorrelationMatrix(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw UsageError("names/columns mismatch");
  const std::size_t v = names.size();
  CorrelationMatrix c;
  c.names = names;
  c.r = Matrix(v, v);
  c.degenerate.assign(v * v, 0);
  for (std::size_t i = 0; i < v; ++i) {
    c.r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < v; ++j) {
      const PearsonResult p = Pearson(columns[i], columns[j]);
      c.r(i, j) = c.r(j, i) = p.r;
      c.degenerate[i * v + j] = c.degenerate[j * v + i] = p.degenerate;
    }
  }
  return c;
}

CorrelationMatrix CorrelateTables(const FeatureTable& features,
                                  const ModeShareTable& shares,
                                  const ZoneEmbedding* zone_emb) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = features.zone_ids.size();
  std::vector<std::string> names = features.column_names;
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < features.column_names.size(); ++c) {
    columns.push_back(features.values.column(c));
  }

  std::unordered_map<std::string, std::size_t> share_row;
  for (std::size_t r = 0; r < shares.zone_ids.size(); ++r) {
    share_row.emplace(shares.zone_ids[r], r);
  }
  for (std::size_t m = 0; m < shares.mode_names.size(); ++m) {
    names.push_back(shares.mode_names[m]);
    std::vector<double> col(n, nan);
    for (std::size_t r = 0; r < n; ++r) {
      auto it = share_row.find(features.zone_ids[r]);
      if (it != share_row.end()) col[r] = shares.shares(it->second, m);
    }
    columns.push_back(std::move(col));
  }
  if (zone_emb) {
    std::unordered_map<std::string, std::size_t> emb_row;
    for (std::size_t r = 0; r < zone_emb->zone_ids.size(); ++r) {
      emb_row.emplace(zone_emb->zone_ids[r], r);
    }
    names.push_back("embd_readout");
    std::vector<double> col(n, nan);
    for (std::size_t r = 0; r < n; ++r) {
      auto it = emb_row.find(features.zone_ids[r]);
      if (it != emb_row.end()) col[r] = zone_emb->embd_readout[it->second];
    }
    columns.push_back(std::move(col));
  }
  return BuildCorrelationMatrix(names, columns);
}

std::vector<std::string> SelectFeatures(const CorrelationMatrix& corr,
                                        const std::vector<std::string>& modes,
                                        double threshold) {
  std::vector<std::size_t> mode_idx;
  for (const auto& m : modes) {
    auto i = corr.find(m);
    if (!i) throw UsageError("mode '" + m + "' is not in the correlation matrix");
    mode_idx.push_back(*i);
  }
  std::vector<std::string> kept;
  for (std::size_t f = 0; f < corr.names.size(); ++f) {
    if (std::find(mode_idx.begin(), mode_idx.end(), f) != mode_idx.end()) continue;
    bool ok = true;
    for (std::size_t m : mode_idx) ok = ok && std::fabs(corr.r(f, m)) >= threshold;
    if (ok) kept.push_back(corr.names[f]);
  }
  return kept;
}

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Nearest centroid; `current` wins ties so that fixed points are stable,
// otherwise the lowest index.
std::size_t Nearest(std::span<const double> x, const Matrix& centroids,
                    std::size_t current) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = SquaredDistance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (current < centroids.rows() &&
      SquaredDistance(x, centroids.row(current)) == best_d) {
    return current;
  }
  return best;
}

}  // namespace

KMeansResult KMeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    int max_iters) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k < 1 || k > n) {
    throw UsageError("k must be in [1, " + std::to_string(n) + "], got " +
                     std::to_string(k));
  }
  Rng rng(DeriveSeed(seed, "kmeans"));
  KMeansResult res;
  Matrix& cent = res.centroids;
  cent = Matrix(k, d);

  // k-means++ seeding.
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.Below(n);
  chosen[first] = true;
  std::copy(points.row(first).begin(), points.row(first).end(), cent.row(0).begin());
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = SquaredDistance(points.row(i), cent.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : dist[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.Uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += dist[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (!chosen[i] && dist[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Remaining points coincide with chosen centroids.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    std::copy(points.row(pick).begin(), points.row(pick).end(), cent.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], SquaredDistance(points.row(i), cent.row(c)));
    }
  }

  res.labels.assign(n, k);
  for (std::size_t i = 0; i < n; ++i) res.labels[i] = Nearest(points.row(i), cent, k);

  for (int it = 0; it < max_iters; ++it) {
    res.iterations = it + 1;
    // Re-seed empty clusters from the farthest point.
    while (true) {
      std::vector<std::size_t> size(k, 0);
      for (std::size_t l : res.labels) ++size[l];
      std::size_t empty = k;
      for (std::size_t c = 0; c < k && empty == k; ++c) {
        if (size[c] == 0) empty = c;
      }
      if (empty == k) break;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (size[res.labels[i]] < 2) continue;
        const double dd = SquaredDistance(points.row(i), cent.row(res.labels[i]));
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      res.labels[far] = empty;
      std::copy(points.row(far).begin(), points.row(far).end(), cent.row(empty).begin());
    }

    // Update step.
    Matrix sum(k, d);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sum.row(res.labels[i]);
      const auto p = points.row(i);
      for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
      ++count[res.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        cent(c, j) = sum(c, j) / static_cast<double>(count[c]);
      }
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wcss += SquaredDistance(points.row(i), cent.row(res.labels[i]));
    }
    res.wcss_history.push_back(wcss);

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t l = Nearest(points.row(i), cent, res.labels[i]);
      if (l != res.labels[i]) {
        res.labels[i] = l;
        changed = true;
      }
    }
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

std::vector<QuantileZone> QuantileZones(std::span<const double> values,
                                        const std::vector<std::string>& zone_ids,
                                        const std::vector<double>& quantiles) {
  if (values.size() != zone_ids.size()) throw UsageError("values/zones mismatch");
  if (values.empty()) throw UsageError("no zones");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  const double last = static_cast<double>(values.size() - 1);
  std::vector<QuantileZone> out;
  for (double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw UsageError("quantile outside [0, 1]");
    const auto rank = static_cast<std::size_t>(std::floor(q * last + 1e-9));
    const std::size_t i = order[std::min(rank, values.size() - 1)];
    out.push_back({q, zone_ids[i], values[i]});
  }
  return out;
}

std::vector<PredictorParams> DefaultGrid(PredictorKind kind, std::uint64_t seed,
                                         const MnlFitOptions& mnl) {
  std::vector<PredictorParams> grid;
  const int depths[] = {4, 8, -1};
  switch (kind) {
    case PredictorKind::kMnl: {
      PredictorParams p;
      p.kind = kind;
      p.mnl = mnl;
      grid.push_back(p);
      break;
    }
    case PredictorKind::kRandomForest:
      for (int trees : {100, 300}) {
        for (int depth : depths) {
          PredictorParams p;
          p.kind = kind;
          p.forest.n_trees = trees;
          p.forest.max_depth = depth;
          p.forest.seed = seed;
          grid.push_back(p);
        }
      }
      break;
    case PredictorKind::kGradientBoost:
      for (int rounds : {100, 300}) {
        for (double shrink : {0.05, 0.1}) {
          for (int depth : depths) {
            PredictorParams p;
            p.kind = kind;
            p.boost.n_rounds = rounds;
            p.boost.shrinkage = shrink;
            p.boost.max_depth = depth;
            grid.push_back(p);
          }
        }
      }
      break;
  }
  return grid;
}

std::vector<ReportCell> Evaluate(PredictorKind kind, InputMode mode,
                                 const FeatureTable& features,
                                 const ZoneEmbedding& zone_emb,
                                 const ModeShareTable& shares,
                                 const SplitSpec& split,
                                 const std::vector<PredictorParams>& grid) {
  const std::string cell = ToString(kind) + "/" + ToString(mode) + ": ";
  try {
    if (grid.empty()) throw UsageError("empty hyperparameter grid");
    const MixedInput input = Mix(features, zone_emb, mode);
    const Matrix y = AlignShares(shares, input.zone_ids);
    const TrainTestSplit s = SplitIndices(input.zone_ids.size(), split);
    const std::size_t modes = shares.mode_names.size();

    std::vector<ReportCell> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const PredictorParams& params : grid) {
      if (params.kind != kind) throw UsageError("grid entry of the wrong kind");
      const FittedPredictor fp =
          FitPredictor(input, y, shares.mode_names, s.train, params);
      const Matrix pred = fp.Predict(input.design);
      std::vector<ReportCell> cells;
      double score = 0.0;
      for (std::size_t m = 0; m < modes; ++m) {
        std::vector<double> yt, ft, ys, fs;
        for (std::size_t r : s.train) {
          yt.push_back(y(r, m));
          ft.push_back(pred(r, m));
        }
        for (std::size_t r : s.test) {
          ys.push_back(y(r, m));
          fs.push_back(pred(r, m));
        }
        ReportCell c;
        c.predictor = ToString(kind);
        c.input_mode = ToString(mode);
        c.travel_mode = shares.mode_names[m];
        c.isr2 = RSquared(yt, ft);
        c.osr2 = RSquared(ys, fs);
        c.params = fp.params;
        score += c.osr2;
        cells.push_back(std::move(c));
      }
      score /= static_cast<double>(modes);
      if (score > best_score) {
        best_score = score;
        best = std::move(cells);
      }
    }
    return best;
  } catch (const UsageError& e) {
    throw UsageError(cell + e.what());
  } catch (const DataError& e) {
    throw DataError(cell + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(cell + e.what());
  }
}

std::string ReportCsv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "predictor,input_mode,travel_mode,isr2,osr2,params\n";
  for (const auto& c : report.cells) {
    os << c.predictor << ',' << c.input_mode << ',' << c.travel_mode << ','
       << FormatDouble(c.isr2) << ',' << FormatDouble(c.osr2) << ',' << c.params
       << '\n';
  }
  return os.str();
}

std::string CorrelationCsv(const CorrelationMatrix& corr) {
  std::ostringstream os;
  os << "variable";
  for (const auto& n : corr.names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < corr.names.size(); ++i) {
    os << corr.names[i];
    for (std::size_t j = 0; j < corr.names.size(); ++j) {
      os << ',' << FormatDouble(corr.r(i, j));
    }
    os << '\n';
  }
  return os.str();
}

std::string ClusterCsv(const std::vector<std::string>& zone_ids,
                       const std::vector<std::size_t>& labels) {
  std::ostringstream os;
  os << "zone,cluster\n";
  for (std::size_t i = 0; i < zone_ids.size(); ++i) {
    os << zone_ids[i] << ',' << labels[i] << '\n';
  }
  return os.str();
}

std::string QuantileCsv(const std::vector<QuantileZone>& rows) {
  std::ostringstream os;
  os << "quantile,zone,embd_readout\n";
  for (const auto& q : rows) {
    os << FormatShort(q.quantile) << ',' << q.zone << ',' << FormatDouble(q.value)
       << '\n';
  }
  return os.str();
}

}  // namespace dhm
