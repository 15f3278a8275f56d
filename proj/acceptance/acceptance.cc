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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dhm/alias.h"
#include "dhm/config.h"
#include "dhm/embedding.h"
#include "dhm/evaluation.h"
#include "dhm/mnl.h"
#include "dhm/synth.h"
#include "dhm/topology.h"
#include "dhm/trees.h"
#include "dhm/walker.h"
#include "../tests/test_util.h"

namespace dhm {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Walk statistics against brute-force enumeration of the second-order chain.
Outcome WalkBias() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, Graph>> graphs{
      {"path", testing::PathGraph(5)},
      {"cycle", testing::CycleGraph(5)},
      {"star", testing::StarGraph(4)},
      {"triangle+tail", testing::TriangleTail()}};
  const std::vector<std::pair<double, double>> biases{{1, 1}, {4, 0.25}, {0.25, 4}};
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (const auto& [name, g] : graphs) {
    for (const auto& [p, q] : biases) {
      WalkConfig cfg;
      cfg.p = p;
      cfg.q = q;
      cfg.seed = seed++;
      cfg.walks_per_node = static_cast<int>(100000 / g.node_count());
      const WalkCorpus corpus = GenerateWalks(g, cfg);
      std::map<std::pair<int, int>, double> seen;
      double total = 0.0;
      for (const auto& w : corpus.walks) {
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
          seen[{static_cast<int>(w[i]), static_cast<int>(w[i + 1])}] += 1.0;
          total += 1.0;
        }
      }
      const auto exact = testing::ExactBigrams(g, cfg.walk_length, p, q);
      for (const auto& [k, v] : exact) worst = std::max(worst, std::abs(seen[k] / total - v));
      for (const auto& [k, v] : seen) {
        if (!exact.count(k)) worst = std::max(worst, v / total);
      }
    }
  }
  const double secs = Seconds(start);
  return {worst < 0.01 && secs < 10.0,
          "max bigram gap " + Fmt("%.4f", worst) + " (limit 0.01), " + Fmt("%.2f", secs) +
              " s (limit 10)"};
}

Outcome AliasExactness() {
  const auto start = Clock::now();
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.Below(16);
    std::vector<double> w(n);
    for (double& x : w) x = rng.Uniform();
    w[rng.Below(n)] += 1e-3;  // at least one positive entry
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    const auto d = AliasTable(w).Distribution();
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(d[i] - w[i] / z));
  }
  const double secs = Seconds(start);
  return {worst <= 1e-12 && secs < 1.0,
          "max error " + Fmt("%.3g", worst) + " (limit 1e-12), " + Fmt("%.3f", secs) +
              " s (limit 1)"};
}

Outcome SgnsGradient() {
  const auto start = Clock::now();
  Rng rng(3);
  const std::size_t dim = 8;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.Below(5);
    std::vector<double> x((2 + k) * dim);
    for (double& v : x) v = rng.Uniform(-1.0, 1.0);
    const auto loss = [&](const std::vector<double>& p) {
      std::vector<std::span<const double>> negs;
      for (std::size_t i = 0; i < k; ++i) negs.emplace_back(p.data() + (2 + i) * dim, dim);
      return PairLoss({p.data(), dim}, {p.data() + dim, dim}, negs);
    };
    std::vector<std::span<const double>> negs;
    for (std::size_t i = 0; i < k; ++i) negs.emplace_back(x.data() + (2 + i) * dim, dim);
    const auto g = PairLossGradient({x.data(), dim}, {x.data() + dim, dim}, negs);
    std::vector<double> analytic = g.center;
    analytic.insert(analytic.end(), g.context.begin(), g.context.end());
    for (const auto& n : g.negatives) analytic.insert(analytic.end(), n.begin(), n.end());
    worst = std::max(worst, testing::MaxRelativeError(analytic, testing::NumericGradient(loss, x)));
  }
  const double secs = Seconds(start);
  return {worst < 1e-4 && secs < 5.0,
          "max relative error " + Fmt("%.3g", worst) + " (limit 1e-4), " + Fmt("%.3f", secs) +
              " s (limit 5)"};
}

Matrix RandomShares(Rng& rng, std::size_t n, std::size_t m) {
  Matrix y(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> u(m);
    for (double& v : u) v = rng.Normal();
    const auto p = Softmax(u);
    std::copy(p.begin(), p.end(), y.row(r).begin());
  }
  return y;
}

Outcome MnlChecks() {
  Rng rng(4);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.Below(20), d = 1 + rng.Below(5), m = 2 + rng.Below(4);
    Matrix z(n, d);
    for (double& v : z.data()) v = rng.Normal();
    const Matrix y = RandomShares(rng, n, m);
    Matrix beta(m, d + 1);
    for (double& v : beta.data()) v = rng.Normal() * 0.5;
    const double l2 = rng.Uniform(0.0, 0.01);
    const auto loss = [&](const std::vector<double>& b) {
      Matrix bm(m, d + 1);
      bm.data() = b;
      return MnlLoss(bm, z, y, l2);
    };
    worst_grad = std::max(
        worst_grad, testing::MaxRelativeError(MnlGradient(beta, z, y, l2).data(),
                                              testing::NumericGradient(loss, beta.data())));
  }
  double worst_mean = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + rng.Below(30), m = 2 + rng.Below(4);
    const Matrix y = RandomShares(rng, n, m);
    const auto fit = MnlFit(Matrix(n, 0), y);
    const auto p = MnlPredict(fit.model.beta, std::vector<double>{});
    for (std::size_t k = 0; k < m; ++k) {
      const auto col = y.column(k);
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
      worst_mean = std::max(worst_mean, std::abs(p[k] - mean));
    }
  }
  return {worst_grad < 1e-4 && worst_mean <= 1e-6,
          "gradient relative error " + Fmt("%.3g", worst_grad) + " (limit 1e-4), intercept-only gap " +
              Fmt("%.3g", worst_mean) + " (limit 1e-6)"};
}

Outcome Identities() {
  Rng rng(5);
  bool readout_exact = true, r2_exact = true;
  double softmax_gap = 0.0, corr_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.Below(40), dim = 1 + rng.Below(16);
    std::vector<std::string> zone_of(n);
    for (auto& z : zone_of) z = "z" + std::to_string(rng.Below(6));
    const TractAssignment t(zone_of);
    Matrix rows(n, dim);
    for (double& v : rows.data()) v = rng.Normal();
    const auto ze = Readout(rows, t);
    for (std::size_t zi = 0; zi < t.zone_count(); ++zi) {
      for (std::size_t k = 0; k < dim; ++k) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t v = 0; v < n; ++v) {
          if (zone_of[v] == t.zones()[zi]) {
            sum += rows(v, k);
            ++count;
          }
        }
        readout_exact = readout_exact && ze.matrix(zi, k) == sum / static_cast<double>(count);
      }
    }
    std::vector<double> y(n);
    for (double& v : y) v = rng.Normal();
    r2_exact = r2_exact && RSquared(y, y) == 1.0;

    std::vector<double> u(2 + rng.Below(6));
    for (double& v : u) v = rng.Normal() * 20.0;
    const auto p = Softmax(u);
    softmax_gap = std::max(softmax_gap, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));

    std::vector<std::vector<double>> cols(5, std::vector<double>(n));
    for (auto& c : cols) {
      for (double& v : c) v = rng.Normal();
    }
    const auto m = BuildCorrelationMatrix({"a", "b", "c", "d", "e"}, cols);
    for (std::size_t i = 0; i < 5; ++i) {
      corr_gap = std::max(corr_gap, std::abs(m.r(i, i) - 1.0));
      for (std::size_t j = 0; j < 5; ++j) corr_gap = std::max(corr_gap, std::abs(m.r(i, j) - m.r(j, i)));
    }
  }
  const bool pass = readout_exact && r2_exact && softmax_gap <= 1e-12 && corr_gap <= 1e-12;
  return {pass, std::string("readout exact ") + (readout_exact ? "yes" : "no") +
                    ", r_squared(y,y) exact " + (r2_exact ? "yes" : "no") +
                    ", softmax sum gap " + Fmt("%.3g", softmax_gap) + ", correlation gap " +
                    Fmt("%.3g", corr_gap) + " (limits 1e-12)"};
}

Outcome Simplification() {
  Rng rng(6);
  int balanced = 0, idempotent = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = testing::RandomStreetGraph(rng);
    const auto once = SimplifyTopology(g);
    const auto twice = SimplifyTopology(once.graph);
    const auto& s = once.summary;
    if (s.length_before == g.total_length() && s.length_after == once.graph.total_length() &&
        s.length_after == s.length_before - s.self_loop_length - s.merged_length) {
      ++balanced;
    }
    if (twice.graph.labels() == once.graph.labels() &&
        twice.graph.edges() == once.graph.edges()) {
      ++idempotent;
    }
  }
  return {balanced == 50 && idempotent == 50,
          "ledger balanced " + std::to_string(balanced) + "/50, idempotent " +
              std::to_string(idempotent) + "/50"};
}

Outcome Communities() {
  const auto start = Clock::now();
  const Graph g = testing::Cliques(2, 8);
  int pure = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig rc;
    rc.seed = seed;
    rc.Set("dim", "16");
    rc.Finalize();
    const WalkCorpus corpus = GenerateWalks(g, rc.pipeline.walk);
    const auto trained = Train(corpus, rc.pipeline.train, g, rc.pipeline.walk);
    const auto km = KMeans(trained.embedding.rows, 2, StageSeed(seed, "cluster"));
    bool ok = true;
    for (NodeId v = 0; v < 16; ++v) {
      ok = ok && ((km.labels[v] == km.labels[0]) == (v < 8));
    }
    pure += ok ? 1 : 0;
  }
  const double secs = Seconds(start);
  return {pure >= 4 && secs < 30.0, "purity 1.0 on " + std::to_string(pure) +
                                        "/5 seeds (need 4), " + Fmt("%.2f", secs) +
                                        " s (limit 30)"};
}

Outcome Directional() {
  double base = 0.0, ger = 0.0, concat = 0.0, slowest = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto start = Clock::now();
    RunConfig rc;
    rc.seed = seed;
    rc.Set("predictors", "mnl");
    rc.Finalize();
    const auto result = RunExperiment(rc.synth, rc.pipeline);
    slowest = std::max(slowest, Seconds(start));
    double b = 0.0, g = 0.0, c = 0.0;
    for (const auto& d : result.deltas) {
      const double w = 1.0 / static_cast<double>(result.deltas.size());
      b += w * d.baseline;
      g += w * d.ger;
      c += w * d.concat;
    }
    per_seed += (seed > 1 ? "; " : "") + Fmt("%+.3f", g - b);
    base += b / 5.0;
    ger += g / 5.0;
    concat += c / 5.0;
  }
  const bool pass = ger - base >= 0.10 && concat >= base && slowest < 60.0;
  return {pass, "mean OSR2 baseline " + Fmt("%.3f", base) + ", ger " + Fmt("%.3f", ger) +
                    ", concat " + Fmt("%.3f", concat) + "; ger-baseline " +
                    Fmt("%+.3f", ger - base) + " (need >= 0.10), per seed [" + per_seed +
                    "]; slowest seed " + Fmt("%.1f", slowest) + " s (limit 60)"};
}

int Run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism(const std::string& dhm, const std::filesystem::path& work) {
  if (dhm.empty()) return {false, "no --dhm binary given"};
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);
  const std::string data = (work / "data").string();
  const std::string quiet = " > " + (work / "log.txt").string() + " 2>&1";
  if (Run(dhm + " synth --seed 1 --out-dir " + data + quiet) != 0) {
    return {false, "synth command failed"};
  }
  std::vector<std::string> reports;
  for (const char* run : {"run1", "run2"}) {
    const auto out = work / run;
    const int code = Run(dhm + " pipeline --dataset " + data + " --seed 1 --threads 1 --out-dir " +
                         out.string() + quiet);
    if (code != 0) return {false, std::string(run) + " exited " + std::to_string(code)};
    reports.push_back(Slurp(out / "report.csv"));
  }
  const auto lines = std::count(reports[0].begin(), reports[0].end(), '\n');
  const bool same = reports[0] == reports[1] && !reports[0].empty();
  return {same, std::string("report CSVs ") + (same ? "byte-identical" : "differ") + " (" +
                    std::to_string(lines - 1) + " cells)"};
}

Outcome Boosting() {
  Rng rng(10);
  int monotone = 0, bounded = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.Below(40), d = 1 + rng.Below(5), m = 1 + rng.Below(3);
    Matrix x(n, d), y(n, m);
    for (double& v : x.data()) v = rng.Normal();
    for (double& v : y.data()) v = rng.Normal();
    BoostParams bp;
    bp.n_rounds = 50 + static_cast<int>(rng.Below(100));
    bp.shrinkage = rng.Uniform(0.01, 1.0);
    bp.max_depth = static_cast<int>(rng.Below(6));
    std::vector<std::vector<double>> history;
    BoostFit(x, y, bp, &history);
    bool ok = true;
    for (const auto& h : history) {
      for (std::size_t i = 1; i < h.size(); ++i) ok = ok && h[i] <= h[i - 1];
    }
    monotone += ok ? 1 : 0;

    ForestParams fp;
    fp.n_trees = 20;
    fp.seed = static_cast<std::uint64_t>(trial);
    const auto forest = ForestFit(x, y, fp);
    Matrix probe(50, d);
    for (double& v : probe.data()) v = rng.Normal() * 3.0;
    const Matrix p = EnsemblePredict(forest, probe);
    bool in = true;
    for (std::size_t k = 0; k < m; ++k) {
      const auto col = y.column(k);
      const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      for (std::size_t r = 0; r < p.rows(); ++r) in = in && p(r, k) >= *lo && p(r, k) <= *hi;
    }
    bounded += in ? 1 : 0;
  }
  return {monotone == 20 && bounded == 20,
          "non-increasing loss " + std::to_string(monotone) + "/20, forest within bounds " +
              std::to_string(bounded) + "/20"};
}

}  // namespace
}  // namespace dhm

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string dhm_binary;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--dhm", dhm_binary, "Path to the dhm command-line tool");
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  using dhm::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"walk-bias oracle", dhm::WalkBias},
      {"alias exactness", dhm::AliasExactness},
      {"SGNS gradient check", dhm::SgnsGradient},
      {"MNL gradient and intercept-only fit", dhm::MnlChecks},
      {"readout and metric identities", dhm::Identities},
      {"simplification conservation", dhm::Simplification},
      {"community recovery", dhm::Communities},
      {"GER and concat beat baseline on the synthetic city", dhm::Directional},
      {"pipeline determinism", [&] { return dhm::Determinism(dhm_binary, work); }},
      {"boosting monotonicity and forest bounds", dhm::Boosting},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
