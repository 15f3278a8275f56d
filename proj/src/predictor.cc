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

#include "dhm/predictor.h"

#include <sstream>

#include "dhm/error.h"
#include "dhm/text.h"

namespace dhm {

PredictorKind ParsePredictorKind(const std::string& name) {
  if (name == "mnl") return PredictorKind::kMnl;
  if (name == "random_forest" || name == "forest") return PredictorKind::kRandomForest;
  if (name == "gradient_boost" || name == "gboost") return PredictorKind::kGradientBoost;
  throw UsageError("predictor must be mnl, random_forest or gradient_boost, got '" +
                   name + "'");
}

std::string ToString(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kMnl:
      return "mnl";
    case PredictorKind::kRandomForest:
      return "random_forest";
    case PredictorKind::kGradientBoost:
      return "gradient_boost";
  }
  return "?";
}

namespace {

std::string DepthString(int depth) {
  return depth < 0 ? "none" : std::to_string(depth);
}

}  // namespace

std::string PredictorParams::Describe() const {
  std::ostringstream os;
  switch (kind) {
    case PredictorKind::kMnl:
      os << "l2=" << FormatShort(mnl.l2_lambda) << ";max_iters=" << mnl.max_iters;
      break;
    case PredictorKind::kRandomForest:
      os << "n_trees=" << forest.n_trees
         << ";max_depth=" << DepthString(forest.max_depth)
         << ";min_leaf=" << forest.min_leaf;
      break;
    case PredictorKind::kGradientBoost:
      os << "n_rounds=" << boost.n_rounds
         << ";shrinkage=" << FormatShort(boost.shrinkage)
         << ";max_depth=" << DepthString(boost.max_depth);
      break;
  }
  return os.str();
}

Matrix FittedPredictor::Predict(const Matrix& design) const {
  if (design.cols() != input_columns.size()) {
    throw DataError("design has " + std::to_string(design.cols()) +
                    " columns, model was fitted on " +
                    std::to_string(input_columns.size()));
  }
  const Matrix z = standardizer.Apply(design);
  if (kind == PredictorKind::kMnl) return MnlPredictAll(mnl.beta, z);
  return EnsemblePredict(ensemble, z);
}

FittedPredictor FitPredictor(const MixedInput& input, const Matrix& shares,
                             const std::vector<std::string>& mode_names,
                             std::span<const std::size_t> train_rows,
                             const PredictorParams& params) {
  if (shares.rows() != input.design.rows()) {
    throw UsageError("shares are not aligned with the design matrix");
  }
  if (train_rows.empty()) throw UsageError("no training rows");
  FittedPredictor fp;
  fp.kind = params.kind;
  fp.input_mode = input.mode;
  fp.mode_names = mode_names;
  fp.input_columns = input.column_names;
  fp.params = params.Describe();
  fp.standardizer = Standardizer::Fit(input.design, train_rows, input.column_names);
  const Matrix z = fp.standardizer.Apply(input.design, train_rows);
  const Matrix y = SelectRows(shares, train_rows);
  switch (params.kind) {
    case PredictorKind::kMnl:
      fp.mnl = MnlFit(z, y, params.mnl).model;
      break;
    case PredictorKind::kRandomForest:
      fp.ensemble = ForestFit(z, y, params.forest);
      break;
    case PredictorKind::kGradientBoost:
      fp.ensemble = BoostFit(z, y, params.boost);
      break;
  }
  return fp;
}

std::string SerializeModel(const FittedPredictor& m) {
  std::ostringstream os;
  os << "dhm-model 1\n";
  os << "kind " << ToString(m.kind) << '\n';
  os << "input_mode " << ToString(m.input_mode) << '\n';
  os << "params " << m.params << '\n';
  os << "modes " << m.mode_names.size() << '\n';
  for (const auto& name : m.mode_names) os << name << '\n';
  os << "columns " << m.input_columns.size() << '\n';
  for (const auto& name : m.input_columns) os << name << '\n';
  const Standardizer& s = m.standardizer;
  os << "standardizer " << s.kept.size() << ' ' << s.dropped.size() << ' '
     << s.imputed << '\n';
  for (std::size_t j = 0; j < s.kept.size(); ++j) {
    os << s.kept[j] << ' ' << FormatDouble(s.mean[j]) << ' '
       << FormatDouble(s.scale[j]) << '\n';
  }
  for (const auto& name : s.dropped) os << name << '\n';
  if (m.kind == PredictorKind::kMnl) {
    os << "mnl " << m.mnl.beta.rows() << ' ' << m.mnl.beta.cols() << ' '
       << m.mnl.reference_mode << ' ' << FormatDouble(m.mnl.l2_lambda) << '\n';
    for (std::size_t i = 0; i < m.mnl.beta.rows(); ++i) {
      const auto row = m.mnl.beta.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) {
        os << (k ? " " : "") << FormatDouble(row[k]);
      }
      os << '\n';
    }
  } else {
    const TreeEnsembleModel& e = m.ensemble;
    os << "ensemble " << ToString(e.kind) << ' '
       << FormatDouble(e.boost.shrinkage) << ' ' << e.trees.size() << '\n';
    for (std::size_t mode = 0; mode < e.trees.size(); ++mode) {
      os << "mode " << FormatDouble(e.base[mode]) << ' ' << e.trees[mode].size()
         << '\n';
      for (const auto& tree : e.trees[mode]) {
        os << "tree " << tree.nodes().size() << '\n';
        for (const auto& n : tree.nodes()) {
          os << n.feature << ' ' << FormatDouble(n.threshold) << ' ' << n.left
             << ' ' << n.right << ' ' << FormatDouble(n.value) << '\n';
        }
      }
    }
  }
  os << "end\n";
  return os.str();
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  const std::string& Next() {
    if (pos_ >= lines_.size()) Fail("unexpected end of model file");
    return lines_[pos_++];
  }

  // Reads "<key> rest" and returns the tokens after the key.
  std::vector<std::string> Keyed(const std::string& key) {
    const std::string& line = Next();
    auto tokens = SplitWhitespace(line);
    if (tokens.empty() || tokens[0] != key) Fail("expected '" + key + "'");
    tokens.erase(tokens.begin());
    return tokens;
  }

  std::string Rest(const std::string& key) {
    const std::string& line = Next();
    if (line.rfind(key + " ", 0) != 0 && line != key) Fail("expected '" + key + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : "";
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw DataError("model file line " + std::to_string(pos_) + ": " + what);
  }

  std::size_t Count(const std::string& tok) const {
    auto v = ParseInt(tok);
    if (!v || *v < 0) Fail("bad count '" + tok + "'");
    return static_cast<std::size_t>(*v);
  }

  long long Int(const std::string& tok) const {
    auto v = ParseInt(tok);
    if (!v) Fail("bad integer '" + tok + "'");
    return *v;
  }

  double Real(const std::string& tok) const {
    auto v = ParseDouble(tok);
    if (!v) Fail("bad number '" + tok + "'");
    return *v;
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

FittedPredictor DeserializeModel(const std::string& text) {
  LineReader in(text);
  FittedPredictor m;
  auto magic = in.Keyed("dhm-model");
  if (magic.size() != 1 || magic[0] != "1") in.Fail("unsupported model version");
  try {
    m.kind = ParsePredictorKind(in.Keyed("kind").at(0));
    m.input_mode = ParseInputMode(in.Keyed("input_mode").at(0));
  } catch (const std::exception& e) {
    in.Fail(e.what());
  }
  m.params = in.Rest("params");
  const std::size_t modes = in.Count(in.Keyed("modes").at(0));
  for (std::size_t i = 0; i < modes; ++i) m.mode_names.push_back(in.Next());
  const std::size_t cols = in.Count(in.Keyed("columns").at(0));
  for (std::size_t i = 0; i < cols; ++i) m.input_columns.push_back(in.Next());

  auto st = in.Keyed("standardizer");
  if (st.size() != 3) in.Fail("bad standardizer header");
  const std::size_t kept = in.Count(st[0]);
  const std::size_t dropped = in.Count(st[1]);
  m.standardizer.imputed = in.Count(st[2]);
  for (std::size_t j = 0; j < kept; ++j) {
    auto t = SplitWhitespace(in.Next());
    if (t.size() != 3) in.Fail("bad standardizer row");
    const std::size_t c = in.Count(t[0]);
    if (c >= cols) in.Fail("standardizer column out of range");
    m.standardizer.kept.push_back(c);
    m.standardizer.mean.push_back(in.Real(t[1]));
    m.standardizer.scale.push_back(in.Real(t[2]));
  }
  for (std::size_t j = 0; j < dropped; ++j) m.standardizer.dropped.push_back(in.Next());

  if (m.kind == PredictorKind::kMnl) {
    auto h = in.Keyed("mnl");
    if (h.size() != 4) in.Fail("bad mnl header");
    const std::size_t rows = in.Count(h[0]);
    const std::size_t bcols = in.Count(h[1]);
    if (rows != modes || bcols != kept + 1) in.Fail("mnl shape mismatch");
    m.mnl.reference_mode = in.Count(h[2]);
    m.mnl.l2_lambda = in.Real(h[3]);
    m.mnl.beta = Matrix(rows, bcols);
    for (std::size_t i = 0; i < rows; ++i) {
      auto t = SplitWhitespace(in.Next());
      if (t.size() != bcols) in.Fail("bad mnl row");
      for (std::size_t k = 0; k < bcols; ++k) m.mnl.beta(i, k) = in.Real(t[k]);
    }
  } else {
    auto h = in.Keyed("ensemble");
    if (h.size() != 3) in.Fail("bad ensemble header");
    TreeEnsembleModel& e = m.ensemble;
    e.kind = h[0] == "random_forest" ? EnsembleKind::kRandomForest
                                      : EnsembleKind::kGradientBoost;
    e.boost.shrinkage = in.Real(h[1]);
    const std::size_t emodes = in.Count(h[2]);
    if (emodes != modes) in.Fail("ensemble mode count mismatch");
    e.trees.resize(emodes);
    for (std::size_t mode = 0; mode < emodes; ++mode) {
      auto mh = in.Keyed("mode");
      if (mh.size() != 2) in.Fail("bad mode header");
      e.base.push_back(in.Real(mh[0]));
      const std::size_t ntrees = in.Count(mh[1]);
      for (std::size_t t = 0; t < ntrees; ++t) {
        const std::size_t nnodes = in.Count(in.Keyed("tree").at(0));
        RegressionTree tree;
        for (std::size_t j = 0; j < nnodes; ++j) {
          auto f = SplitWhitespace(in.Next());
          if (f.size() != 5) in.Fail("bad tree node");
          RegressionTree::Node n;
          n.feature = static_cast<int>(in.Int(f[0]));
          n.threshold = in.Real(f[1]);
          n.left = static_cast<int>(in.Int(f[2]));
          n.right = static_cast<int>(in.Int(f[3]));
          n.value = in.Real(f[4]);
          const auto limit = static_cast<long long>(nnodes);
          if (n.feature >= static_cast<int>(kept) ||
              (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= limit ||
                                  n.right >= limit))) {
            in.Fail("tree node out of range");
          }
          tree.nodes().push_back(n);
        }
        if (tree.nodes().empty()) in.Fail("empty tree");
        e.trees[mode].push_back(std::move(tree));
      }
    }
  }
  in.Keyed("end");
  return m;
}

void SaveModel(const FittedPredictor& model, const std::string& path) {
  WriteFile(path, SerializeModel(model));
}

FittedPredictor LoadModel(const std::string& path) {
  std::string text;
  for (const auto& line : ReadLines(path)) text += line + '\n';
  return DeserializeModel(text);
}

}  // namespace dhm
