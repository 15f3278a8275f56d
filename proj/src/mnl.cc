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

#include "dhm/mnl.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dhm/error.h"

namespace dhm {

std::vector<double> Softmax(std::span<const double> utilities) {
  std::vector<double> p(utilities.begin(), utilities.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

namespace {

void Utilities(const Matrix& beta, std::span<const double> z,
               std::vector<double>& v) {
  const std::size_t modes = beta.rows();
  v.resize(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    const auto b = beta.row(i);
    double s = b[0];
    for (std::size_t k = 0; k < z.size(); ++k) s += b[k + 1] * z[k];
    v[i] = s;
  }
}

// log-sum-exp of v.
double LogSumExp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

std::vector<double> MnlPredict(const Matrix& beta, std::span<const double> z) {
  if (z.size() + 1 != beta.cols()) {
    throw UsageError("MNL input has " + std::to_string(z.size()) +
                     " columns, model expects " + std::to_string(beta.cols() - 1));
  }
  std::vector<double> v;
  Utilities(beta, z, v);
  return Softmax(v);
}

Matrix MnlPredictAll(const Matrix& beta, const Matrix& z) {
  Matrix out(z.rows(), beta.rows());
  for (std::size_t n = 0; n < z.rows(); ++n) {
    const auto p = MnlPredict(beta, z.row(n));
    std::copy(p.begin(), p.end(), out.row(n).begin());
  }
  return out;
}

double MnlLoss(const Matrix& beta, const Matrix& z, const Matrix& shares,
               double l2) {
  const std::size_t n = z.rows();
  std::vector<double> v;
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    Utilities(beta, z.row(r), v);
    const double lse = LogSumExp(v);
    const auto y = shares.row(r);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (y[i] != 0.0) loss -= y[i] * (v[i] - lse);
    }
  }
  loss /= static_cast<double>(std::max<std::size_t>(n, 1));
  double penalty = 0.0;
  for (std::size_t i = 0; i < beta.rows(); ++i) {
    for (std::size_t k = 1; k < beta.cols(); ++k) penalty += beta(i, k) * beta(i, k);
  }
  return loss + l2 * penalty;
}

Matrix MnlGradient(const Matrix& beta, const Matrix& z, const Matrix& shares,
                   double l2, long reference) {
  const std::size_t n = z.rows();
  Matrix grad(beta.rows(), beta.cols());
  std::vector<double> v;
  const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
  for (std::size_t r = 0; r < n; ++r) {
    Utilities(beta, z.row(r), v);
    const auto p = Softmax(v);
    const auto y = shares.row(r);
    const auto x = z.row(r);
    for (std::size_t i = 0; i < beta.rows(); ++i) {
      const double e = (p[i] - y[i]) * inv_n;
      auto g = grad.row(i);
      g[0] += e;
      for (std::size_t k = 0; k < x.size(); ++k) g[k + 1] += e * x[k];
    }
  }
  for (std::size_t i = 0; i < beta.rows(); ++i) {
    for (std::size_t k = 1; k < beta.cols(); ++k) grad(i, k) += 2.0 * l2 * beta(i, k);
  }
  if (reference >= 0) {
    for (double& g : grad.row(static_cast<std::size_t>(reference))) g = 0.0;
  }
  return grad;
}

MnlFitResult MnlFit(const Matrix& z, const Matrix& shares,
                    const MnlFitOptions& opts) {
  const std::size_t modes = shares.cols();
  if (modes < 2) throw UsageError("MNL needs at least two modes");
  if (z.rows() != shares.rows()) throw UsageError("MNL input/share row mismatch");
  if (opts.l2_lambda < 0.0) throw UsageError("l2_lambda must be >= 0");

  MnlFitResult res;
  MnlModel& m = res.model;
  m.reference_mode = modes - 1;
  m.l2_lambda = opts.l2_lambda;
  m.beta = Matrix(modes, z.cols() + 1);
  const auto ref = static_cast<long>(m.reference_mode);

  double loss = MnlLoss(m.beta, z, shares, opts.l2_lambda);
  res.loss_history.push_back(loss);
  double step = 1.0;
  Matrix trial;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Matrix grad = MnlGradient(m.beta, z, shares, opts.l2_lambda, ref);
    double gmax = 0.0, gsq = 0.0;
    for (double g : grad.data()) {
      gmax = std::max(gmax, std::fabs(g));
      gsq += g * g;
    }
    res.gradient_norm = gmax;
    res.iterations = it;
    if (gmax < opts.tol) {
      res.converged = true;
      return res;
    }

    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = m.beta;
      auto& td = trial.data();
      const auto& gd = grad.data();
      for (std::size_t i = 0; i < td.size(); ++i) td[i] -= step * gd[i];
      const double next = MnlLoss(trial, z, shares, opts.l2_lambda);
      if (next <= loss - 1e-4 * step * gsq) {
        m.beta = std::move(trial);
        loss = next;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable descent left along the gradient.
      return res;
    }
    res.loss_history.push_back(loss);
  }
  const Matrix grad = MnlGradient(m.beta, z, shares, opts.l2_lambda, ref);
  double gmax = 0.0;
  for (double g : grad.data()) gmax = std::max(gmax, std::fabs(g));
  res.gradient_norm = gmax;
  res.iterations = opts.max_iters;
  res.converged = gmax < opts.tol;
  return res;
}

}  // namespace dhm
