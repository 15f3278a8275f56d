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

// Multinomial logit fitted to fractional mode shares.
//
// Utility of mode i for zone n is V_in = beta_i0 + sum_k beta_ik z_nk and
// shares are softmax(V_n). The last mode is the reference: its row of beta
// stays zero.

#ifndef DHM_MNL_H_
#define DHM_MNL_H_

#include <span>
#include <vector>

#include "dhm/matrix.h"

namespace dhm {

struct MnlModel {
  Matrix beta;  // modes x (1 + d); column 0 holds the constants
  std::size_t reference_mode = 0;
  double l2_lambda = 0.0;
};

// Max-shifted softmax of the utilities.
std::vector<double> Softmax(std::span<const double> utilities);

std::vector<double> MnlPredict(const Matrix& beta, std::span<const double> z);
Matrix MnlPredictAll(const Matrix& beta, const Matrix& z);

// Mean soft cross-entropy plus l2 * sum of squared non-constant
// coefficients.
double MnlLoss(const Matrix& beta, const Matrix& z, const Matrix& shares,
               double l2);

// Gradient of MnlLoss. The reference row is zeroed when `reference` is
// given (>= 0).
Matrix MnlGradient(const Matrix& beta, const Matrix& z, const Matrix& shares,
                   double l2, long reference = -1);

struct MnlFitOptions {
  double l2_lambda = 1e-4;
  int max_iters = 20000;
  double tol = 1e-8;  // on the max-norm of the gradient
};

struct MnlFitResult {
  MnlModel model;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> loss_history;  // one entry per accepted step, plus start
};

// Full-batch gradient descent with Armijo backtracking from beta = 0.
// `z` is the (already standardized) design, `shares` zones x modes.
MnlFitResult MnlFit(const Matrix& z, const Matrix& shares,
                    const MnlFitOptions& opts = {});

}  // namespace dhm

#endif  // DHM_MNL_H_
