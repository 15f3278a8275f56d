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

#ifndef DHM_ALIAS_H_
#define DHM_ALIAS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dhm/random.h"

namespace dhm {

// Walker/Vose alias table: O(n) construction, O(1) draws.
class AliasTable {
 public:
  AliasTable() = default;

  // `weights` must be non-negative and finite with at least one positive
  // entry; throws NumericalError otherwise.
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }

  // Draw from a uniform bucket choice and a uniform coin in [0, 1).
  std::uint32_t Sample(std::uint64_t bucket, double coin) const {
    return coin < prob_[bucket] ? static_cast<std::uint32_t>(bucket)
                                : alias_[bucket];
  }

  std::uint32_t Sample(Rng& rng) const {
    const std::uint64_t bucket = rng.Below(prob_.size());
    return Sample(bucket, rng.Uniform());
  }

  // The distribution the table actually samples from, reconstructed from
  // (prob, alias) without drawing.
  std::vector<double> Distribution() const;

  const std::vector<double>& probabilities() const { return prob_; }
  const std::vector<std::uint32_t>& aliases() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace dhm

#endif  // DHM_ALIAS_H_
