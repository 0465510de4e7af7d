// Copyright 2026 The kmips Authors.
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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kmips/cost.hpp"
#include "kmips/dataset.hpp"

namespace kmips {

// Result of a top-K selection. Scores are descending for inner-product and
// cosine rankings, ascending for squared distance; ties always break toward
// the smaller id so rankings are reproducible everywhere.
struct TopK {
    std::vector<std::uint32_t> ids;
    std::vector<double> scores;

    std::size_t size() const { return ids.size(); }
    bool operator==(const TopK&) const = default;
};

// Streaming top-K keeper. `larger_is_better` selects the comparison sense;
// ids break ties in both senses.
class TopKSelector {
  public:
    TopKSelector(std::size_t k, bool larger_is_better = true)
        : k_(k), larger_is_better_(larger_is_better) {}

    void offer(std::uint32_t id, double score);
    TopK finish();  // sorted best-first; leaves the selector empty

  private:
    bool better(double s1, std::uint32_t id1, double s2, std::uint32_t id2) const;

    std::size_t k_;
    bool larger_is_better_;
    std::vector<std::pair<double, std::uint32_t>> heap_;  // worst element on top
};

// Linear-scan oracles. Dot products accumulate in double with a fixed
// reduction order; each scan charges its dot count to `ledger` when given.

// K largest q . x_i.
TopK exact_mips(const Dataset& ds, std::span<const double> q, std::size_t k,
                CostLedger* ledger = nullptr);

// K largest q . x_i / ||x_i||; zero-norm rows are not eligible.
TopK exact_mcss(const Dataset& ds, std::span<const double> q, std::size_t k,
                CostLedger* ledger = nullptr);

// K smallest ||q - x_i||^2.
TopK exact_nns(const Dataset& ds, std::span<const double> q, std::size_t k,
               CostLedger* ledger = nullptr);

// Exact K-MIPS restricted to `candidates`; returns all of them ranked when
// fewer than K. An empty candidate set yields an empty TopK.
TopK rerank(const Dataset& ds, std::span<const double> q,
            std::span<const std::uint32_t> candidates, std::size_t k,
            CostLedger* ledger = nullptr);

// Approximate search outcome: reranked top-K plus the work it took.
struct SearchResult {
    TopK topk;
    CostLedger cost;
    bool empty_candidates = false;
};

}  // namespace kmips
