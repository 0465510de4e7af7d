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
#include <string>
#include <vector>

#include "kmips/exact.hpp"
#include "kmips/matrix.hpp"
#include "kmips/transform.hpp"

namespace kmips {

// Spherical k-means: alternate unit-normalized mean centroids and
// assignment to the centroid of largest inner product, until assignments
// stop changing or max_iters is reached. Initial assignments are uniform
// random from the seed. Points are clustered by direction, so the
// objective maximized is sum_j x_j . c_{a_j}.
struct KmeansResult {
    Matrix centroids;                        // k x dim, unit-norm rows
    std::vector<std::uint32_t> assignments;  // point -> cluster
    std::vector<double> objective_trace;     // one entry per iteration, nondecreasing
    std::uint32_t iters_run = 0;
};

KmeansResult spherical_kmeans(const Matrix& points, std::uint32_t k, std::uint32_t max_iters,
                              std::uint64_t seed);

inline constexpr std::uint32_t kDefaultMaxIters = 50;

// Flat cluster index over the MCSS-transformed dataset: a query is routed
// to its top-p best matching centroids and their members form the
// candidate set, which is then reranked exactly in the original space.
class ClusterIndex {
  public:
    static ClusterIndex train(const TransformedDataset& tds, std::uint32_t k,
                              std::uint32_t max_iters, std::uint64_t seed);

    std::uint32_t k() const { return static_cast<std::uint32_t>(centroids_.rows); }
    std::size_t dim() const { return centroids_.cols; }
    std::size_t points() const { return assignments_.size(); }
    const Matrix& centroids() const { return centroids_; }
    const std::vector<std::uint32_t>& assignments() const { return assignments_; }
    const std::vector<std::vector<std::uint32_t>>& inverted_lists() const { return lists_; }
    const McssParams& params() const { return params_; }
    std::uint32_t iters_run() const { return iters_run_; }
    const std::vector<double>& objective_trace() const { return trace_; }

    // The p cluster ids with largest q_t . c_i, best first; charges k
    // routing dots. q_t must already be Q-mapped.
    std::vector<std::uint32_t> top_p_clusters(std::span<const double> q_t, std::size_t p,
                                              CostLedger* ledger = nullptr) const;

    // Union of the top-p clusters' member lists, ascending ids. Nested in p.
    std::vector<std::uint32_t> candidates(std::span<const double> q_t, std::size_t p,
                                          CostLedger* ledger = nullptr) const;

    // Route in transformed space, rerank exactly in the original space.
    // Total cost k + |candidates| dot-equivalents.
    SearchResult search(const Dataset& ds, std::span<const double> q, std::size_t p,
                        std::size_t topk) const;

    void save(const std::string& path) const;
    static ClusterIndex load(const std::string& path);

  private:
    ClusterIndex() = default;
    void rebuild_lists();

    Matrix centroids_;
    std::vector<std::uint32_t> assignments_;
    std::vector<std::vector<std::uint32_t>> lists_;
    McssParams params_;
    std::uint32_t iters_run_ = 0;
    std::vector<double> trace_;
};

}  // namespace kmips
