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

// One clustering level. Levels are stored coarsest first; children of a
// node are indices into the next (finer) level, and at the finest level
// they are data point ids. Child lists are ascending and partition the
// finer level.
struct HierLevel {
    Matrix centroids;
    std::vector<std::vector<std::uint32_t>> children;
};

// Hierarchy of spherical k-means clusterings built bottom-up: the finest
// level clusters the transformed points, each coarser level clusters the
// centroids below it. A query walks the levels keeping the p best nodes
// per level and expanding their children.
class HierIndex {
  public:
    // level_sizes is finest first (e.g. {1365, 37} for two levels) and must
    // be strictly decreasing; the finest size may not exceed the point
    // count. The finest level is trained with `seed` itself so a one-level
    // hierarchy reproduces ClusterIndex::train bit for bit; level l above
    // it uses a seed derived with stream l.
    static HierIndex build(const TransformedDataset& tds,
                           std::span<const std::uint32_t> level_sizes, std::uint32_t max_iters,
                           std::uint64_t seed);

    std::size_t n_levels() const { return levels_.size(); }
    std::size_t dim() const { return levels_.empty() ? 0 : levels_.front().centroids.cols; }
    std::size_t points() const { return n_points_; }
    const HierLevel& level(std::size_t l) const { return levels_[l]; }
    const McssParams& params() const { return params_; }

    // Beam walk: start from every root, keep the p best-scoring nodes,
    // descend to their children, repeat; the surviving finest-level nodes'
    // data points come back ascending. Charges the number of scored nodes
    // at every level as routing cost.
    std::vector<std::uint32_t> walk(std::span<const double> q_t, std::size_t p,
                                    CostLedger* ledger = nullptr) const;

    // Node ids kept at each level for the same walk (ascending), followed
    // by one extra entry: the data ids walk() would return.
    std::vector<std::vector<std::uint32_t>> walk_frontiers(std::span<const double> q_t,
                                                           std::size_t p,
                                                           CostLedger* ledger = nullptr) const;

    SearchResult search(const Dataset& ds, std::span<const double> q, std::size_t p,
                        std::size_t topk) const;

    void save(const std::string& path) const;
    static HierIndex load(const std::string& path);

  private:
    HierIndex() = default;

    std::vector<HierLevel> levels_;  // coarsest first
    std::size_t n_points_ = 0;
    McssParams params_;
};

}  // namespace kmips
