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

#include "kmips/dataset.hpp"
#include "kmips/exact.hpp"
#include "kmips/transform.hpp"

namespace kmips {

// Balanced binary space partition over the norm-augmented data: points are
// centered and recursively split at the lower median of their projection
// onto successive principal directions (one direction per level, shared by
// all nodes of that level). A query descends to exactly one leaf and is
// reranked against its members.
class PcaTree {
  public:
    // Requires 2^depth <= n and depth <= d+1. depth 0 degenerates to a
    // single leaf holding everything, i.e. exact search.
    static PcaTree build(const Dataset& ds, std::uint32_t depth);

    std::uint32_t depth() const { return depth_; }
    std::size_t dim() const { return mean_.size(); }  // augmented dim d+1
    std::size_t points() const { return n_points_; }
    const NnsParams& params() const { return params_; }
    std::span<const double> mean() const { return mean_; }
    std::span<const double> direction(std::size_t level) const {
        return {dirs_.data() + level * mean_.size(), mean_.size()};
    }
    // Level order: node 0 is the root, node i has children 2i+1 and 2i+2.
    const std::vector<double>& thresholds() const { return thresholds_; }
    const std::vector<std::vector<std::uint32_t>>& leaves() const { return leaves_; }

    // Leaf index reached by [q, 0]; charges one routing dot per level.
    std::uint32_t route(std::span<const double> q, CostLedger* ledger = nullptr) const;

    SearchResult search(const Dataset& ds, std::span<const double> q, std::size_t topk) const;

    void save(const std::string& path) const;
    static PcaTree load(const std::string& path);

  private:
    PcaTree() = default;
    void finish_init();

    std::uint32_t depth_ = 0;
    std::size_t n_points_ = 0;
    NnsParams params_;
    std::vector<double> mean_;        // d+1
    std::vector<double> dirs_;        // depth x (d+1), unit rows
    std::vector<double> thresholds_;  // 2^depth - 1, level order
    std::vector<std::vector<std::uint32_t>> leaves_;  // 2^depth, ascending ids
    std::vector<double> mean_dot_;    // mean . direction(l), derived
};

}  // namespace kmips
