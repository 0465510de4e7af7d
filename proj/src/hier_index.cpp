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

#include "kmips/hier_index.hpp"

#include <algorithm>
#include <string>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/kmeans_index.hpp"
#include "kmips/rng.hpp"

namespace kmips {

namespace {

constexpr char kMagic[5] = "HKIX";
constexpr std::uint8_t kVersion = 1;

std::vector<std::vector<std::uint32_t>> group_children(std::span<const std::uint32_t> parent_of,
                                                       std::size_t n_parents) {
    std::vector<std::vector<std::uint32_t>> children(n_parents);
    for (std::uint32_t c = 0; c < parent_of.size(); ++c) {
        children[parent_of[c]].push_back(c);
    }
    return children;
}

}  // namespace

HierIndex HierIndex::build(const TransformedDataset& tds,
                           std::span<const std::uint32_t> level_sizes, std::uint32_t max_iters,
                           std::uint64_t seed) {
    const std::size_t n = tds.size();
    if (level_sizes.empty()) throw ArgumentError("hier build: need at least one level");
    for (std::size_t i = 0; i < level_sizes.size(); ++i) {
        if (level_sizes[i] == 0) throw ArgumentError("hier build: level size must be >= 1");
        if (i == 0) {
            if (level_sizes[i] > n) {
                throw ArgumentError("hier build: finest level size " +
                                    std::to_string(level_sizes[i]) + " exceeds point count " +
                                    std::to_string(n));
            }
        } else if (level_sizes[i] >= level_sizes[i - 1]) {
            throw ArgumentError("hier build: level sizes must be strictly decreasing");
        }
    }

    HierIndex idx;
    idx.params_ = tds.params;
    idx.n_points_ = n;
    const std::size_t depth = level_sizes.size();
    idx.levels_.resize(depth);

    const Matrix* level_input = &tds.data;
    for (std::size_t i = 0; i < depth; ++i) {
        std::uint64_t level_seed = (i == 0) ? seed : derive_seed(seed, i);
        KmeansResult km =
            spherical_kmeans(*level_input, level_sizes[i], max_iters, level_seed);
        HierLevel& lvl = idx.levels_[depth - 1 - i];
        lvl.centroids = std::move(km.centroids);
        lvl.children = group_children(km.assignments, level_sizes[i]);
        level_input = &lvl.centroids;
    }
    return idx;
}

std::vector<std::vector<std::uint32_t>> HierIndex::walk_frontiers(std::span<const double> q_t,
                                                                  std::size_t p,
                                                                  CostLedger* ledger) const {
    if (p == 0) throw ArgumentError("hier walk: p must be >= 1");
    if (q_t.size() != dim()) {
        throw ArgumentError("hier walk: query dim " + std::to_string(q_t.size()) +
                            " != index dim " + std::to_string(dim()));
    }
    std::vector<std::vector<std::uint32_t>> frontiers(levels_.size());
    std::vector<std::uint32_t> current(levels_.front().centroids.rows);
    for (std::uint32_t i = 0; i < current.size(); ++i) current[i] = i;

    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const Matrix& cents = levels_[l].centroids;
        if (ledger != nullptr) ledger->add_routing(static_cast<double>(current.size()));
        if (current.size() > p) {
            TopKSelector sel(p, /*larger_is_better=*/true);
            for (std::uint32_t id : current) sel.offer(id, dot(q_t, cents.row(id)));
            current = sel.finish().ids;
            std::sort(current.begin(), current.end());
        }
        frontiers[l] = current;
        std::vector<std::uint32_t> next;
        for (std::uint32_t id : current) {
            const auto& kids = levels_[l].children[id];
            next.insert(next.end(), kids.begin(), kids.end());
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    frontiers.push_back(std::move(current));  // data ids from the finest survivors
    return frontiers;
}

std::vector<std::uint32_t> HierIndex::walk(std::span<const double> q_t, std::size_t p,
                                           CostLedger* ledger) const {
    return walk_frontiers(q_t, p, ledger).back();
}

SearchResult HierIndex::search(const Dataset& ds, std::span<const double> q, std::size_t p,
                               std::size_t topk) const {
    if (ds.size() != points()) {
        throw ArgumentError("hier search: dataset size " + std::to_string(ds.size()) +
                            " != indexed point count " + std::to_string(points()));
    }
    SearchResult res;
    std::vector<double> q_t = apply_q(q, params_);
    std::vector<std::uint32_t> cand = walk(q_t, p, &res.cost);
    res.empty_candidates = cand.empty();
    res.topk = rerank(ds, q, cand, topk, &res.cost);
    return res;
}

void HierIndex::save(const std::string& path) const {
    BinWriter w(path);
    w.magic(kMagic);
    w.u8(kVersion);
    w.u32(static_cast<std::uint32_t>(levels_.size()));
    w.u32(static_cast<std::uint32_t>(dim()));
    w.u64(n_points_);
    w.f64(params_.u);
    w.u32(params_.m);
    w.f64(params_.s);
    for (const HierLevel& lvl : levels_) {
        w.u32(static_cast<std::uint32_t>(lvl.centroids.rows));
        w.f32_block(lvl.centroids.data);
    }
    // Child links are stored as parent-of arrays over the finer level, the
    // same shape the trainer produced them in.
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        std::size_t n_below = (l + 1 < levels_.size()) ? levels_[l + 1].centroids.rows : n_points_;
        std::vector<std::uint32_t> parent_of(n_below);
        for (std::uint32_t node = 0; node < levels_[l].children.size(); ++node) {
            for (std::uint32_t c : levels_[l].children[node]) parent_of[c] = node;
        }
        w.u32_block(parent_of);
    }
    w.close();
}

HierIndex HierIndex::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kMagic);
    if (r.u8() != kVersion) throw FormatError(path + ": unsupported hierarchy version");
    std::uint32_t depth = r.u32();
    std::uint32_t dim = r.u32();
    std::uint64_t n = r.u64();
    if (depth == 0 || dim == 0) throw FormatError(path + ": degenerate hierarchy header");
    HierIndex idx;
    idx.n_points_ = n;
    idx.params_.u = r.f64();
    idx.params_.m = r.u32();
    idx.params_.s = r.f64();
    idx.levels_.resize(depth);
    for (HierLevel& lvl : idx.levels_) {
        std::uint32_t rows = r.u32();
        lvl.centroids = Matrix(rows, dim);
        r.f32_block(lvl.centroids.data);
    }
    for (std::size_t l = 0; l < depth; ++l) {
        std::size_t n_below = (l + 1 < depth) ? idx.levels_[l + 1].centroids.rows : n;
        std::vector<std::uint32_t> parent_of(n_below);
        r.u32_block(parent_of);
        std::size_t n_parents = idx.levels_[l].centroids.rows;
        for (std::uint32_t parent : parent_of) {
            if (parent >= n_parents) throw FormatError(path + ": child link out of range");
        }
        idx.levels_[l].children = group_children(parent_of, n_parents);
    }
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    return idx;
}

}  // namespace kmips
