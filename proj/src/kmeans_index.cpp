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

#include "kmips/kmeans_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/rng.hpp"

namespace kmips {

namespace {

constexpr char kMagic[5] = "KMIX";
constexpr std::uint8_t kVersion = 1;

std::vector<std::vector<std::uint32_t>> member_lists(std::span<const std::uint32_t> assignments,
                                                     std::uint32_t k) {
    std::vector<std::vector<std::uint32_t>> lists(k);
    for (std::uint32_t j = 0; j < assignments.size(); ++j) {
        lists[assignments[j]].push_back(j);
    }
    return lists;
}

// Unit-normalized mean of the listed rows, accumulated in double in
// ascending id order. Returns false when the sum is numerically zero.
bool mean_direction(const Matrix& points, std::span<const std::uint32_t> members,
                    std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint32_t id : members) {
        auto row = points.row(id);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c];
    }
    double nsq = 0.0;
    for (double v : out) nsq += v * v;
    if (!(nsq > 1e-24)) return false;
    double inv = 1.0 / std::sqrt(nsq);
    for (double& v : out) v *= inv;
    return true;
}

}  // namespace

KmeansResult spherical_kmeans(const Matrix& points, std::uint32_t k, std::uint32_t max_iters,
                              std::uint64_t seed) {
    const std::size_t n = points.rows;
    const std::size_t dim = points.cols;
    if (n == 0) throw ArgumentError("spherical_kmeans: empty point set");
    if (k == 0 || k > n) {
        throw ArgumentError("spherical_kmeans: k must be in [1, n], got k=" + std::to_string(k) +
                            " n=" + std::to_string(n));
    }
    if (max_iters == 0) throw ArgumentError("spherical_kmeans: max_iters must be >= 1");

    Rng rng(seed);
    KmeansResult res;
    res.centroids = Matrix(k, dim);
    res.assignments.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        res.assignments[j] = static_cast<std::uint32_t>(rng.uniform_u64(k));
    }

    std::vector<double> acc(dim);
    for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
        auto lists = member_lists(res.assignments, k);

        // Repair: donate to each empty cluster the member of the currently
        // largest cluster that matches its own centroid worst.
        for (std::uint32_t empty = 0; empty < k; ++empty) {
            if (!lists[empty].empty()) continue;
            std::uint32_t donor = 0;
            for (std::uint32_t i = 1; i < k; ++i) {
                if (lists[i].size() > lists[donor].size()) donor = i;
            }
            double worst = std::numeric_limits<double>::infinity();
            std::uint32_t moved = lists[donor].front();
            if (mean_direction(points, lists[donor], acc)) {
                for (std::uint32_t id : lists[donor]) {
                    double score = dot(acc, points.row(id));
                    if (score < worst) {
                        worst = score;
                        moved = id;
                    }
                }
            }
            auto& dl = lists[donor];
            dl.erase(std::find(dl.begin(), dl.end(), moved));
            lists[empty].push_back(moved);
            res.assignments[moved] = empty;
        }

        std::vector<std::uint32_t> degenerate;
        for (std::uint32_t i = 0; i < k; ++i) {
            auto crow = res.centroids.row(i);
            if (mean_direction(points, lists[i], acc)) {
                for (std::size_t c = 0; c < dim; ++c) crow[c] = static_cast<float>(acc[c]);
            } else {
                degenerate.push_back(i);
            }
        }
        for (std::uint32_t i : degenerate) {
            double nsq = 0.0;
            while (!(nsq > 1e-24)) {
                nsq = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    acc[c] = rng.gaussian();
                    nsq += acc[c] * acc[c];
                }
            }
            double inv = 1.0 / std::sqrt(nsq);
            auto crow = res.centroids.row(i);
            for (std::size_t c = 0; c < dim; ++c) crow[c] = static_cast<float>(acc[c] * inv);
        }

        bool changed = false;
        double objective = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            auto row = points.row(j);
            std::uint32_t best = 0;
            double best_score = dot(row, res.centroids.row(0));
            for (std::uint32_t i = 1; i < k; ++i) {
                double score = dot(row, res.centroids.row(i));
                if (score > best_score) {
                    best_score = score;
                    best = i;
                }
            }
            objective += best_score;
            if (best != res.assignments[j]) {
                res.assignments[j] = best;
                changed = true;
            }
        }
        res.objective_trace.push_back(objective);
        res.iters_run = iter + 1;
        if (!changed) break;
    }
    return res;
}

ClusterIndex ClusterIndex::train(const TransformedDataset& tds, std::uint32_t k,
                                 std::uint32_t max_iters, std::uint64_t seed) {
    ClusterIndex idx;
    KmeansResult km = spherical_kmeans(tds.data, k, max_iters, seed);
    idx.centroids_ = std::move(km.centroids);
    idx.assignments_ = std::move(km.assignments);
    idx.params_ = tds.params;
    idx.iters_run_ = km.iters_run;
    idx.trace_ = std::move(km.objective_trace);
    idx.rebuild_lists();
    return idx;
}

void ClusterIndex::rebuild_lists() {
    lists_ = member_lists(assignments_, k());
}

std::vector<std::uint32_t> ClusterIndex::top_p_clusters(std::span<const double> q_t, std::size_t p,
                                                        CostLedger* ledger) const {
    if (p == 0 || p > k()) {
        throw ArgumentError("top_p_clusters: p must be in [1, k], got p=" + std::to_string(p) +
                            " k=" + std::to_string(k()));
    }
    if (q_t.size() != dim()) {
        throw ArgumentError("top_p_clusters: query dim " + std::to_string(q_t.size()) +
                            " != index dim " + std::to_string(dim()));
    }
    TopKSelector sel(p, /*larger_is_better=*/true);
    for (std::uint32_t i = 0; i < k(); ++i) {
        sel.offer(i, dot(q_t, centroids_.row(i)));
    }
    if (ledger != nullptr) ledger->add_routing(k());
    return sel.finish().ids;
}

std::vector<std::uint32_t> ClusterIndex::candidates(std::span<const double> q_t, std::size_t p,
                                                    CostLedger* ledger) const {
    std::vector<std::uint32_t> clusters = top_p_clusters(q_t, p, ledger);
    std::vector<std::uint32_t> out;
    for (std::uint32_t c : clusters) {
        out.insert(out.end(), lists_[c].begin(), lists_[c].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

SearchResult ClusterIndex::search(const Dataset& ds, std::span<const double> q, std::size_t p,
                                  std::size_t topk) const {
    if (ds.size() != points()) {
        throw ArgumentError("search: dataset size " + std::to_string(ds.size()) +
                            " != indexed point count " + std::to_string(points()));
    }
    SearchResult res;
    std::vector<double> q_t = apply_q(q, params_);
    std::vector<std::uint32_t> cand = candidates(q_t, p, &res.cost);
    res.empty_candidates = cand.empty();
    res.topk = rerank(ds, q, cand, topk, &res.cost);
    return res;
}

void ClusterIndex::save(const std::string& path) const {
    BinWriter w(path);
    w.magic(kMagic);
    w.u8(kVersion);
    w.u32(k());
    w.u32(static_cast<std::uint32_t>(dim()));
    w.u64(points());
    w.f64(params_.u);
    w.u32(params_.m);
    w.f64(params_.s);
    w.f32_block(centroids_.data);
    w.u32_block(assignments_);
    w.close();
}

ClusterIndex ClusterIndex::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kMagic);
    if (r.u8() != kVersion) throw FormatError(path + ": unsupported cluster index version");
    std::uint32_t k = r.u32();
    std::uint32_t dim = r.u32();
    std::uint64_t n = r.u64();
    ClusterIndex idx;
    idx.params_.u = r.f64();
    idx.params_.m = r.u32();
    idx.params_.s = r.f64();
    if (k == 0 || dim == 0) throw FormatError(path + ": degenerate cluster index header");
    idx.centroids_ = Matrix(k, dim);
    r.f32_block(idx.centroids_.data);
    idx.assignments_.resize(n);
    r.u32_block(idx.assignments_);
    for (std::uint32_t a : idx.assignments_) {
        if (a >= k) throw FormatError(path + ": assignment out of range");
    }
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    idx.rebuild_lists();
    return idx;
}

}  // namespace kmips
