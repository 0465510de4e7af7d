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

#include "kmips/pca_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/matrix.hpp"
#include "kmips/rng.hpp"

namespace kmips {

namespace {

constexpr char kMagic[5] = "PCAT";
constexpr std::uint8_t kVersion = 1;
constexpr std::uint64_t kPowerSeed = 0x9d2c5680aa21e4c9ull;
constexpr std::uint32_t kPowerIters = 100;
constexpr double kPowerTol = 1e-7;

void subtract_projections(std::span<const double> dirs, std::size_t n_dirs, std::size_t dim,
                          std::vector<double>& v) {
    for (std::size_t j = 0; j < n_dirs; ++j) {
        std::span<const double> d{dirs.data() + j * dim, dim};
        double c = dot(d, std::span<const double>(v));
        for (std::size_t i = 0; i < dim; ++i) v[i] -= c * d[i];
    }
}

bool normalize(std::vector<double>& v) {
    double nsq = norm_sq(std::span<const double>(v));
    if (!(nsq > 1e-24)) return false;
    double inv = 1.0 / std::sqrt(nsq);
    for (double& x : v) x *= inv;
    return true;
}

void random_unit(Rng& rng, std::span<const double> dirs, std::size_t n_dirs,
                 std::vector<double>& v) {
    const std::size_t dim = v.size();
    for (;;) {
        for (double& x : v) x = rng.gaussian();
        subtract_projections(dirs, n_dirs, dim, v);
        if (normalize(v)) return;
    }
}

// The largest-magnitude coordinate is made positive so the direction's sign
// does not depend on the random start.
void canonicalize_sign(std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    if (v[best] < 0.0) {
        for (double& x : v) x = -x;
    }
}

double lower_median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    return values[mid];
}

}  // namespace

PcaTree PcaTree::build(const Dataset& ds, std::uint32_t depth) {
    const std::size_t n = ds.size();
    if (depth > 63 || (std::uint64_t{1} << depth) > n) {
        throw ArgumentError("pca build: 2^depth must not exceed point count " + std::to_string(n));
    }
    if (depth > ds.dim() + 1) {
        throw ArgumentError("pca build: depth " + std::to_string(depth) +
                            " exceeds augmented dimension " + std::to_string(ds.dim() + 1));
    }

    PcaTree tree;
    tree.depth_ = depth;
    tree.n_points_ = n;
    auto [params, aug] = fit_apply_nns(ds);
    tree.params_ = params;
    const std::size_t dim = aug.dim();

    tree.mean_.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = aug.row_f32(i);
        for (std::size_t c = 0; c < dim; ++c) tree.mean_[c] += row[c];
    }
    for (double& m : tree.mean_) m /= static_cast<double>(n);

    // Upper-triangle covariance in double; enough for power iteration and
    // cheaper than materializing centered data.
    std::vector<double> cov(dim * dim, 0.0);
    std::vector<double> delta(dim);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = aug.row_f32(i);
        for (std::size_t c = 0; c < dim; ++c) delta[c] = row[c] - tree.mean_[c];
        for (std::size_t a = 0; a < dim; ++a) {
            const double da = delta[a];
            double* cr = cov.data() + a * dim;
            for (std::size_t b = a; b < dim; ++b) cr[b] += da * delta[b];
        }
    }
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a; b < dim; ++b) {
            cov[a * dim + b] /= static_cast<double>(n);
            cov[b * dim + a] = cov[a * dim + b];
        }
    }

    Rng rng(kPowerSeed);
    tree.dirs_.resize(static_cast<std::size_t>(depth) * dim);
    std::vector<double> v(dim), w(dim);
    for (std::uint32_t l = 0; l < depth; ++l) {
        random_unit(rng, tree.dirs_, l, v);
        for (std::uint32_t it = 0; it < kPowerIters; ++it) {
            for (std::size_t a = 0; a < dim; ++a) {
                w[a] = dot(std::span<const double>(cov.data() + a * dim, dim),
                           std::span<const double>(v));
            }
            subtract_projections(tree.dirs_, l, dim, w);
            if (!normalize(w)) {
                // Rank deficit: any unit vector orthogonal to the previous
                // directions is a valid (zero-variance) completion.
                random_unit(rng, tree.dirs_, l, w);
                v = w;
                break;
            }
            double align = std::abs(dot(std::span<const double>(w), std::span<const double>(v)));
            v = w;
            if (align >= 1.0 - kPowerTol) break;
        }
        canonicalize_sign(v);
        std::copy(v.begin(), v.end(), tree.dirs_.begin() + static_cast<std::ptrdiff_t>(l) * dim);
    }

    // Split level by level; partitioning an ascending list keeps both
    // halves ascending.
    std::vector<std::vector<std::uint32_t>> nodes(1);
    nodes[0].resize(n);
    for (std::uint32_t i = 0; i < n; ++i) nodes[0][i] = i;
    tree.thresholds_.assign((std::size_t{1} << depth) - 1, 0.0);
    std::vector<double> proj(n);
    std::size_t node_base = 0;
    for (std::uint32_t l = 0; l < depth; ++l) {
        std::span<const double> dir = tree.direction(l);
        double mean_dot = dot(std::span<const double>(tree.mean_), dir);
        for (std::size_t i = 0; i < n; ++i) {
            proj[i] = dot(dir, aug.row_f32(i)) - mean_dot;
        }
        std::vector<std::vector<std::uint32_t>> next(nodes.size() * 2);
        for (std::size_t nd = 0; nd < nodes.size(); ++nd) {
            std::vector<double> values;
            values.reserve(nodes[nd].size());
            for (std::uint32_t id : nodes[nd]) values.push_back(proj[id]);
            double thr = lower_median(std::move(values));
            tree.thresholds_[node_base + nd] = thr;
            for (std::uint32_t id : nodes[nd]) {
                next[2 * nd + (proj[id] <= thr ? 0 : 1)].push_back(id);
            }
        }
        nodes = std::move(next);
        node_base = 2 * node_base + 1;
    }
    tree.leaves_ = std::move(nodes);
    tree.finish_init();
    return tree;
}

void PcaTree::finish_init() {
    mean_dot_.resize(depth_);
    for (std::uint32_t l = 0; l < depth_; ++l) {
        mean_dot_[l] = dot(std::span<const double>(mean_), direction(l));
    }
}

std::uint32_t PcaTree::route(std::span<const double> q, CostLedger* ledger) const {
    if (q.size() + 1 != dim()) {
        throw ArgumentError("pca route: query dim " + std::to_string(q.size()) +
                            " != data dim " + std::to_string(dim() - 1));
    }
    std::vector<double> q_aug = augment_query_nns(q);
    std::size_t node = 0;
    for (std::uint32_t l = 0; l < depth_; ++l) {
        double proj = dot(direction(l), std::span<const double>(q_aug)) - mean_dot_[l];
        node = 2 * node + (proj <= thresholds_[node] ? 1 : 2);
    }
    if (ledger != nullptr) ledger->add_routing(static_cast<double>(depth_));
    return static_cast<std::uint32_t>(node - ((std::size_t{1} << depth_) - 1));
}

SearchResult PcaTree::search(const Dataset& ds, std::span<const double> q,
                             std::size_t topk) const {
    if (ds.size() != points()) {
        throw ArgumentError("pca search: dataset size " + std::to_string(ds.size()) +
                            " != indexed point count " + std::to_string(points()));
    }
    SearchResult res;
    std::uint32_t leaf = route(q, &res.cost);
    const std::vector<std::uint32_t>& cand = leaves_[leaf];
    res.empty_candidates = cand.empty();
    res.topk = rerank(ds, q, cand, topk, &res.cost);
    return res;
}

void PcaTree::save(const std::string& path) const {
    BinWriter w(path);
    w.magic(kMagic);
    w.u8(kVersion);
    w.u32(depth_);
    w.u32(static_cast<std::uint32_t>(dim()));
    w.u64(n_points_);
    w.f64(params_.phi);
    w.f64_block(mean_);
    w.f64_block(dirs_);
    w.f64_block(thresholds_);
    for (const auto& leaf : leaves_) {
        w.u64(leaf.size());
        w.u32_block(leaf);
    }
    w.close();
}

PcaTree PcaTree::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kMagic);
    if (r.u8() != kVersion) throw FormatError(path + ": unsupported tree version");
    PcaTree tree;
    tree.depth_ = r.u32();
    std::uint32_t dim = r.u32();
    tree.n_points_ = r.u64();
    if (dim == 0 || tree.depth_ > 63) throw FormatError(path + ": degenerate tree header");
    tree.params_.phi = r.f64();
    tree.mean_.resize(dim);
    r.f64_block(tree.mean_);
    tree.dirs_.resize(static_cast<std::size_t>(tree.depth_) * dim);
    r.f64_block(tree.dirs_);
    tree.thresholds_.resize((std::size_t{1} << tree.depth_) - 1);
    r.f64_block(tree.thresholds_);
    tree.leaves_.resize(std::size_t{1} << tree.depth_);
    for (auto& leaf : tree.leaves_) {
        leaf.resize(r.u64());
        r.u32_block(leaf);
        for (std::uint32_t id : leaf) {
            if (id >= tree.n_points_) throw FormatError(path + ": leaf id out of range");
        }
    }
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    tree.finish_init();
    return tree;
}

}  // namespace kmips
