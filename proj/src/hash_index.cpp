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

#include "kmips/hash_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/rng.hpp"

namespace kmips {

namespace {

constexpr char kSrpMagic[5] = "SRPI";
constexpr char kWtaMagic[5] = "WTAI";
constexpr std::uint8_t kVersion = 1;

const std::vector<std::uint32_t>* find_bucket(const HashBuckets& buckets, std::uint64_t code) {
    auto it = std::lower_bound(buckets.begin(), buckets.end(), code,
                               [](const auto& b, std::uint64_t c) { return b.first < c; });
    if (it == buckets.end() || it->first != code) return nullptr;
    return &it->second;
}

template <typename CodeFn>
std::vector<HashBuckets> bucketize(std::size_t n, std::uint32_t n_tables, CodeFn&& code_of) {
    std::vector<HashBuckets> tables(n_tables);
    for (std::uint32_t t = 0; t < n_tables; ++t) {
        std::map<std::uint64_t, std::vector<std::uint32_t>> by_code;
        for (std::uint32_t i = 0; i < n; ++i) by_code[code_of(i, t)].push_back(i);
        tables[t].reserve(by_code.size());
        for (auto& [code, ids] : by_code) tables[t].emplace_back(code, std::move(ids));
    }
    return tables;
}

std::vector<std::uint32_t> union_of_buckets(const std::vector<HashBuckets>& tables,
                                            std::span<const std::uint64_t> codes) {
    std::vector<std::uint32_t> out;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        if (const auto* b = find_bucket(tables[t], codes[t])) {
            out.insert(out.end(), b->begin(), b->end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void write_tables(BinWriter& w, const std::vector<HashBuckets>& tables) {
    for (const HashBuckets& buckets : tables) {
        w.u64(buckets.size());
        for (const auto& [code, ids] : buckets) {
            w.u64(code);
            w.u64(ids.size());
            w.u32_block(ids);
        }
    }
}

std::vector<HashBuckets> read_tables(BinReader& r, std::uint32_t n_tables, std::size_t n_points) {
    std::vector<HashBuckets> tables(n_tables);
    for (HashBuckets& buckets : tables) {
        buckets.resize(r.u64());
        std::uint64_t prev_code = 0;
        bool first = true;
        for (auto& [code, ids] : buckets) {
            code = r.u64();
            if (!first && code <= prev_code) {
                throw FormatError(r.path() + ": bucket codes not strictly increasing");
            }
            first = false;
            prev_code = code;
            ids.resize(r.u64());
            r.u32_block(ids);
            for (std::uint32_t id : ids) {
                if (id >= n_points) throw FormatError(r.path() + ": bucket id out of range");
            }
        }
    }
    return tables;
}

template <typename T>
std::uint64_t srp_code(const Matrix& projections, std::uint32_t p_bits, std::span<const T> v,
                       std::size_t table) {
    std::uint64_t code = 0;
    for (std::uint32_t b = 0; b < p_bits; ++b) {
        double s = dot(v, projections.row(table * p_bits + b));
        if (s >= 0.0) code |= std::uint64_t{1} << b;
    }
    return code;
}

template <typename T>
std::uint64_t wta_code(const std::vector<std::uint32_t>& perms, std::uint32_t p_perms,
                       std::uint32_t prefix_k, std::uint32_t bits, std::span<const T> v,
                       std::size_t table) {
    std::uint64_t code = 0;
    for (std::uint32_t p = 0; p < p_perms; ++p) {
        const std::uint32_t* perm = perms.data() + (table * p_perms + p) * prefix_k;
        std::uint32_t best = 0;
        double best_val = v[perm[0]];
        for (std::uint32_t j = 1; j < prefix_k; ++j) {
            double val = v[perm[j]];
            if (val > best_val) {
                best_val = val;
                best = j;
            }
        }
        code |= static_cast<std::uint64_t>(best) << (p * bits);
    }
    return code;
}

}  // namespace

SrpIndex SrpIndex::build(const TransformedDataset& tds, std::uint32_t n_tables,
                         std::uint32_t p_bits, std::uint64_t seed) {
    if (n_tables == 0) throw ArgumentError("srp build: n_tables must be >= 1");
    if (p_bits == 0 || p_bits > 64) {
        throw ArgumentError("srp build: p_bits must be in [1, 64], got " + std::to_string(p_bits));
    }
    const std::size_t dim = tds.dim();
    SrpIndex idx;
    idx.n_tables_ = n_tables;
    idx.p_bits_ = p_bits;
    idx.n_points_ = tds.size();
    idx.params_ = tds.params;
    idx.projections_ = Matrix(static_cast<std::size_t>(n_tables) * p_bits, dim);
    Rng rng(seed);
    std::vector<double> v(dim);
    for (std::size_t r = 0; r < idx.projections_.rows; ++r) {
        double nsq = 0.0;
        while (!(nsq > 1e-24)) {
            nsq = 0.0;
            for (double& x : v) {
                x = rng.gaussian();
                nsq += x * x;
            }
        }
        double inv = 1.0 / std::sqrt(nsq);
        auto row = idx.projections_.row(r);
        for (std::size_t c = 0; c < dim; ++c) row[c] = static_cast<float>(v[c] * inv);
    }
    idx.tables_ = bucketize(tds.size(), n_tables, [&](std::uint32_t i, std::uint32_t t) {
        return idx.hash_code(tds.data.row(i), t);
    });
    return idx;
}

std::uint64_t SrpIndex::hash_code(std::span<const double> v, std::size_t table) const {
    return srp_code(projections_, p_bits_, v, table);
}

std::uint64_t SrpIndex::hash_code(std::span<const float> v, std::size_t table) const {
    return srp_code(projections_, p_bits_, v, table);
}

std::vector<std::uint32_t> SrpIndex::query_candidates(std::span<const double> q_t,
                                                      CostLedger* ledger) const {
    if (q_t.size() != dim()) {
        throw ArgumentError("srp query: dim " + std::to_string(q_t.size()) + " != index dim " +
                            std::to_string(dim()));
    }
    std::vector<std::uint64_t> codes(n_tables_);
    for (std::uint32_t t = 0; t < n_tables_; ++t) codes[t] = hash_code(q_t, t);
    if (ledger != nullptr) {
        ledger->add_hashing(static_cast<double>(n_tables_) * p_bits_);
    }
    return union_of_buckets(tables_, codes);
}

SearchResult SrpIndex::search(const Dataset& ds, std::span<const double> q,
                              std::size_t topk) const {
    if (ds.size() != points()) {
        throw ArgumentError("srp search: dataset size " + std::to_string(ds.size()) +
                            " != indexed point count " + std::to_string(points()));
    }
    SearchResult res;
    std::vector<double> q_t = apply_q(q, params_);
    std::vector<std::uint32_t> cand = query_candidates(q_t, &res.cost);
    res.empty_candidates = cand.empty();
    res.topk = rerank(ds, q, cand, topk, &res.cost);
    return res;
}

void SrpIndex::save(const std::string& path) const {
    BinWriter w(path);
    w.magic(kSrpMagic);
    w.u8(kVersion);
    w.u32(n_tables_);
    w.u32(p_bits_);
    w.u32(static_cast<std::uint32_t>(dim()));
    w.u64(n_points_);
    w.f64(params_.u);
    w.u32(params_.m);
    w.f64(params_.s);
    w.f32_block(projections_.data);
    write_tables(w, tables_);
    w.close();
}

SrpIndex SrpIndex::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kSrpMagic);
    if (r.u8() != kVersion) throw FormatError(path + ": unsupported srp index version");
    SrpIndex idx;
    idx.n_tables_ = r.u32();
    idx.p_bits_ = r.u32();
    std::uint32_t dim = r.u32();
    idx.n_points_ = r.u64();
    if (idx.n_tables_ == 0 || idx.p_bits_ == 0 || idx.p_bits_ > 64 || dim == 0) {
        throw FormatError(path + ": degenerate srp header");
    }
    idx.params_.u = r.f64();
    idx.params_.m = r.u32();
    idx.params_.s = r.f64();
    idx.projections_ = Matrix(static_cast<std::size_t>(idx.n_tables_) * idx.p_bits_, dim);
    r.f32_block(idx.projections_.data);
    idx.tables_ = read_tables(r, idx.n_tables_, idx.n_points_);
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    return idx;
}

std::uint32_t WtaIndex::bits_per_symbol() const {
    return std::max<std::uint32_t>(1, std::bit_width(prefix_k_ - 1));
}

WtaIndex WtaIndex::build(const TransformedDataset& tds, std::uint32_t n_tables,
                         std::uint32_t p_perms, std::uint32_t prefix_k, std::uint64_t seed,
                         std::uint32_t cost_dim) {
    const std::size_t dim = tds.dim();
    if (n_tables == 0) throw ArgumentError("wta build: n_tables must be >= 1");
    if (p_perms == 0) throw ArgumentError("wta build: p_perms must be >= 1");
    if (prefix_k < 2 || prefix_k > dim) {
        throw ArgumentError("wta build: prefix_k must be in [2, dim], got " +
                            std::to_string(prefix_k));
    }
    WtaIndex idx;
    idx.n_tables_ = n_tables;
    idx.p_perms_ = p_perms;
    idx.prefix_k_ = prefix_k;
    idx.cost_dim_ = cost_dim;
    idx.dim_ = dim;
    idx.n_points_ = tds.size();
    idx.params_ = tds.params;
    if (static_cast<std::uint64_t>(p_perms) * idx.bits_per_symbol() > 64) {
        throw ArgumentError("wta build: " + std::to_string(p_perms) + " symbols of " +
                            std::to_string(idx.bits_per_symbol()) + " bits do not fit in 64");
    }

    Rng rng(seed);
    std::vector<std::uint32_t> pool(dim);
    idx.perms_.resize(static_cast<std::size_t>(n_tables) * p_perms * prefix_k);
    for (std::size_t p = 0; p < static_cast<std::size_t>(n_tables) * p_perms; ++p) {
        std::iota(pool.begin(), pool.end(), 0u);
        for (std::uint32_t j = 0; j < prefix_k; ++j) {
            std::size_t r = j + static_cast<std::size_t>(rng.uniform_u64(dim - j));
            std::swap(pool[j], pool[r]);
            idx.perms_[p * prefix_k + j] = pool[j];
        }
    }
    idx.tables_ = bucketize(tds.size(), n_tables, [&](std::uint32_t i, std::uint32_t t) {
        return idx.hash_code(tds.data.row(i), t);
    });
    return idx;
}

std::uint64_t WtaIndex::hash_code(std::span<const double> v, std::size_t table) const {
    return wta_code(perms_, p_perms_, prefix_k_, bits_per_symbol(), v, table);
}

std::uint64_t WtaIndex::hash_code(std::span<const float> v, std::size_t table) const {
    return wta_code(perms_, p_perms_, prefix_k_, bits_per_symbol(), v, table);
}

std::vector<std::uint32_t> WtaIndex::query_candidates(std::span<const double> q_t,
                                                      CostLedger* ledger) const {
    if (q_t.size() != dim_) {
        throw ArgumentError("wta query: dim " + std::to_string(q_t.size()) + " != index dim " +
                            std::to_string(dim_));
    }
    std::vector<std::uint64_t> codes(n_tables_);
    for (std::uint32_t t = 0; t < n_tables_; ++t) codes[t] = hash_code(q_t, t);
    if (ledger != nullptr) {
        double basis = (cost_dim_ != 0) ? cost_dim_ : static_cast<double>(dim_);
        ledger->add_hashing(static_cast<double>(n_tables_) * p_perms_ * prefix_k_ / basis);
    }
    return union_of_buckets(tables_, codes);
}

SearchResult WtaIndex::search(const Dataset& ds, std::span<const double> q,
                              std::size_t topk) const {
    if (ds.size() != points()) {
        throw ArgumentError("wta search: dataset size " + std::to_string(ds.size()) +
                            " != indexed point count " + std::to_string(points()));
    }
    SearchResult res;
    std::vector<double> q_t = apply_q(q, params_);
    std::vector<std::uint32_t> cand = query_candidates(q_t, &res.cost);
    res.empty_candidates = cand.empty();
    res.topk = rerank(ds, q, cand, topk, &res.cost);
    return res;
}

void WtaIndex::save(const std::string& path) const {
    BinWriter w(path);
    w.magic(kWtaMagic);
    w.u8(kVersion);
    w.u32(n_tables_);
    w.u32(p_perms_);
    w.u32(prefix_k_);
    w.u32(cost_dim_);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u64(n_points_);
    w.f64(params_.u);
    w.u32(params_.m);
    w.f64(params_.s);
    w.u32_block(perms_);
    write_tables(w, tables_);
    w.close();
}

WtaIndex WtaIndex::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic(kWtaMagic);
    if (r.u8() != kVersion) throw FormatError(path + ": unsupported wta index version");
    WtaIndex idx;
    idx.n_tables_ = r.u32();
    idx.p_perms_ = r.u32();
    idx.prefix_k_ = r.u32();
    idx.cost_dim_ = r.u32();
    idx.dim_ = r.u32();
    idx.n_points_ = r.u64();
    if (idx.n_tables_ == 0 || idx.p_perms_ == 0 || idx.prefix_k_ < 2 || idx.prefix_k_ > idx.dim_) {
        throw FormatError(path + ": degenerate wta header");
    }
    idx.params_.u = r.f64();
    idx.params_.m = r.u32();
    idx.params_.s = r.f64();
    idx.perms_.resize(static_cast<std::size_t>(idx.n_tables_) * idx.p_perms_ * idx.prefix_k_);
    r.u32_block(idx.perms_);
    for (std::uint32_t c : idx.perms_) {
        if (c >= idx.dim_) throw FormatError(path + ": permutation entry out of range");
    }
    idx.tables_ = read_tables(r, idx.n_tables_, idx.n_points_);
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    return idx;
}

}  // namespace kmips
