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
#include <utility>
#include <vector>

#include "kmips/exact.hpp"
#include "kmips/matrix.hpp"
#include "kmips/transform.hpp"

namespace kmips {

// One hash table: buckets sorted by code, ids ascending within a bucket.
// The sorted layout is the canonical on-disk order.
using HashBuckets = std::vector<std::pair<std::uint64_t, std::vector<std::uint32_t>>>;

// Signed random projections over the MCSS-transformed data: bit b of a
// code is [r_b . v >= 0]. Two unit vectors collide on one bit with
// probability 1 - theta/pi where theta is their angle.
class SrpIndex {
  public:
    static SrpIndex build(const TransformedDataset& tds, std::uint32_t n_tables,
                          std::uint32_t p_bits, std::uint64_t seed);

    std::uint32_t n_tables() const { return n_tables_; }
    std::uint32_t p_bits() const { return p_bits_; }
    std::size_t dim() const { return projections_.cols; }
    std::size_t points() const { return n_points_; }
    const McssParams& params() const { return params_; }
    const Matrix& projections() const { return projections_; }  // (T*b) x dim unit rows
    const std::vector<HashBuckets>& tables() const { return tables_; }

    std::uint64_t hash_code(std::span<const double> v, std::size_t table) const;
    std::uint64_t hash_code(std::span<const float> v, std::size_t table) const;

    // Union of the query's buckets across tables, ascending; charges
    // n_tables * p_bits hashing dots.
    std::vector<std::uint32_t> query_candidates(std::span<const double> q_t,
                                                CostLedger* ledger = nullptr) const;

    SearchResult search(const Dataset& ds, std::span<const double> q, std::size_t topk) const;

    void save(const std::string& path) const;
    static SrpIndex load(const std::string& path);

  private:
    SrpIndex() = default;

    std::uint32_t n_tables_ = 0;
    std::uint32_t p_bits_ = 0;
    std::size_t n_points_ = 0;
    McssParams params_;
    Matrix projections_;
    std::vector<HashBuckets> tables_;
};

// Winner-take-all hashing: each permutation contributes the argmax position
// within the first prefix_k permuted coordinates, and the per-permutation
// symbols are packed into one code per table. Rank-order comparisons only,
// so hashing charges fractional dot-equivalents: prefix_k / cost basis
// compares per permutation.
class WtaIndex {
  public:
    // cost_dim overrides the denominator of the fractional hashing cost;
    // 0 means the hashed dimension d+m.
    static WtaIndex build(const TransformedDataset& tds, std::uint32_t n_tables,
                          std::uint32_t p_perms, std::uint32_t prefix_k, std::uint64_t seed,
                          std::uint32_t cost_dim = 0);

    std::uint32_t n_tables() const { return n_tables_; }
    std::uint32_t p_perms() const { return p_perms_; }
    std::uint32_t prefix_k() const { return prefix_k_; }
    std::uint32_t cost_dim() const { return cost_dim_; }
    std::uint32_t bits_per_symbol() const;
    std::size_t dim() const { return dim_; }
    std::size_t points() const { return n_points_; }
    const McssParams& params() const { return params_; }
    // Permutation p of table t starts at (t * p_perms + p) * prefix_k.
    const std::vector<std::uint32_t>& permutations() const { return perms_; }
    const std::vector<HashBuckets>& tables() const { return tables_; }

    std::uint64_t hash_code(std::span<const double> v, std::size_t table) const;
    std::uint64_t hash_code(std::span<const float> v, std::size_t table) const;

    std::vector<std::uint32_t> query_candidates(std::span<const double> q_t,
                                                CostLedger* ledger = nullptr) const;

    SearchResult search(const Dataset& ds, std::span<const double> q, std::size_t topk) const;

    void save(const std::string& path) const;
    static WtaIndex load(const std::string& path);

  private:
    WtaIndex() = default;

    std::uint32_t n_tables_ = 0;
    std::uint32_t p_perms_ = 0;
    std::uint32_t prefix_k_ = 0;
    std::uint32_t cost_dim_ = 0;
    std::size_t dim_ = 0;
    std::size_t n_points_ = 0;
    McssParams params_;
    std::vector<std::uint32_t> perms_;  // (T * p_perms) x prefix_k
    std::vector<HashBuckets> tables_;
};

}  // namespace kmips
