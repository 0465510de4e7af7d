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

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "kmips/dataset.hpp"
#include "kmips/error.hpp"
#include "kmips/hash_index.hpp"
#include "kmips/rng.hpp"
#include "kmips/transform.hpp"
#include "test_util.hpp"

using namespace kmips;

namespace {

// Handcrafted transformed dataset: rows as given, params fixed. Useful when
// a test wants direct control over the hashed vectors.
TransformedDataset raw_tds(std::size_t n, std::size_t d, std::uint64_t seed) {
    TransformedDataset tds;
    tds.params = McssParams{0.83, 3, 1.0};
    tds.data = Matrix(n, d);
    Rng rng(seed);
    for (auto& v : tds.data.data) v = static_cast<float>(rng.gaussian());
    return tds;
}

void check_tables_canonical(const std::vector<HashBuckets>& tables, std::size_t n) {
    for (const HashBuckets& buckets : tables) {
        std::vector<std::uint32_t> seen;
        for (std::size_t b = 0; b < buckets.size(); ++b) {
            if (b > 0) CHECK(buckets[b].first > buckets[b - 1].first);
            CHECK(!buckets[b].second.empty());
            CHECK(std::is_sorted(buckets[b].second.begin(), buckets[b].second.end()));
            seen.insert(seen.end(), buckets[b].second.begin(), buckets[b].second.end());
        }
        std::sort(seen.begin(), seen.end());
        std::vector<std::uint32_t> expect(n);
        std::iota(expect.begin(), expect.end(), 0u);
        CHECK(seen == expect);
    }
}

}  // namespace

TEST_CASE("srp: per-bit collision rate follows 1 - theta/pi") {
    TransformedDataset tds = raw_tds(4, 8, 1);
    SrpIndex idx = SrpIndex::build(tds, 32, 16, 2026);  // 512 projections
    for (double theta : {std::numbers::pi / 6, std::numbers::pi / 3, std::numbers::pi / 2}) {
        std::vector<double> u(8, 0.0), v(8, 0.0);
        u[0] = 1.0;
        v[0] = std::cos(theta);
        v[1] = std::sin(theta);
        std::size_t agree = 0, total = 0;
        for (std::uint32_t t = 0; t < idx.n_tables(); ++t) {
            std::uint64_t diff = idx.hash_code(std::span<const double>(u), t) ^
                                 idx.hash_code(std::span<const double>(v), t);
            agree += 16 - std::popcount(diff);
            total += 16;
        }
        double rate = static_cast<double>(agree) / static_cast<double>(total);
        CHECK(rate == doctest::Approx(1.0 - theta / std::numbers::pi).epsilon(0.09));
    }
}

TEST_CASE("srp: identical vectors always collide, antipodal never") {
    TransformedDataset tds = raw_tds(6, 10, 3);
    SrpIndex idx = SrpIndex::build(tds, 8, 12, 4);
    std::vector<double> v(10);
    Rng rng(5);
    for (auto& x : v) x = rng.gaussian();
    std::vector<double> neg(10);
    for (std::size_t i = 0; i < 10; ++i) neg[i] = -v[i];
    for (std::uint32_t t = 0; t < 8; ++t) {
        std::uint64_t cv = idx.hash_code(std::span<const double>(v), t);
        std::uint64_t cn = idx.hash_code(std::span<const double>(neg), t);
        CHECK(cv == idx.hash_code(std::span<const double>(v), t));
        // Every bit flips: r.v and r.(-v) have opposite signs.
        CHECK((cv ^ cn) == (std::uint64_t{1} << 12) - 1);
    }
}

TEST_CASE("srp: tables are canonical and partition the ids") {
    Dataset ds = gen_synthetic(300, 8, 5, 0.4, 401);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    SrpIndex idx = SrpIndex::build(tds, 6, 10, 402);
    CHECK(idx.tables().size() == 6);
    check_tables_canonical(idx.tables(), 300);
    // Unit-norm projection rows.
    for (std::size_t r = 0; r < idx.projections().rows; ++r)
        CHECK(std::sqrt(norm_sq(idx.projections().row(r))) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("srp: a point's own bucket always contains it") {
    Dataset ds = gen_synthetic(200, 6, 4, 0.4, 411);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    SrpIndex idx = SrpIndex::build(tds, 4, 8, 412);
    for (std::uint32_t i : {0u, 17u, 199u}) {
        std::vector<double> q_t(tds.dim());
        for (std::size_t j = 0; j < tds.dim(); ++j) q_t[j] = tds.data.row(i)[j];
        auto cand = idx.query_candidates(q_t);
        CHECK(std::binary_search(cand.begin(), cand.end(), i));
        CHECK(std::is_sorted(cand.begin(), cand.end()));
        CHECK(std::adjacent_find(cand.begin(), cand.end()) == cand.end());
    }
}

TEST_CASE("srp: hashing cost is tables x bits plus rerank of candidates") {
    Dataset ds = gen_synthetic(250, 7, 4, 0.4, 421);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    SrpIndex idx = SrpIndex::build(tds, 5, 9, 422);
    auto q = ds.row_values(3);
    SearchResult res = idx.search(ds, q, 10);
    CHECK(res.cost.hashing == 45.0);
    CHECK(res.cost.routing == 0.0);
    auto q_t = apply_q(q, idx.params());
    CHECK(res.cost.rerank == static_cast<double>(idx.query_candidates(q_t).size()));
}

TEST_CASE("srp: antipodal query of a one-bucket index comes back empty") {
    TransformedDataset tds = raw_tds(1, 8, 31);
    // Duplicate the single row so every table has exactly one bucket.
    Matrix m(3, 8);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 8; ++j) m.row(i)[j] = tds.data.row(0)[j];
    tds.data = m;
    SrpIndex idx = SrpIndex::build(tds, 4, 16, 32);
    std::vector<double> neg(8);
    for (std::size_t j = 0; j < 8; ++j) neg[j] = -static_cast<double>(tds.data.row(0)[j]);
    auto cand = idx.query_candidates(neg);
    CHECK(cand.empty());
}

TEST_CASE("srp: build validation") {
    TransformedDataset tds = raw_tds(10, 4, 41);
    CHECK_THROWS_AS(SrpIndex::build(tds, 0, 8, 1), ArgumentError);
    CHECK_THROWS_AS(SrpIndex::build(tds, 2, 0, 1), ArgumentError);
    CHECK_THROWS_AS(SrpIndex::build(tds, 2, 65, 1), ArgumentError);
}

TEST_CASE("srp: save/load reproduces candidates exactly") {
    TempDir tmp;
    Dataset ds = gen_synthetic(220, 6, 4, 0.4, 431);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    SrpIndex idx = SrpIndex::build(tds, 6, 11, 432);
    const std::string path = tmp.file("srp.idx");
    idx.save(path);
    SrpIndex back = SrpIndex::load(path);
    CHECK(back.n_tables() == 6);
    CHECK(back.p_bits() == 11);
    CHECK(back.params() == idx.params());
    CHECK(back.projections() == idx.projections());
    CHECK(back.tables() == idx.tables());
    Dataset queries = gen_synthetic(10, 6, 4, 0.4, 433);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto q = queries.row_values(qi);
        SearchResult a = idx.search(ds, q, 5);
        SearchResult b = back.search(ds, q, 5);
        CHECK(a.topk == b.topk);
        CHECK(a.cost.total() == b.cost.total());
    }
    // Corruption checks.
    std::string bytes = slurp(path);
    std::ofstream(tmp.file("trunc.idx"), std::ios::binary)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4));
    CHECK_THROWS_AS(SrpIndex::load(tmp.file("trunc.idx")), LengthError);
    std::string trail = bytes + "!";
    std::ofstream(tmp.file("trail.idx"), std::ios::binary)
        .write(trail.data(), static_cast<std::streamsize>(trail.size()));
    CHECK_THROWS_AS(SrpIndex::load(tmp.file("trail.idx")), LengthError);
}

TEST_CASE("wta: symbols decode to the argmax of each permuted prefix") {
    TransformedDataset tds = raw_tds(200, 12, 51);
    WtaIndex idx = WtaIndex::build(tds, 3, 5, 6, 52);
    const std::uint32_t bits = idx.bits_per_symbol();
    CHECK(bits == 3);  // ceil(log2(6))
    for (std::uint32_t i = 0; i < 40; ++i) {
        std::vector<double> v(12);
        for (std::size_t j = 0; j < 12; ++j) v[j] = tds.data.row(i)[j];
        for (std::uint32_t t = 0; t < 3; ++t) {
            std::uint64_t code = idx.hash_code(std::span<const double>(v), t);
            for (std::uint32_t p = 0; p < 5; ++p) {
                std::uint32_t symbol = (code >> (p * bits)) & ((1u << bits) - 1);
                // Independent argmax over the permuted prefix; first max wins.
                const std::uint32_t* perm =
                    idx.permutations().data() + (t * 5 + p) * 6;
                std::uint32_t want = 0;
                for (std::uint32_t j = 1; j < 6; ++j)
                    if (v[perm[j]] > v[perm[want]]) want = j;
                CHECK(symbol == want);
            }
        }
    }
}

TEST_CASE("wta: permutation prefixes are distinct in-range coordinates") {
    TransformedDataset tds = raw_tds(50, 9, 61);
    WtaIndex idx = WtaIndex::build(tds, 4, 6, 5, 62);
    REQUIRE(idx.permutations().size() == 4 * 6 * 5);
    for (std::size_t p = 0; p < 24; ++p) {
        std::set<std::uint32_t> seen;
        for (std::size_t j = 0; j < 5; ++j) {
            std::uint32_t c = idx.permutations()[p * 5 + j];
            CHECK(c < 9);
            seen.insert(c);
        }
        CHECK(seen.size() == 5);
    }
}

TEST_CASE("wta: rank-order codes ignore monotone scaling") {
    TransformedDataset tds = raw_tds(30, 10, 71);
    WtaIndex idx = WtaIndex::build(tds, 4, 4, 8, 72);
    std::vector<double> v(10);
    Rng rng(73);
    for (auto& x : v) x = rng.gaussian();
    std::vector<double> scaled(10);
    for (std::size_t j = 0; j < 10; ++j) scaled[j] = 3.0 * v[j];
    for (std::uint32_t t = 0; t < 4; ++t) {
        CHECK(idx.hash_code(std::span<const double>(v), t) ==
              idx.hash_code(std::span<const double>(scaled), t));
    }
}

TEST_CASE("wta: tables are canonical and partition the ids") {
    Dataset ds = gen_synthetic(260, 9, 5, 0.4, 441);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    WtaIndex idx = WtaIndex::build(tds, 5, 7, 9, 442);
    check_tables_canonical(idx.tables(), 260);
}

TEST_CASE("wta: fractional hashing cost, with and without an override basis") {
    Dataset ds = gen_synthetic(180, 13, 4, 0.4, 451);  // hashed dim 16
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    WtaIndex idx = WtaIndex::build(tds, 6, 5, 8, 452);
    auto q = ds.row_values(2);
    SearchResult res = idx.search(ds, q, 10);
    CHECK(res.cost.hashing == doctest::Approx(6.0 * 5.0 * 8.0 / 16.0).epsilon(1e-12));

    WtaIndex idx2 = WtaIndex::build(tds, 6, 5, 8, 452, /*cost_dim=*/13);
    SearchResult res2 = idx2.search(ds, q, 10);
    CHECK(res2.cost.hashing == doctest::Approx(6.0 * 5.0 * 8.0 / 13.0).epsilon(1e-12));
    // Same hash structure, only the charged cost differs.
    CHECK(res2.topk == res.topk);
    CHECK(res2.cost.rerank == res.cost.rerank);
}

TEST_CASE("wta: a point's own bucket always contains it") {
    Dataset ds = gen_synthetic(150, 8, 4, 0.4, 461);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    WtaIndex idx = WtaIndex::build(tds, 4, 6, 7, 462);
    for (std::uint32_t i : {0u, 75u, 149u}) {
        std::vector<double> q_t(tds.dim());
        for (std::size_t j = 0; j < tds.dim(); ++j) q_t[j] = tds.data.row(i)[j];
        auto cand = idx.query_candidates(q_t);
        CHECK(std::binary_search(cand.begin(), cand.end(), i));
    }
}

TEST_CASE("wta: build validation") {
    TransformedDataset tds = raw_tds(20, 16, 81);
    CHECK_THROWS_AS(WtaIndex::build(tds, 0, 4, 8, 1), ArgumentError);
    CHECK_THROWS_AS(WtaIndex::build(tds, 2, 0, 8, 1), ArgumentError);
    CHECK_THROWS_AS(WtaIndex::build(tds, 2, 4, 1, 1), ArgumentError);
    CHECK_THROWS_AS(WtaIndex::build(tds, 2, 4, 17, 1), ArgumentError);
    // 17 symbols x 4 bits = 68 > 64.
    CHECK_THROWS_AS(WtaIndex::build(tds, 2, 17, 16, 1), ArgumentError);
    // 16 symbols x 4 bits = 64 fits.
    WtaIndex ok = WtaIndex::build(tds, 2, 16, 16, 1);
    CHECK(ok.bits_per_symbol() == 4);
}

TEST_CASE("wta: save/load reproduces candidates exactly") {
    TempDir tmp;
    Dataset ds = gen_synthetic(190, 7, 4, 0.4, 471);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    WtaIndex idx = WtaIndex::build(tds, 5, 6, 8, 472, /*cost_dim=*/7);
    const std::string path = tmp.file("wta.idx");
    idx.save(path);
    WtaIndex back = WtaIndex::load(path);
    CHECK(back.n_tables() == 5);
    CHECK(back.p_perms() == 6);
    CHECK(back.prefix_k() == 8);
    CHECK(back.cost_dim() == 7);
    CHECK(back.params() == idx.params());
    CHECK(back.permutations() == idx.permutations());
    CHECK(back.tables() == idx.tables());
    Dataset queries = gen_synthetic(8, 7, 4, 0.4, 473);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto q = queries.row_values(qi);
        SearchResult a = idx.search(ds, q, 5);
        SearchResult b = back.search(ds, q, 5);
        CHECK(a.topk == b.topk);
        CHECK(a.cost.total() == b.cost.total());
    }
}
