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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "kmips/dataset.hpp"
#include "kmips/error.hpp"
#include "kmips/hier_index.hpp"
#include "kmips/kmeans_index.hpp"
#include "kmips/transform.hpp"
#include "test_util.hpp"

using namespace kmips;

namespace {

struct Fixture {
    Dataset ds;
    TransformedDataset tds;

    explicit Fixture(std::size_t n = 400, std::uint64_t seed = 201)
        : ds(gen_synthetic(n, 8, 6, 0.35, seed)), tds(transform_dataset(ds, fit_mcss(ds))) {}
};

}  // namespace

TEST_CASE("hier: one level reproduces the flat index bit for bit") {
    Fixture f;
    const std::uint32_t sizes[] = {20};
    HierIndex hier = HierIndex::build(f.tds, sizes, kDefaultMaxIters, 77);
    ClusterIndex flat = ClusterIndex::train(f.tds, 20, kDefaultMaxIters, 77);

    REQUIRE(hier.n_levels() == 1);
    CHECK(hier.level(0).centroids == flat.centroids());
    CHECK(hier.level(0).children == flat.inverted_lists());

    // Same searches, same costs: both score 20 nodes then rerank.
    Dataset queries = gen_synthetic(10, 8, 6, 0.35, 78);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto q = queries.row_values(qi);
        SearchResult a = hier.search(f.ds, q, 3, 10);
        SearchResult b = flat.search(f.ds, q, 3, 10);
        CHECK(a.topk == b.topk);
        CHECK(a.cost.routing == b.cost.routing);
        CHECK(a.cost.rerank == b.cost.rerank);
    }
}

TEST_CASE("hier: level structure partitions each layer") {
    Fixture f;
    const std::uint32_t sizes[] = {40, 8};  // finest first
    HierIndex hier = HierIndex::build(f.tds, sizes, kDefaultMaxIters, 88);
    REQUIRE(hier.n_levels() == 2);
    // Stored coarsest first: level 0 has 8 nodes, level 1 has 40.
    CHECK(hier.level(0).centroids.rows == 8);
    CHECK(hier.level(1).centroids.rows == 40);

    // Children of the coarse level partition the 40 finer nodes.
    std::vector<std::uint32_t> seen;
    for (const auto& ch : hier.level(0).children) {
        CHECK(std::is_sorted(ch.begin(), ch.end()));
        seen.insert(seen.end(), ch.begin(), ch.end());
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::uint32_t> expect(40);
    std::iota(expect.begin(), expect.end(), 0u);
    CHECK(seen == expect);

    // Children of the fine level partition the data ids.
    seen.clear();
    for (const auto& ch : hier.level(1).children) seen.insert(seen.end(), ch.begin(), ch.end());
    std::sort(seen.begin(), seen.end());
    expect.resize(f.ds.size());
    std::iota(expect.begin(), expect.end(), 0u);
    CHECK(seen == expect);
}

TEST_CASE("hier: walk keeps p nodes per level and charges scored nodes") {
    Fixture f;
    const std::uint32_t sizes[] = {40, 8};
    HierIndex hier = HierIndex::build(f.tds, sizes, kDefaultMaxIters, 99);
    auto q_t = apply_q(f.ds.row_values(5), hier.params());

    CostLedger led;
    auto frontiers = hier.walk_frontiers(q_t, 3, &led);
    REQUIRE(frontiers.size() == 3);  // two levels + data ids
    CHECK(frontiers[0].size() == 3);
    CHECK(frontiers[1].size() == 3);
    for (const auto& fr : frontiers) CHECK(std::is_sorted(fr.begin(), fr.end()));

    // Routing: all 8 roots scored, then the kept roots' children.
    std::size_t expanded = 0;
    for (std::uint32_t node : frontiers[0]) expanded += hier.level(0).children[node].size();
    CHECK(led.routing == doctest::Approx(8.0 + static_cast<double>(expanded)));

    // walk() returns the last frontier entry.
    CHECK(hier.walk(q_t, 3) == frontiers.back());
}

TEST_CASE("hier: p larger than any level keeps everything and is exact") {
    Fixture f(200);
    const std::uint32_t sizes[] = {25, 5};
    HierIndex hier = HierIndex::build(f.tds, sizes, kDefaultMaxIters, 111);
    Dataset queries = gen_synthetic(8, 8, 6, 0.35, 112);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto q = queries.row_values(qi);
        SearchResult res = hier.search(f.ds, q, 25, 10);
        CHECK(res.topk == exact_mips(f.ds, q, 10));
    }
}

TEST_CASE("hier: build validation") {
    Fixture f(100);
    const std::uint32_t up[] = {5, 10};  // increasing: wrong order
    CHECK_THROWS_AS(HierIndex::build(f.tds, up, kDefaultMaxIters, 1), ArgumentError);
    const std::uint32_t equal[] = {10, 10};
    CHECK_THROWS_AS(HierIndex::build(f.tds, equal, kDefaultMaxIters, 1), ArgumentError);
    const std::uint32_t toobig[] = {101};
    CHECK_THROWS_AS(HierIndex::build(f.tds, toobig, kDefaultMaxIters, 1), ArgumentError);
    const std::uint32_t zero[] = {10, 0};
    CHECK_THROWS_AS(HierIndex::build(f.tds, zero, kDefaultMaxIters, 1), ArgumentError);
    CHECK_THROWS_AS(HierIndex::build(f.tds, {}, kDefaultMaxIters, 1), ArgumentError);
}

TEST_CASE("hier: save/load reproduces structure and searches") {
    TempDir tmp;
    Fixture f;
    const std::uint32_t sizes[] = {30, 6};
    HierIndex hier = HierIndex::build(f.tds, sizes, kDefaultMaxIters, 121);
    const std::string path = tmp.file("hier.idx");
    hier.save(path);
    HierIndex back = HierIndex::load(path);
    REQUIRE(back.n_levels() == 2);
    CHECK(back.points() == hier.points());
    CHECK(back.params() == hier.params());
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(back.level(l).centroids == hier.level(l).centroids);
        CHECK(back.level(l).children == hier.level(l).children);
    }
    Dataset queries = gen_synthetic(6, 8, 6, 0.35, 122);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto q = queries.row_values(qi);
        SearchResult a = hier.search(f.ds, q, 4, 5);
        SearchResult b = back.search(f.ds, q, 4, 5);
        CHECK(a.topk == b.topk);
        CHECK(a.cost.total() == b.cost.total());
    }
}

TEST_CASE("hier: deeper hierarchy routes cheaper than flat at matched recall effort") {
    // With n=2000 and a 3-level hierarchy the routing bill must drop well
    // below the flat index's k=120 centroid scan.
    Dataset ds = gen_synthetic(2000, 8, 12, 0.3, 131);
    TransformedDataset tds = transform_dataset(ds, fit_mcss(ds));
    ClusterIndex flat = ClusterIndex::train(tds, 120, kDefaultMaxIters, 132);
    const std::uint32_t sizes[] = {120, 24, 6};
    HierIndex hier = HierIndex::build(tds, sizes, kDefaultMaxIters, 132);

    auto q = ds.row_values(17);
    SearchResult rf = flat.search(ds, q, 2, 10);
    SearchResult rh = hier.search(ds, q, 2, 10);
    CHECK(rf.cost.routing == 120.0);
    CHECK(rh.cost.routing < 60.0);  // 6 roots + ~2*expansions per level
}
