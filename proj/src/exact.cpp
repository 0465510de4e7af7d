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

#include "kmips/exact.hpp"

#include <algorithm>
#include <cmath>

#include "kmips/error.hpp"
#include "kmips/matrix.hpp"

namespace kmips {

bool TopKSelector::better(double s1, std::uint32_t id1, double s2, std::uint32_t id2) const {
    if (s1 != s2) return larger_is_better_ ? s1 > s2 : s1 < s2;
    return id1 < id2;
}

void TopKSelector::offer(std::uint32_t id, double score) {
    // heap_ keeps the worst retained entry first.
    auto worse_first = [this](const std::pair<double, std::uint32_t>& a,
                              const std::pair<double, std::uint32_t>& b) {
        return better(a.first, a.second, b.first, b.second);
    };
    if (heap_.size() < k_) {
        heap_.emplace_back(score, id);
        std::push_heap(heap_.begin(), heap_.end(), worse_first);
        return;
    }
    if (k_ == 0) return;
    if (better(score, id, heap_.front().first, heap_.front().second)) {
        std::pop_heap(heap_.begin(), heap_.end(), worse_first);
        heap_.back() = {score, id};
        std::push_heap(heap_.begin(), heap_.end(), worse_first);
    }
}

TopK TopKSelector::finish() {
    std::sort(heap_.begin(), heap_.end(),
              [this](const std::pair<double, std::uint32_t>& a,
                     const std::pair<double, std::uint32_t>& b) {
                  return better(a.first, a.second, b.first, b.second);
              });
    TopK out;
    out.ids.reserve(heap_.size());
    out.scores.reserve(heap_.size());
    for (const auto& [score, id] : heap_) {
        out.ids.push_back(id);
        out.scores.push_back(score);
    }
    heap_.clear();
    return out;
}

namespace {

void check_query(const Dataset& ds, std::span<const double> q, std::size_t k) {
    if (q.size() != ds.dim()) throw ArgumentError("query dimension does not match dataset");
    if (k < 1 || k > ds.size()) throw ArgumentError("need 1 <= K <= n");
}

double dot_row(const Dataset& ds, std::size_t i, std::span<const double> q) {
    return ds.is_f32() ? dot(q, ds.row_f32(i)) : dot(q, ds.row_f64(i));
}

}  // namespace

TopK exact_mips(const Dataset& ds, std::span<const double> q, std::size_t k, CostLedger* ledger) {
    check_query(ds, q, k);
    TopKSelector sel(k, /*larger_is_better=*/true);
    for (std::size_t i = 0; i < ds.size(); ++i)
        sel.offer(static_cast<std::uint32_t>(i), dot_row(ds, i, q));
    if (ledger) ledger->add_rerank(static_cast<double>(ds.size()));
    return sel.finish();
}

TopK exact_mcss(const Dataset& ds, std::span<const double> q, std::size_t k, CostLedger* ledger) {
    check_query(ds, q, k);
    TopKSelector sel(k, /*larger_is_better=*/true);
    bool any = false;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double nsq = ds.row_norm_sq(i);
        if (nsq == 0.0) continue;
        any = true;
        sel.offer(static_cast<std::uint32_t>(i), dot_row(ds, i, q) / std::sqrt(nsq));
    }
    if (!any) throw DegenerateDataError("exact_mcss: all rows have zero norm");
    if (ledger) ledger->add_rerank(static_cast<double>(ds.size()));
    return sel.finish();
}

TopK exact_nns(const Dataset& ds, std::span<const double> q, std::size_t k, CostLedger* ledger) {
    check_query(ds, q, k);
    const double qsq = dot(q, q);
    TopKSelector sel(k, /*larger_is_better=*/false);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double dist = qsq - 2.0 * dot_row(ds, i, q) + ds.row_norm_sq(i);
        sel.offer(static_cast<std::uint32_t>(i), dist);
    }
    if (ledger) ledger->add_rerank(static_cast<double>(ds.size()));
    return sel.finish();
}

TopK rerank(const Dataset& ds, std::span<const double> q,
            std::span<const std::uint32_t> candidates, std::size_t k, CostLedger* ledger) {
    if (q.size() != ds.dim()) throw ArgumentError("query dimension does not match dataset");
    if (k < 1) throw ArgumentError("rerank: K must be >= 1");
    TopKSelector sel(k, /*larger_is_better=*/true);
    for (std::uint32_t id : candidates) {
        if (id >= ds.size()) throw ArgumentError("rerank: candidate id out of range");
        sel.offer(id, dot_row(ds, id, q));
    }
    if (ledger) ledger->add_rerank(static_cast<double>(candidates.size()));
    return sel.finish();
}

}  // namespace kmips
