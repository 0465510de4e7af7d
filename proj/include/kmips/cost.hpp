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

namespace kmips {

// Work accounting in dot-equivalent operations: one unit is one full
// dot product; hashing may contribute fractions. Only ever increases.
// The total is the sum of the labeled parts by construction.
struct CostLedger {
    double routing = 0.0;  // centroid / tree-projection scoring
    double hashing = 0.0;  // random projections and permutation prefixes
    double rerank = 0.0;   // exact scan over the candidate set

    double total() const { return routing + hashing + rerank; }

    void add_routing(double v) { routing += v; }
    void add_hashing(double v) { hashing += v; }
    void add_rerank(double v) { rerank += v; }

    void merge(const CostLedger& other) {
        routing += other.routing;
        hashing += other.hashing;
        rerank += other.rerank;
    }
};

}  // namespace kmips
