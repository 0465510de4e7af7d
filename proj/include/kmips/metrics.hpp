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

#include "kmips/exact.hpp"

namespace kmips {

// |true top-K  intersect  retrieved top-K| / K. Order-insensitive.
double precision_at_k(const TopK& true_topk, const TopK& retrieved_topk, std::size_t k);

// Exact-search cost divided by approximate cost, in dot-equivalents.
double speedup(double exact_cost, double approx_cost);

// Per-query precisions plus workload-level aggregates. The aggregate
// speedup uses the mean cost (dot products are a workload total, so the
// ratio of totals is the meaningful summary).
struct PrecisionReport {
    std::vector<double> per_query_precision;
    double mean_precision = 0.0;
    double mean_cost = 0.0;
    double speedup = 0.0;
};

struct QueryOutcome {
    double precision = 0.0;
    double cost = 0.0;
};

// exact_cost_per_query is n for a full linear scan.
PrecisionReport aggregate(std::span<const QueryOutcome> per_query, double exact_cost_per_query);

// One benchmark CSV row:
//   method,params,K,mean_precision,mean_cost,speedup,n_queries,seed
struct CsvRow {
    std::string method;
    std::string params;  // flattened "key=value;key=value"
    std::size_t k = 0;
    double mean_precision = 0.0;
    double mean_cost = 0.0;
    double speedup = 0.0;
    std::size_t n_queries = 0;
    std::uint64_t seed = 0;
};

extern const char* const kCsvHeader;
std::string format_csv_row(const CsvRow& row);
void write_csv(const std::string& path, std::span<const CsvRow> rows);

// Locale-independent shortest-roundtrip formatting for reals; CSV files
// must be byte-identical across runs.
std::string format_double(double v);

}  // namespace kmips
