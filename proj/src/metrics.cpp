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

#include "kmips/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "kmips/error.hpp"

namespace kmips {

double precision_at_k(const TopK& true_topk, const TopK& retrieved_topk, std::size_t k) {
    if (k == 0) throw ArgumentError("precision_at_k: K must be >= 1");
    if (true_topk.size() > k || retrieved_topk.size() > k)
        throw ArgumentError("precision_at_k: list longer than K");
    std::vector<std::uint32_t> a = true_topk.ids;
    std::vector<std::uint32_t> b = retrieved_topk.ids;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t hits = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++hits, ++i, ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double speedup(double exact_cost, double approx_cost) {
    if (!(approx_cost > 0.0)) throw ArgumentError("speedup: approximate cost must be > 0");
    return exact_cost / approx_cost;
}

PrecisionReport aggregate(std::span<const QueryOutcome> per_query, double exact_cost_per_query) {
    if (per_query.empty()) throw ArgumentError("aggregate: no per-query outcomes");
    PrecisionReport report;
    report.per_query_precision.reserve(per_query.size());
    double sum_p = 0.0, sum_c = 0.0;
    for (const QueryOutcome& q : per_query) {
        report.per_query_precision.push_back(q.precision);
        sum_p += q.precision;
        sum_c += q.cost;
    }
    const double n = static_cast<double>(per_query.size());
    report.mean_precision = sum_p / n;
    report.mean_cost = sum_c / n;
    report.speedup = speedup(exact_cost_per_query, report.mean_cost);
    return report;
}

const char* const kCsvHeader = "method,params,K,mean_precision,mean_cost,speedup,n_queries,seed";

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string format_csv_row(const CsvRow& row) {
    std::string out;
    out += row.method;
    out += ',';
    out += row.params;
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += format_double(row.mean_precision);
    out += ',';
    out += format_double(row.mean_cost);
    out += ',';
    out += format_double(row.speedup);
    out += ',';
    out += std::to_string(row.n_queries);
    out += ',';
    out += std::to_string(row.seed);
    return out;
}

void write_csv(const std::string& path, std::span<const CsvRow> rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << kCsvHeader << '\n';
    for (const CsvRow& row : rows) out << format_csv_row(row) << '\n';
    out.close();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace kmips
