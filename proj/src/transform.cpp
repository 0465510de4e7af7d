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

#include "kmips/transform.hpp"

#include <cmath>

#include "kmips/error.hpp"

namespace kmips {

McssParams fit_mcss(const Dataset& ds, double u, std::uint32_t m) {
    if (!(u > 0.0) || !(u < 1.0)) throw ArgumentError("fit_mcss: U must lie in (0,1)");
    if (m < 1) throw ArgumentError("fit_mcss: m must be >= 1");
    const double max_norm = ds.max_norm();
    if (max_norm == 0.0) throw DegenerateDataError("fit_mcss: all dataset vectors are zero");
    return McssParams{u, m, u / max_norm};
}

std::vector<double> apply_p(std::span<const double> x, const McssParams& params) {
    const std::size_t d = x.size();
    std::vector<double> out(d + params.m);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double v = params.s * x[j];
        out[j] = v;
        sq += v * v;
    }
    // Appended component j is 1/2 - ||s*x||^(2^j); repeated squaring.
    double t = sq;
    for (std::uint32_t j = 0; j < params.m; ++j) {
        out[d + j] = 0.5 - t;
        t *= t;
    }
    return out;
}

std::vector<double> apply_q(std::span<const double> q, const McssParams& params) {
    std::vector<double> out(q.size() + params.m, 0.0);
    std::copy(q.begin(), q.end(), out.begin());
    return out;
}

TransformedDataset transform_dataset(const Dataset& ds, const McssParams& params) {
    TransformedDataset tds;
    tds.params = params;
    tds.data = Matrix(ds.size(), ds.dim() + params.m);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::vector<double> mapped = apply_p(ds.row_values(i), params);
        auto dst = tds.data.row(i);
        for (std::size_t j = 0; j < mapped.size(); ++j) dst[j] = static_cast<float>(mapped[j]);
    }
    return tds;
}

std::pair<NnsParams, Dataset> fit_apply_nns(const Dataset& ds) {
    const double phi = ds.max_norm();
    if (phi == 0.0) throw DegenerateDataError("fit_apply_nns: all dataset vectors are zero");

    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    std::vector<float> values(n * (d + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j)
            values[i * (d + 1) + j] = static_cast<float>(ds.value(i, j));
        const double rest = phi * phi - ds.row_norm_sq(i);
        values[i * (d + 1) + d] = static_cast<float>(rest > 0.0 ? std::sqrt(rest) : 0.0);
    }
    return {NnsParams{phi}, Dataset(n, d + 1, std::move(values))};
}

std::vector<double> augment_query_nns(std::span<const double> q) {
    std::vector<double> out(q.size() + 1, 0.0);
    std::copy(q.begin(), q.end(), out.begin());
    return out;
}

}  // namespace kmips
