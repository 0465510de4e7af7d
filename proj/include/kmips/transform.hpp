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
#include <utility>
#include <vector>

#include "kmips/dataset.hpp"
#include "kmips/matrix.hpp"

namespace kmips {

// Parameters of the inner-product -> cosine reduction. Data is scaled by
// s = U / max_i ||x_i|| so every scaled norm is at most U < 1, then m
// norm-dependent components are appended to make all data norms nearly
// equal (m/4 + ||s*x||^(2^(m+1)), the tail vanishing as m grows).
struct McssParams {
    double u = 0.83;
    std::uint32_t m = 3;
    double s = 0.0;

    bool operator==(const McssParams&) const = default;
};

inline constexpr double kDefaultMcssU = 0.83;
inline constexpr std::uint32_t kDefaultMcssM = 3;

McssParams fit_mcss(const Dataset& ds, double u = kDefaultMcssU,
                    std::uint32_t m = kDefaultMcssM);

// Data-side mapping: [s*x, 1/2 - ||s*x||^2, 1/2 - ||s*x||^4, ..., 1/2 - ||s*x||^(2^m)].
std::vector<double> apply_p(std::span<const double> x, const McssParams& params);

// Query-side mapping: [q, 0, ..., 0]. The query is left unscaled; appended
// zeros make Q(q)'s dot with P(x) equal s*(q's dot with x), so every argmax
// is preserved and reranking can stay in the original space.
std::vector<double> apply_q(std::span<const double> q, const McssParams& params);

// All rows mapped through P, materialized once as f32 (index builds touch
// every row many times).
struct TransformedDataset {
    McssParams params;
    Matrix data;  // n x (d + m)

    std::size_t size() const { return data.rows; }
    std::size_t dim() const { return data.cols; }
};

TransformedDataset transform_dataset(const Dataset& ds, const McssParams& params);

// Constant-norm augmentation for the tree baseline: row i becomes
// [x_i, sqrt(phi^2 - ||x_i||^2)] with phi the max norm, so nearest neighbor
// under Euclidean distance coincides with maximum inner product.
struct NnsParams {
    double phi = 0.0;

    bool operator==(const NnsParams&) const = default;
};

std::pair<NnsParams, Dataset> fit_apply_nns(const Dataset& ds);

// Query-side of the NNS augmentation: [q, 0].
std::vector<double> augment_query_nns(std::span<const double> q);

}  // namespace kmips
