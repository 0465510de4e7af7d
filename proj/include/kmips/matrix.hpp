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

#include <cstddef>
#include <span>
#include <vector>

namespace kmips {

// Dense row-major f32 matrix. Plain storage shared by transformed datasets,
// centroid blocks and projection tables.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

// Dot product with double accumulation in four fixed lanes. The reduction
// order is part of the contract: rankings must not depend on how the loop
// is scheduled or vectorized.
inline double dot(std::span<const float> a, std::span<const float> b) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += static_cast<double>(a[i]) * b[i];
        acc1 += static_cast<double>(a[i + 1]) * b[i + 1];
        acc2 += static_cast<double>(a[i + 2]) * b[i + 2];
        acc3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) acc0 += static_cast<double>(a[i]) * b[i];
    return (acc0 + acc1) + (acc2 + acc3);
}

inline double dot(std::span<const double> a, std::span<const float> b) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) acc0 += a[i] * b[i];
    return (acc0 + acc1) + (acc2 + acc3);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) acc0 += a[i] * b[i];
    return (acc0 + acc1) + (acc2 + acc3);
}

inline double norm_sq(std::span<const float> a) { return dot(a, a); }
inline double norm_sq(std::span<const double> a) { return dot(a, a); }

}  // namespace kmips
