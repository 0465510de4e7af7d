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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kmips {

enum class ElemType : std::uint8_t { F32 = 0, F64 = 1 };

// Immutable n x d matrix of finite reals with implicit ids 0..n-1.
// Storage is f32 by default; f64 payloads are kept as-is so files
// round-trip bit-exactly and oracle tests can run at full precision.
class Dataset {
  public:
    Dataset() = default;
    Dataset(std::size_t n, std::size_t d, std::vector<float> values);
    Dataset(std::size_t n, std::size_t d, std::vector<double> values);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }
    ElemType elem_type() const { return elem_; }
    bool is_f32() const { return elem_ == ElemType::F32; }

    std::span<const float> row_f32(std::size_t i) const { return {f32_.data() + i * d_, d_}; }
    std::span<const double> row_f64(std::size_t i) const { return {f64_.data() + i * d_, d_}; }

    double value(std::size_t i, std::size_t j) const {
        return is_f32() ? static_cast<double>(f32_[i * d_ + j]) : f64_[i * d_ + j];
    }

    // Row copied into a double buffer; the common query representation.
    std::vector<double> row_values(std::size_t i) const;

    double row_norm_sq(std::size_t i) const;
    // Largest row L2 norm over the whole dataset.
    double max_norm() const;

    std::span<const float> raw_f32() const { return f32_; }
    std::span<const double> raw_f64() const { return f64_; }

    bool operator==(const Dataset& other) const = default;

  private:
    void validate() const;

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    ElemType elem_ = ElemType::F32;
    std::vector<float> f32_;
    std::vector<double> f64_;
};

// Queries share the dataset representation (same file format, same checks).
using QueryBatch = Dataset;

// Binary vector file: magic "MIPS", version u8=1, element-type u8
// (0=f32, 1=f64), n u64 LE, d u32 LE, then n*d elements LE row-major.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// n points around n_clusters Gaussian centers (unit-variance components),
// per-component offset stddev `spread`. Pure function of its arguments.
Dataset gen_synthetic(std::size_t n, std::size_t d, std::size_t n_clusters, double spread,
                      std::uint64_t seed);

// Adds i.i.d. zero-mean Gaussian noise of stddev sigma to every component.
// sigma == 0 returns an identical batch.
QueryBatch corrupt_queries(const QueryBatch& q, double sigma, std::uint64_t seed);

// First n_take distinct row indices of a seeded uniform shuffle of 0..n-1;
// the query-sampling protocol for noise experiments.
std::vector<std::uint32_t> sample_row_ids(std::size_t n, std::size_t n_take, std::uint64_t seed);

// Rows of `ds` selected by `ids`, in order.
Dataset take_rows(const Dataset& ds, std::span<const std::uint32_t> ids);

}  // namespace kmips
