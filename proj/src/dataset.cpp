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

#include "kmips/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/matrix.hpp"
#include "kmips/rng.hpp"

namespace kmips {

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<float> values)
    : n_(n), d_(d), elem_(ElemType::F32), f32_(std::move(values)) {
    validate();
}

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), elem_(ElemType::F64), f64_(std::move(values)) {
    validate();
}

void Dataset::validate() const {
    if (n_ < 1 || d_ < 1) throw ArgumentError("dataset must have n >= 1 and d >= 1");
    const std::size_t want = n_ * d_;
    const std::size_t got = is_f32() ? f32_.size() : f64_.size();
    if (got != want)
        throw LengthError("dataset payload has " + std::to_string(got) + " elements, expected " +
                          std::to_string(want));
    if (is_f32()) {
        for (float v : f32_)
            if (!std::isfinite(v)) throw DataError("dataset contains a non-finite value");
    } else {
        for (double v : f64_)
            if (!std::isfinite(v)) throw DataError("dataset contains a non-finite value");
    }
}

std::vector<double> Dataset::row_values(std::size_t i) const {
    std::vector<double> out(d_);
    if (is_f32()) {
        auto r = row_f32(i);
        std::copy(r.begin(), r.end(), out.begin());
    } else {
        auto r = row_f64(i);
        std::copy(r.begin(), r.end(), out.begin());
    }
    return out;
}

double Dataset::row_norm_sq(std::size_t i) const {
    return is_f32() ? norm_sq(row_f32(i)) : norm_sq(row_f64(i));
}

double Dataset::max_norm() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) best = std::max(best, row_norm_sq(i));
    return std::sqrt(best);
}

namespace {
constexpr char kVecMagic[5] = "MIPS";
constexpr std::uint8_t kVecVersion = 1;
}  // namespace

Dataset load_dataset(const std::string& path) {
    BinReader in(path);
    in.expect_magic(kVecMagic);
    const std::uint8_t version = in.u8();
    if (version != kVecVersion)
        throw FormatError("unsupported vector file version " + std::to_string(version) + " in " +
                          path);
    const std::uint8_t elem = in.u8();
    if (elem > 1) throw FormatError("unknown element type in " + path);
    const std::uint64_t n = in.u64();
    const std::uint32_t d = in.u32();
    if (n == 0 || d == 0) throw FormatError("empty dataset declared in " + path);
    if (n > UINT32_MAX) throw FormatError("dataset too large (ids are 32-bit): " + path);

    const std::size_t count = static_cast<std::size_t>(n) * d;
    Dataset ds;
    if (elem == 0) {
        std::vector<float> values(count);
        in.f32_block(values);
        ds = Dataset(n, d, std::move(values));
    } else {
        std::vector<double> values(count);
        in.f64_block(values);
        ds = Dataset(n, d, std::move(values));
    }
    if (!in.at_eof()) throw LengthError("trailing bytes after payload in " + path);
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    BinWriter out(path);
    out.magic(kVecMagic);
    out.u8(kVecVersion);
    out.u8(static_cast<std::uint8_t>(ds.elem_type()));
    out.u64(ds.size());
    out.u32(static_cast<std::uint32_t>(ds.dim()));
    if (ds.is_f32())
        out.f32_block(ds.raw_f32());
    else
        out.f64_block(ds.raw_f64());
    out.close();
}

Dataset gen_synthetic(std::size_t n, std::size_t d, std::size_t n_clusters, double spread,
                      std::uint64_t seed) {
    if (n < 1 || d < 1) throw ArgumentError("gen_synthetic: n and d must be >= 1");
    if (n_clusters < 1 || n_clusters > n)
        throw ArgumentError("gen_synthetic: need 1 <= n_clusters <= n");
    if (!(spread > 0.0)) throw ArgumentError("gen_synthetic: spread must be > 0");

    Rng rng(seed);
    std::vector<double> centers(n_clusters * d);
    for (double& c : centers) c = rng.gaussian();

    std::vector<float> values(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = rng.uniform_u64(n_clusters);
        for (std::size_t j = 0; j < d; ++j)
            values[i * d + j] = static_cast<float>(centers[c * d + j] + spread * rng.gaussian());
    }
    return Dataset(n, d, std::move(values));
}

QueryBatch corrupt_queries(const QueryBatch& q, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw ArgumentError("corrupt_queries: sigma must be >= 0");
    if (sigma == 0.0) return q;

    Rng rng(seed);
    if (q.is_f32()) {
        std::vector<float> values(q.raw_f32().begin(), q.raw_f32().end());
        for (float& v : values) v = static_cast<float>(v + sigma * rng.gaussian());
        return QueryBatch(q.size(), q.dim(), std::move(values));
    }
    std::vector<double> values(q.raw_f64().begin(), q.raw_f64().end());
    for (double& v : values) v += sigma * rng.gaussian();
    return QueryBatch(q.size(), q.dim(), std::move(values));
}

std::vector<std::uint32_t> sample_row_ids(std::size_t n, std::size_t n_take, std::uint64_t seed) {
    if (n_take > n) throw ArgumentError("sample_row_ids: n_take exceeds n");
    std::vector<std::uint32_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < n_take; ++i) {
        const std::size_t j = i + rng.uniform_u64(n - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(n_take);
    return ids;
}

Dataset take_rows(const Dataset& ds, std::span<const std::uint32_t> ids) {
    if (ids.empty()) throw ArgumentError("take_rows: empty id list");
    for (std::uint32_t id : ids)
        if (id >= ds.size()) throw ArgumentError("take_rows: row id out of range");
    const std::size_t d = ds.dim();
    if (ds.is_f32()) {
        std::vector<float> values(ids.size() * d);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto r = ds.row_f32(ids[i]);
            std::copy(r.begin(), r.end(), values.begin() + i * d);
        }
        return Dataset(ids.size(), d, std::move(values));
    }
    std::vector<double> values(ids.size() * d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto r = ds.row_f64(ids[i]);
        std::copy(r.begin(), r.end(), values.begin() + i * d);
    }
    return Dataset(ids.size(), d, std::move(values));
}

}  // namespace kmips
