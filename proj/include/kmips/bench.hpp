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
#include <string_view>
#include <variant>
#include <vector>

#include "kmips/dataset.hpp"
#include "kmips/exact.hpp"
#include "kmips/hash_index.hpp"
#include "kmips/hier_index.hpp"
#include "kmips/kmeans_index.hpp"
#include "kmips/metrics.hpp"
#include "kmips/pca_tree.hpp"

namespace kmips {

enum class Method { kExact, kKmeans, kHierKmeans, kPcaTree, kSrp, kWta };

std::string method_name(Method m);
Method parse_method(std::string_view name);
std::vector<Method> parse_method_list(std::string_view csv);

// Union of every method's knobs; each method reads only its own. Zeros
// mean "pick the default for this dataset" where noted.
struct HyperParams {
    std::uint32_t k_clusters = 0;       // kmeans; 0: ceil(sqrt(n))
    std::uint32_t top_p = 0;            // kmeans/hier search width; 0: 3 flat, 8 hier
    std::vector<std::uint32_t> levels;  // hier, finest first; empty: {ceil(n^2/3), ceil(n^1/3)}
    std::uint32_t pca_depth = 8;
    std::uint32_t tables = 8;
    std::uint32_t bits = 16;        // srp bits per table
    std::uint32_t perms = 8;        // wta permutations per table
    std::uint32_t prefix_k = 16;    // wta prefix length; clamped to d+m
    std::uint32_t wta_cost_dim = 0; // 0: charge against the hashed dimension
    double mcss_u = kDefaultMcssU;
    std::uint32_t mcss_m = kDefaultMcssM;
    std::uint32_t max_iters = kDefaultMaxIters;

    bool operator==(const HyperParams&) const = default;
};

// Fills in dataset-dependent defaults; n and d are the dataset shape.
HyperParams resolve_defaults(Method m, HyperParams hp, std::size_t n, std::size_t d);

// Canonical "key=value;..." strings. build_params covers exactly the knobs
// that influence index construction; flatten_params adds the search-time
// ones and is what lands in the CSV params column.
std::string build_params(Method m, const HyperParams& hp);
std::string flatten_params(Method m, const HyperParams& hp);

// Seed an index build so it depends only on (run seed, method, build
// params): rows are reproducible in isolation and search-only knob changes
// reuse the identical index.
std::uint64_t config_seed(std::uint64_t run_seed, Method m, const HyperParams& hp);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t content_hash(const Dataset& ds);

struct BuiltIndex {
    Method method = Method::kExact;
    HyperParams hp;  // resolved
    std::variant<std::monostate, ClusterIndex, HierIndex, PcaTree, SrpIndex, WtaIndex> index;
};

BuiltIndex build_index(Method m, const Dataset& ds, const HyperParams& hp, std::uint64_t seed);
SearchResult search_index(const BuiltIndex& built, const Dataset& ds, std::span<const double> q,
                          std::size_t topk);

// ---- ground truth ----

struct GroundTruth {
    std::size_t k_max = 0;
    std::vector<TopK> per_query;
};

GroundTruth compute_ground_truth(const Dataset& ds, const QueryBatch& queries, std::size_t k_max);
TopK truncated(const TopK& t, std::size_t k);

void save_ground_truth(const std::string& path, const GroundTruth& gt, std::uint64_t data_hash,
                       std::uint64_t query_hash);
// Throws FormatError when the stored hashes do not match the given ones.
GroundTruth load_ground_truth(const std::string& path, std::uint64_t data_hash,
                              std::uint64_t query_hash);
// Loads `path` if it exists and matches (hashes agree, stored K >= k_max),
// else computes and (when path is nonempty) rewrites it. Results are
// identical either way.
GroundTruth ensure_ground_truth(const std::string& path, const Dataset& ds,
                                const QueryBatch& queries, std::size_t k_max);

// ---- experiments ----

struct SweepSpec {
    Method method = Method::kKmeans;
    std::vector<HyperParams> grid;            // one entry per index configuration
    std::vector<std::size_t> k_list{1, 10, 100};
    std::uint64_t seed = 0;
    std::string gt_cache;                     // optional cache path
};

// One row per (grid point, K), sorted by method, speedup, K.
std::vector<CsvRow> run_sweep(const SweepSpec& spec, const Dataset& ds,
                              const QueryBatch& queries);

struct NoiseSpec {
    std::vector<Method> methods{Method::kKmeans, Method::kPcaTree, Method::kSrp, Method::kWta};
    std::vector<double> sigmas{0.0, 0.1, 0.2, 0.4};
    std::vector<std::size_t> k_list{1, 10, 100};
    double target_speedup = 30.0;
    double tolerance = 0.2;
    std::size_t n_queries = 2000;  // clamped to n; queries are dataset rows
    std::uint64_t seed = 0;
    HyperParams base;  // starting point for per-method calibration
};

// Queries are sampled from the dataset, each method is calibrated to the
// target speedup on the clean queries, then evaluated against per-sigma
// recomputed ground truth. Rows ordered by (method, sigma, K).
std::vector<CsvRow> run_noise(const NoiseSpec& spec, const Dataset& ds);

// ---- calibration ----

enum class CalibKnob { kAuto, kTopP, kKClusters, kDepth, kTables };

struct CalibrationResult {
    HyperParams hp;  // resolved, knob set to the chosen value
    double achieved = 0.0;
};

// Adjusts the method's dominant size knob until the measured speedup (mean
// over `queries`, against an n-dot exact scan) lands within
// tolerance*target. kAuto picks top_p for the k-means indexes, depth for
// the tree, table count for the hashes.
CalibrationResult calibrate_speedup(Method m, const Dataset& ds, const QueryBatch& queries,
                                    double target, double tolerance, const HyperParams& base,
                                    CalibKnob knob, std::uint64_t seed);

}  // namespace kmips
