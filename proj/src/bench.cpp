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

#include "kmips/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <utility>

#include "kmips/error.hpp"
#include "kmips/io.hpp"
#include "kmips/rng.hpp"
#include "kmips/transform.hpp"

namespace kmips {

namespace {

constexpr char kGtMagic[5] = "KGTC";
constexpr std::uint8_t kGtVersion = 1;

// Seed streams for the independent random choices of one noise run.
constexpr std::uint64_t kQuerySampleStream = 0x51u;
constexpr std::uint64_t kNoiseStreamBase = 0xC000u;

// Smallest r with r*r >= v.
std::uint32_t isqrt_ceil(std::uint64_t v) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r < v) ++r;
    while (r > 1 && (r - 1) * (r - 1) >= v) --r;
    return static_cast<std::uint32_t>(r);
}

// Smallest r with r*r*r >= v.
std::uint32_t icbrt_ceil(std::uint64_t v) {
    auto r = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(v)));
    while (static_cast<unsigned __int128>(r) * r * r < v) ++r;
    while (r > 1 && static_cast<unsigned __int128>(r - 1) * (r - 1) * (r - 1) >= v) --r;
    return static_cast<std::uint32_t>(r);
}

void append_mcss(std::string& s, const HyperParams& hp) {
    s += ";u=" + format_double(hp.mcss_u) + ";m=" + std::to_string(hp.mcss_m);
}

double mean_cost_over(const BuiltIndex& built, const Dataset& ds, const QueryBatch& queries) {
    double total = 0.0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<double> q = queries.row_values(i);
        SearchResult r = search_index(built, ds, q, 1);
        total += r.cost.total();
    }
    return total / static_cast<double>(queries.size());
}

// Finds the knob value whose measured speedup is nearest the target on a
// log scale. Exponential scan plus bisection, assuming speedup falls as
// the knob moves from the cheap end toward the expensive one; every
// measurement lands in `seen` so calibration errors can report the
// achievable range.
template <typename SpeedupOf>
std::pair<std::uint32_t, double> crossing_search(SpeedupOf&& speedup_of, std::uint32_t lo,
                                                 std::uint32_t hi, bool decreasing, double target,
                                                 std::map<std::uint32_t, double>& seen) {
    auto v_of = [&](std::uint64_t e) {
        return static_cast<std::uint32_t>(decreasing ? lo + e : hi - e);
    };
    auto eval = [&](std::uint64_t e) {
        std::uint32_t v = v_of(e);
        auto it = seen.find(v);
        if (it != seen.end()) return it->second;
        double s = speedup_of(v);
        seen.emplace(v, s);
        return s;
    };
    const std::uint64_t emax = hi - lo;
    if (eval(0) > target && emax > 0) {
        std::uint64_t prev = 0;
        std::uint64_t e = 1;
        for (;;) {
            e = std::min(e, emax);
            if (eval(e) <= target || e == emax) break;
            prev = e;
            e *= 2;
        }
        while (e - prev > 1) {
            std::uint64_t mid = prev + (e - prev) / 2;
            if (eval(mid) > target) {
                prev = mid;
            } else {
                e = mid;
            }
        }
    }
    std::uint32_t best_v = 0;
    double best_s = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& [v, s] : seen) {
        double gap = std::abs(std::log(s / target));
        if (gap < best_gap) {
            best_gap = gap;
            best_v = v;
            best_s = s;
        }
    }
    return {best_v, best_s};
}

[[noreturn]] void throw_calibration_error(Method m, double target,
                                          const std::map<std::uint32_t, double>& seen) {
    double smin = std::numeric_limits<double>::infinity();
    double smax = 0.0;
    // Nearest measurements on either side of the target show whether the
    // target is out of range or just falls in a gap of the discrete knob.
    double below = 0.0, above = std::numeric_limits<double>::infinity();
    for (const auto& [v, s] : seen) {
        smin = std::min(smin, s);
        smax = std::max(smax, s);
        if (s <= target && s > below) below = s;
        if (s >= target && s < above) above = s;
    }
    std::string detail;
    if (target < smin || target > smax) {
        detail = "achievable range [" + format_double(smin) + ", " + format_double(smax) + "]";
    } else {
        detail = "nearest achievable speedups " + format_double(below) + " and " +
                 format_double(above);
    }
    throw CalibrationError("calibration: " + method_name(m) + " cannot reach speedup " +
                           format_double(target) + " within tolerance; " + detail);
}

std::vector<std::size_t> sorted_k_list(std::span<const std::size_t> k_list, std::size_t n) {
    if (k_list.empty()) throw ArgumentError("K list must be nonempty");
    std::vector<std::size_t> ks(k_list.begin(), k_list.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.front() < 1 || ks.back() > n) {
        throw ArgumentError("K values must lie in [1, n=" + std::to_string(n) + "]");
    }
    return ks;
}

std::vector<CsvRow> eval_index(const BuiltIndex& built, const Dataset& ds,
                               const QueryBatch& queries, const GroundTruth& gt,
                               std::span<const std::size_t> ks, const std::string& params,
                               std::uint64_t row_seed) {
    const std::size_t kmax = ks.back();
    std::vector<std::vector<QueryOutcome>> outcomes(ks.size());
    for (auto& o : outcomes) o.reserve(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        std::vector<double> q = queries.row_values(qi);
        SearchResult r = search_index(built, ds, q, kmax);
        double cost = r.cost.total();
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            double prec = precision_at_k(truncated(gt.per_query[qi], ks[ki]),
                                         truncated(r.topk, ks[ki]), ks[ki]);
            outcomes[ki].push_back({prec, cost});
        }
    }
    std::vector<CsvRow> rows;
    rows.reserve(ks.size());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        PrecisionReport rep = aggregate(outcomes[ki], static_cast<double>(ds.size()));
        rows.push_back({method_name(built.method), params, ks[ki], rep.mean_precision,
                        rep.mean_cost, rep.speedup, queries.size(), row_seed});
    }
    return rows;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::kExact: return "exact";
        case Method::kKmeans: return "kmeans";
        case Method::kHierKmeans: return "hier-kmeans";
        case Method::kPcaTree: return "pca-tree";
        case Method::kSrp: return "srp";
        case Method::kWta: return "wta";
    }
    throw ArgumentError("unknown method enum value");
}

Method parse_method(std::string_view name) {
    if (name == "exact") return Method::kExact;
    if (name == "kmeans") return Method::kKmeans;
    if (name == "hier-kmeans") return Method::kHierKmeans;
    if (name == "pca-tree") return Method::kPcaTree;
    if (name == "srp") return Method::kSrp;
    if (name == "wta") return Method::kWta;
    throw ArgumentError("unknown method '" + std::string(name) +
                        "' (expected exact|kmeans|hier-kmeans|pca-tree|srp|wta)");
}

std::vector<Method> parse_method_list(std::string_view csv) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string_view::npos) comma = csv.size();
        std::string_view tok = csv.substr(start, comma - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (!tok.empty()) out.push_back(parse_method(tok));
        start = comma + 1;
    }
    if (out.empty()) throw ArgumentError("empty method list");
    return out;
}

HyperParams resolve_defaults(Method m, HyperParams hp, std::size_t n, std::size_t d) {
    switch (m) {
        case Method::kKmeans:
            if (hp.k_clusters == 0) hp.k_clusters = isqrt_ceil(n);
            if (hp.top_p == 0) hp.top_p = std::min<std::uint32_t>(3, hp.k_clusters);
            break;
        case Method::kHierKmeans:
            if (hp.levels.empty()) {
                std::uint32_t fine = icbrt_ceil(static_cast<std::uint64_t>(n) * n);
                std::uint32_t coarse = icbrt_ceil(n);
                hp.levels.push_back(fine);
                if (coarse < fine) hp.levels.push_back(coarse);
            }
            if (hp.top_p == 0) hp.top_p = 8;
            break;
        case Method::kWta:
            hp.prefix_k = std::min<std::uint32_t>(hp.prefix_k,
                                                  static_cast<std::uint32_t>(d) + hp.mcss_m);
            break;
        case Method::kExact:
        case Method::kPcaTree:
        case Method::kSrp:
            break;
    }
    return hp;
}

std::string build_params(Method m, const HyperParams& hp) {
    std::string s;
    switch (m) {
        case Method::kExact:
            break;
        case Method::kKmeans:
            s = "k=" + std::to_string(hp.k_clusters);
            append_mcss(s, hp);
            s += ";iters=" + std::to_string(hp.max_iters);
            break;
        case Method::kHierKmeans: {
            s = "levels=";
            for (std::size_t i = 0; i < hp.levels.size(); ++i) {
                if (i > 0) s += '/';
                s += std::to_string(hp.levels[i]);
            }
            append_mcss(s, hp);
            s += ";iters=" + std::to_string(hp.max_iters);
            break;
        }
        case Method::kPcaTree:
            s = "depth=" + std::to_string(hp.pca_depth);
            break;
        case Method::kSrp:
            s = "tables=" + std::to_string(hp.tables) + ";bits=" + std::to_string(hp.bits);
            append_mcss(s, hp);
            break;
        case Method::kWta:
            s = "tables=" + std::to_string(hp.tables) + ";perms=" + std::to_string(hp.perms) +
                ";prefix=" + std::to_string(hp.prefix_k);
            if (hp.wta_cost_dim != 0) s += ";costdim=" + std::to_string(hp.wta_cost_dim);
            append_mcss(s, hp);
            break;
    }
    return s;
}

std::string flatten_params(Method m, const HyperParams& hp) {
    std::string s = build_params(m, hp);
    if (m == Method::kKmeans || m == Method::kHierKmeans) {
        std::string p = "p=" + std::to_string(hp.top_p);
        std::size_t cut = s.find(";u=");
        s = s.substr(0, cut) + ";" + p + s.substr(cut);
    }
    return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t config_seed(std::uint64_t run_seed, Method m, const HyperParams& hp) {
    return derive_seed(run_seed, fnv1a64(method_name(m) + "|" + build_params(m, hp)));
}

std::uint64_t content_hash(const Dataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) {
            h ^= static_cast<unsigned char>(v >> (8 * i));
            h *= 0x100000001b3ull;
        }
    };
    mix(ds.size(), 8);
    mix(ds.dim(), 8);
    mix(static_cast<std::uint64_t>(ds.elem_type()), 1);
    if (ds.is_f32()) {
        for (float v : ds.raw_f32()) mix(std::bit_cast<std::uint32_t>(v), 4);
    } else {
        for (double v : ds.raw_f64()) mix(std::bit_cast<std::uint64_t>(v), 8);
    }
    return h;
}

BuiltIndex build_index(Method m, const Dataset& ds, const HyperParams& hp_in,
                       std::uint64_t seed) {
    BuiltIndex b;
    b.method = m;
    b.hp = resolve_defaults(m, hp_in, ds.size(), ds.dim());
    switch (m) {
        case Method::kExact:
            break;
        case Method::kKmeans: {
            TransformedDataset tds = transform_dataset(ds, fit_mcss(ds, b.hp.mcss_u, b.hp.mcss_m));
            b.index = ClusterIndex::train(tds, b.hp.k_clusters, b.hp.max_iters, seed);
            break;
        }
        case Method::kHierKmeans: {
            TransformedDataset tds = transform_dataset(ds, fit_mcss(ds, b.hp.mcss_u, b.hp.mcss_m));
            b.index = HierIndex::build(tds, b.hp.levels, b.hp.max_iters, seed);
            break;
        }
        case Method::kPcaTree:
            b.index = PcaTree::build(ds, b.hp.pca_depth);
            break;
        case Method::kSrp: {
            TransformedDataset tds = transform_dataset(ds, fit_mcss(ds, b.hp.mcss_u, b.hp.mcss_m));
            b.index = SrpIndex::build(tds, b.hp.tables, b.hp.bits, seed);
            break;
        }
        case Method::kWta: {
            TransformedDataset tds = transform_dataset(ds, fit_mcss(ds, b.hp.mcss_u, b.hp.mcss_m));
            b.index = WtaIndex::build(tds, b.hp.tables, b.hp.perms, b.hp.prefix_k, seed,
                                      b.hp.wta_cost_dim);
            break;
        }
    }
    return b;
}

SearchResult search_index(const BuiltIndex& built, const Dataset& ds, std::span<const double> q,
                          std::size_t topk) {
    switch (built.method) {
        case Method::kExact: {
            SearchResult r;
            r.topk = exact_mips(ds, q, topk, &r.cost);
            return r;
        }
        case Method::kKmeans:
            return std::get<ClusterIndex>(built.index).search(ds, q, built.hp.top_p, topk);
        case Method::kHierKmeans:
            return std::get<HierIndex>(built.index).search(ds, q, built.hp.top_p, topk);
        case Method::kPcaTree:
            return std::get<PcaTree>(built.index).search(ds, q, topk);
        case Method::kSrp:
            return std::get<SrpIndex>(built.index).search(ds, q, topk);
        case Method::kWta:
            return std::get<WtaIndex>(built.index).search(ds, q, topk);
    }
    throw ArgumentError("unknown method enum value");
}

GroundTruth compute_ground_truth(const Dataset& ds, const QueryBatch& queries,
                                 std::size_t k_max) {
    if (queries.size() == 0) throw ArgumentError("ground truth: empty query batch");
    if (queries.dim() != ds.dim()) {
        throw ArgumentError("ground truth: query dim " + std::to_string(queries.dim()) +
                            " != data dim " + std::to_string(ds.dim()));
    }
    if (k_max < 1 || k_max > ds.size()) {
        throw ArgumentError("ground truth: K must be in [1, n]");
    }
    GroundTruth gt;
    gt.k_max = k_max;
    gt.per_query.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<double> q = queries.row_values(i);
        gt.per_query.push_back(exact_mips(ds, q, k_max));
    }
    return gt;
}

TopK truncated(const TopK& t, std::size_t k) {
    if (t.size() <= k) return t;
    TopK out;
    out.ids.assign(t.ids.begin(), t.ids.begin() + static_cast<std::ptrdiff_t>(k));
    out.scores.assign(t.scores.begin(), t.scores.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

void save_ground_truth(const std::string& path, const GroundTruth& gt, std::uint64_t data_hash,
                       std::uint64_t query_hash) {
    BinWriter w(path);
    w.magic(kGtMagic);
    w.u8(kGtVersion);
    w.u64(gt.k_max);
    w.u64(gt.per_query.size());
    w.u64(data_hash);
    w.u64(query_hash);
    for (const TopK& t : gt.per_query) {
        w.u32_block(t.ids);
        w.f64_block(t.scores);
    }
    w.close();
}

GroundTruth load_ground_truth(const std::string& path, std::uint64_t data_hash,
                              std::uint64_t query_hash) {
    BinReader r(path);
    r.expect_magic(kGtMagic);
    if (r.u8() != kGtVersion) throw FormatError(path + ": unsupported ground-truth version");
    GroundTruth gt;
    gt.k_max = r.u64();
    std::uint64_t nq = r.u64();
    std::uint64_t dh = r.u64();
    std::uint64_t qh = r.u64();
    if (dh != data_hash || qh != query_hash) {
        throw FormatError(path + ": ground-truth cache does not match the given data/queries");
    }
    if (gt.k_max == 0) throw FormatError(path + ": degenerate ground-truth header");
    gt.per_query.resize(nq);
    for (TopK& t : gt.per_query) {
        t.ids.resize(gt.k_max);
        t.scores.resize(gt.k_max);
        r.u32_block(t.ids);
        r.f64_block(t.scores);
    }
    if (!r.at_eof()) throw LengthError(path + ": trailing bytes");
    return gt;
}

GroundTruth ensure_ground_truth(const std::string& path, const Dataset& ds,
                                const QueryBatch& queries, std::size_t k_max) {
    const std::uint64_t dh = content_hash(ds);
    const std::uint64_t qh = content_hash(queries);
    if (!path.empty() && std::filesystem::exists(path)) {
        try {
            GroundTruth gt = load_ground_truth(path, dh, qh);
            if (gt.k_max >= k_max && gt.per_query.size() == queries.size()) {
                // A deeper cache serves a shallower request: its prefix is
                // exactly what a direct computation would produce.
                if (gt.k_max > k_max) {
                    for (TopK& t : gt.per_query) t = truncated(t, k_max);
                    gt.k_max = k_max;
                }
                return gt;
            }
        } catch (const Error&) {
            // Stale or foreign cache: recompute and overwrite below.
        }
    }
    GroundTruth gt = compute_ground_truth(ds, queries, k_max);
    if (!path.empty()) save_ground_truth(path, gt, dh, qh);
    return gt;
}

std::vector<CsvRow> run_sweep(const SweepSpec& spec, const Dataset& ds,
                              const QueryBatch& queries) {
    if (spec.grid.empty()) throw ArgumentError("sweep: hyperparameter grid must be nonempty");
    std::vector<std::size_t> ks = sorted_k_list(spec.k_list, ds.size());
    GroundTruth gt = ensure_ground_truth(spec.gt_cache, ds, queries, ks.back());

    std::map<std::string, BuiltIndex> built_cache;
    std::vector<CsvRow> rows;
    for (const HyperParams& hp_in : spec.grid) {
        HyperParams hp = resolve_defaults(spec.method, hp_in, ds.size(), ds.dim());
        std::string bkey = build_params(spec.method, hp);
        auto it = built_cache.find(bkey);
        if (it == built_cache.end()) {
            it = built_cache
                     .emplace(bkey, build_index(spec.method, ds, hp,
                                                config_seed(spec.seed, spec.method, hp)))
                     .first;
        }
        BuiltIndex& built = it->second;
        built.hp = hp;  // adopt this grid point's search-time knobs
        std::vector<CsvRow> r =
            eval_index(built, ds, queries, gt, ks, flatten_params(spec.method, hp), spec.seed);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.speedup != b.speedup) return a.speedup < b.speedup;
        if (a.k != b.k) return a.k < b.k;
        return a.params < b.params;
    });
    return rows;
}

std::vector<CsvRow> run_noise(const NoiseSpec& spec, const Dataset& ds) {
    if (spec.methods.empty()) throw ArgumentError("noise: method list must be nonempty");
    if (spec.sigmas.empty()) throw ArgumentError("noise: sigma grid must be nonempty");
    for (std::size_t i = 0; i < spec.sigmas.size(); ++i) {
        if (spec.sigmas[i] < 0.0) throw ArgumentError("noise: sigmas must be nonnegative");
        if (i > 0 && spec.sigmas[i] <= spec.sigmas[i - 1]) {
            throw ArgumentError("noise: sigmas must be strictly ascending");
        }
    }
    if (spec.n_queries == 0) throw ArgumentError("noise: n_queries must be >= 1");
    std::vector<std::size_t> ks = sorted_k_list(spec.k_list, ds.size());

    const std::size_t nq = std::min(spec.n_queries, ds.size());
    std::vector<std::uint32_t> qids =
        sample_row_ids(ds.size(), nq, derive_seed(spec.seed, kQuerySampleStream));
    QueryBatch clean = take_rows(ds, qids);

    struct MethodRun {
        BuiltIndex built;
        std::string params;
        std::vector<CsvRow> rows;
    };
    std::vector<MethodRun> runs;
    runs.reserve(spec.methods.size());
    for (Method m : spec.methods) {
        CalibrationResult calib = calibrate_speedup(m, ds, clean, spec.target_speedup,
                                                    spec.tolerance, spec.base, CalibKnob::kAuto,
                                                    spec.seed);
        MethodRun run;
        run.built = build_index(m, ds, calib.hp, config_seed(spec.seed, m, calib.hp));
        run.params = flatten_params(m, calib.hp);
        runs.push_back(std::move(run));
    }

    for (std::size_t si = 0; si < spec.sigmas.size(); ++si) {
        QueryBatch noisy =
            corrupt_queries(clean, spec.sigmas[si], derive_seed(spec.seed, kNoiseStreamBase + si));
        GroundTruth gt = compute_ground_truth(ds, noisy, ks.back());
        for (MethodRun& run : runs) {
            std::string params = run.params + ";sigma=" + format_double(spec.sigmas[si]);
            std::vector<CsvRow> r = eval_index(run.built, ds, noisy, gt, ks, params, spec.seed);
            run.rows.insert(run.rows.end(), r.begin(), r.end());
        }
    }

    std::vector<CsvRow> rows;
    for (MethodRun& run : runs) {
        rows.insert(rows.end(), run.rows.begin(), run.rows.end());
    }
    return rows;
}

CalibrationResult calibrate_speedup(Method m, const Dataset& ds, const QueryBatch& queries,
                                    double target, double tolerance, const HyperParams& base,
                                    CalibKnob knob, std::uint64_t seed) {
    if (queries.size() == 0) throw ArgumentError("calibrate: empty query batch");
    if (queries.dim() != ds.dim()) throw ArgumentError("calibrate: query/data dim mismatch");
    if (target < 1.0) throw ArgumentError("calibrate: target speedup must be >= 1");
    if (tolerance < 0.0 || tolerance >= 1.0) {
        throw ArgumentError("calibrate: tolerance must be in [0, 1)");
    }
    const double n = static_cast<double>(ds.size());
    HyperParams hp = resolve_defaults(m, base, ds.size(), ds.dim());

    if (m == Method::kExact) {
        if (std::abs(1.0 - target) <= tolerance * target) return {hp, 1.0};
        throw CalibrationError("calibration: exact search has speedup 1, target " +
                               format_double(target) + " is out of tolerance");
    }
    if (knob == CalibKnob::kAuto) {
        knob = (m == Method::kKmeans || m == Method::kHierKmeans) ? CalibKnob::kTopP
               : (m == Method::kPcaTree)                          ? CalibKnob::kDepth
                                                                  : CalibKnob::kTables;
    }

    std::map<std::uint32_t, double> seen;
    auto accept = [&](std::uint32_t v, double s,
                      std::uint32_t* slot) -> CalibrationResult {
        if (std::abs(s - target) <= tolerance * target) {
            *slot = v;
            return {hp, s};
        }
        throw_calibration_error(m, target, seen);
    };

    switch (knob) {
        case CalibKnob::kTopP: {
            if (m != Method::kKmeans && m != Method::kHierKmeans) {
                throw ArgumentError("calibrate: top_p applies to the k-means indexes only");
            }
            BuiltIndex built = build_index(m, ds, hp, config_seed(seed, m, hp));
            std::uint32_t hi =
                (m == Method::kKmeans)
                    ? std::get<ClusterIndex>(built.index).k()
                    : static_cast<std::uint32_t>(std::get<HierIndex>(built.index)
                                                     .level(std::get<HierIndex>(built.index)
                                                                .n_levels() -
                                                            1)
                                                     .centroids.rows);
            auto [v, s] = crossing_search(
                [&](std::uint32_t p) {
                    built.hp.top_p = p;
                    return n / mean_cost_over(built, ds, queries);
                },
                1, hi, /*decreasing=*/true, target, seen);
            return accept(v, s, &hp.top_p);
        }
        case CalibKnob::kDepth: {
            if (m != Method::kPcaTree) {
                throw ArgumentError("calibrate: depth applies to the tree index only");
            }
            std::uint32_t hi = std::min<std::uint32_t>(
                std::bit_width(ds.size()) - 1, static_cast<std::uint32_t>(ds.dim()) + 1);
            auto [v, s] = crossing_search(
                [&](std::uint32_t depth) {
                    HyperParams h2 = hp;
                    h2.pca_depth = depth;
                    BuiltIndex b = build_index(m, ds, h2, config_seed(seed, m, h2));
                    return n / mean_cost_over(b, ds, queries);
                },
                0, hi, /*decreasing=*/false, target, seen);
            return accept(v, s, &hp.pca_depth);
        }
        case CalibKnob::kTables: {
            if (m != Method::kSrp && m != Method::kWta) {
                throw ArgumentError("calibrate: table count applies to the hash indexes only");
            }
            auto [v, s] = crossing_search(
                [&](std::uint32_t t) {
                    HyperParams h2 = hp;
                    h2.tables = t;
                    BuiltIndex b = build_index(m, ds, h2, config_seed(seed, m, h2));
                    return n / mean_cost_over(b, ds, queries);
                },
                1, 256, /*decreasing=*/true, target, seen);
            return accept(v, s, &hp.tables);
        }
        case CalibKnob::kKClusters: {
            if (m != Method::kKmeans) {
                throw ArgumentError("calibrate: cluster count applies to flat k-means only");
            }
            // Cost model k + alpha*p*n/k: each probe refits the skew factor
            // alpha and re-solves for the k whose predicted cost hits the
            // target; the lower root keeps training cheap.
            const double p = hp.top_p;
            const double target_cost = n / target;
            const std::uint32_t klo = std::max<std::uint32_t>(hp.top_p, 1);
            const std::uint32_t khi = static_cast<std::uint32_t>(ds.size());
            double alpha = 1.5;
            for (int probe = 0; probe < 8; ++probe) {
                double disc = target_cost * target_cost - 4.0 * alpha * p * n;
                double kf = (disc >= 0.0) ? (target_cost - std::sqrt(disc)) / 2.0
                                          : std::sqrt(alpha * p * n);
                auto kk = static_cast<std::uint32_t>(
                    std::clamp(std::llround(kf), static_cast<long long>(klo),
                               static_cast<long long>(khi)));
                while (seen.count(kk) != 0 && kk < khi) ++kk;
                if (seen.count(kk) != 0) break;
                HyperParams h2 = hp;
                h2.k_clusters = kk;
                BuiltIndex b = build_index(m, ds, h2, config_seed(seed, m, h2));
                double mc = mean_cost_over(b, ds, queries);
                seen.emplace(kk, n / mc);
                if (std::abs(n / mc - target) <= tolerance * target) break;
                alpha = std::clamp((mc - kk) * kk / (p * n), 0.05, 50.0);
            }
            std::uint32_t best_v = 0;
            double best_s = 0.0;
            double best_gap = std::numeric_limits<double>::infinity();
            for (const auto& [v, s] : seen) {
                double gap = std::abs(std::log(s / target));
                if (gap < best_gap) {
                    best_gap = gap;
                    best_v = v;
                    best_s = s;
                }
            }
            return accept(best_v, best_s, &hp.k_clusters);
        }
        case CalibKnob::kAuto:
            break;
    }
    throw ArgumentError("calibrate: unsupported knob");
}

}  // namespace kmips
