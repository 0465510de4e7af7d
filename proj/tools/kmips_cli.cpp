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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kmips/bench.hpp"
#include "kmips/error.hpp"
#include "kmips/rng.hpp"
#include "kmips/transform.hpp"

namespace {

using namespace kmips;

std::vector<std::uint32_t> parse_levels(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t slash = s.find('/', start);
        if (slash == std::string::npos) slash = s.size();
        std::string tok = s.substr(start, slash - start);
        if (!tok.empty()) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        start = slash + 1;
    }
    if (out.empty()) throw ArgumentError("empty --levels spec");
    return out;
}

Method sniff_index(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    char m[4];
    f.read(m, 4);
    if (!f) throw IoError("cannot read index header: " + path);
    std::string magic(m, 4);
    if (magic == "KMIX") return Method::kKmeans;
    if (magic == "HKIX") return Method::kHierKmeans;
    if (magic == "PCAT") return Method::kPcaTree;
    if (magic == "SRPI") return Method::kSrp;
    if (magic == "WTAI") return Method::kWta;
    throw FormatError(path + ": not a recognized index file");
}

BuiltIndex load_index_any(const std::string& path, std::uint32_t top_p) {
    BuiltIndex b;
    b.method = sniff_index(path);
    switch (b.method) {
        case Method::kKmeans: {
            ClusterIndex idx = ClusterIndex::load(path);
            b.hp.k_clusters = idx.k();
            b.hp.top_p = (top_p != 0) ? top_p : std::min<std::uint32_t>(3, idx.k());
            b.index = std::move(idx);
            break;
        }
        case Method::kHierKmeans: {
            HierIndex idx = HierIndex::load(path);
            for (std::size_t l = idx.n_levels(); l-- > 0;) {
                b.hp.levels.push_back(static_cast<std::uint32_t>(idx.level(l).centroids.rows));
            }
            b.hp.top_p = (top_p != 0) ? top_p : 8;
            b.index = std::move(idx);
            break;
        }
        case Method::kPcaTree: {
            PcaTree idx = PcaTree::load(path);
            b.hp.pca_depth = idx.depth();
            b.index = std::move(idx);
            break;
        }
        case Method::kSrp: {
            SrpIndex idx = SrpIndex::load(path);
            b.hp.tables = idx.n_tables();
            b.hp.bits = idx.p_bits();
            b.index = std::move(idx);
            break;
        }
        case Method::kWta: {
            WtaIndex idx = WtaIndex::load(path);
            b.hp.tables = idx.n_tables();
            b.hp.perms = idx.p_perms();
            b.hp.prefix_k = idx.prefix_k();
            b.hp.wta_cost_dim = idx.cost_dim();
            b.index = std::move(idx);
            break;
        }
        case Method::kExact:
            break;
    }
    return b;
}

void save_built(const BuiltIndex& b, const std::string& path) {
    std::visit(
        [&](const auto& idx) {
            if constexpr (std::is_same_v<std::decay_t<decltype(idx)>, std::monostate>) {
                throw ArgumentError("exact search uses no index file");
            } else {
                idx.save(path);
            }
        },
        b.index);
}

// ---- option bags ----

struct HyperFlags {
    std::uint32_t k_clusters = 0;
    std::uint32_t top_p = 0;
    std::string levels;
    std::uint32_t pca_depth = 8;
    std::uint32_t tables = 8;
    std::uint32_t bits = 16;
    std::uint32_t perms = 8;
    std::uint32_t prefix_k = 16;
    std::uint32_t wta_cost_dim = 0;
    double mcss_u = kDefaultMcssU;
    std::uint32_t mcss_m = kDefaultMcssM;
    std::uint32_t max_iters = kDefaultMaxIters;

    HyperParams to_params() const {
        HyperParams hp;
        hp.k_clusters = k_clusters;
        hp.top_p = top_p;
        if (!levels.empty()) hp.levels = parse_levels(levels);
        hp.pca_depth = pca_depth;
        hp.tables = tables;
        hp.bits = bits;
        hp.perms = perms;
        hp.prefix_k = prefix_k;
        hp.wta_cost_dim = wta_cost_dim;
        hp.mcss_u = mcss_u;
        hp.mcss_m = mcss_m;
        hp.max_iters = max_iters;
        return hp;
    }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& h) {
    cmd->add_option("--k-clusters", h.k_clusters, "k-means cluster count (0: ceil(sqrt(n)))");
    cmd->add_option("--top-p", h.top_p, "clusters expanded per query (0: method default)");
    cmd->add_option("--levels", h.levels, "hierarchy level sizes, finest first, e.g. 1365/37");
    cmd->add_option("--pca-depth", h.pca_depth, "tree depth");
    cmd->add_option("--tables", h.tables, "hash table count");
    cmd->add_option("--bits", h.bits, "srp bits per table");
    cmd->add_option("--perms", h.perms, "wta permutations per table");
    cmd->add_option("--prefix-k", h.prefix_k, "wta permutation prefix length");
    cmd->add_option("--wta-cost-dim", h.wta_cost_dim,
                    "denominator of the wta hashing cost (0: hashed dim)");
    cmd->add_option("--mcss-u", h.mcss_u, "transform scale bound U in (0,1)");
    cmd->add_option("--mcss-m", h.mcss_m, "appended norm components");
    cmd->add_option("--max-iters", h.max_iters, "k-means iteration cap");
}

// Cross product of the per-method grid lists; unset lists contribute the
// single default value.
std::vector<HyperParams> expand_grid(Method m, const HyperFlags& base,
                                     const std::vector<std::uint32_t>& k_clusters,
                                     const std::vector<std::uint32_t>& top_p,
                                     const std::vector<std::string>& levels,
                                     const std::vector<std::uint32_t>& pca_depth,
                                     const std::vector<std::uint32_t>& tables,
                                     const std::vector<std::uint32_t>& bits,
                                     const std::vector<std::uint32_t>& perms,
                                     const std::vector<std::uint32_t>& prefix_k) {
    auto or_default = [](std::vector<std::uint32_t> v, std::uint32_t dflt) {
        if (v.empty()) v.push_back(dflt);
        return v;
    };
    std::vector<HyperParams> grid;
    HyperParams hp0 = base.to_params();
    switch (m) {
        case Method::kExact:
            grid.push_back(hp0);
            break;
        case Method::kKmeans:
            for (std::uint32_t k : or_default(k_clusters, base.k_clusters)) {
                for (std::uint32_t p : or_default(top_p, base.top_p)) {
                    HyperParams hp = hp0;
                    hp.k_clusters = k;
                    hp.top_p = p;
                    grid.push_back(hp);
                }
            }
            break;
        case Method::kHierKmeans: {
            std::vector<std::string> lv = levels;
            if (lv.empty()) lv.push_back(base.levels);
            for (const std::string& spec : lv) {
                for (std::uint32_t p : or_default(top_p, base.top_p)) {
                    HyperParams hp = hp0;
                    hp.levels = spec.empty() ? std::vector<std::uint32_t>{} : parse_levels(spec);
                    hp.top_p = p;
                    grid.push_back(hp);
                }
            }
            break;
        }
        case Method::kPcaTree:
            for (std::uint32_t d : or_default(pca_depth, base.pca_depth)) {
                HyperParams hp = hp0;
                hp.pca_depth = d;
                grid.push_back(hp);
            }
            break;
        case Method::kSrp:
            for (std::uint32_t t : or_default(tables, base.tables)) {
                for (std::uint32_t b : or_default(bits, base.bits)) {
                    HyperParams hp = hp0;
                    hp.tables = t;
                    hp.bits = b;
                    grid.push_back(hp);
                }
            }
            break;
        case Method::kWta:
            for (std::uint32_t t : or_default(tables, base.tables)) {
                for (std::uint32_t pe : or_default(perms, base.perms)) {
                    for (std::uint32_t pk : or_default(prefix_k, base.prefix_k)) {
                        HyperParams hp = hp0;
                        hp.tables = t;
                        hp.perms = pe;
                        hp.prefix_k = pk;
                        grid.push_back(hp);
                    }
                }
            }
            break;
    }
    return grid;
}

// ---- per-subcommand option bags ----

struct GenOpts {
    std::size_t n = 0, d = 0, clusters = 10, n_queries = 0;
    double spread = 0.5;
    std::uint64_t seed = 0;
    std::string out, queries_out;
};

struct BuildOpts {
    std::string method, data, out;
    std::uint64_t seed = 0;
    HyperFlags h;
};

struct GtOpts {
    std::string data, queries, out;
    std::size_t topk = 100;
};

struct QueryOpts {
    std::string index, data, queries, out, gt;
    std::size_t topk = 10;
    std::uint32_t top_p = 0;
};

struct SweepOpts {
    std::string method, data, queries, out, gt_cache;
    std::vector<std::size_t> topk{1, 10, 100};
    std::uint64_t seed = 0;
    HyperFlags base;
    std::vector<std::uint32_t> k_clusters, top_p, pca_depth, tables, bits, perms, prefix_k;
    std::vector<std::string> levels;
};

struct NoiseOpts {
    std::string method = "kmeans,pca-tree,srp,wta";
    std::string data, out;
    std::vector<double> sigma{0.0, 0.1, 0.2, 0.4};
    std::vector<std::size_t> topk{1, 10, 100};
    double target_speedup = 30.0, tolerance = 0.2;
    std::size_t n_queries = 2000;
    std::uint64_t seed = 0;
    HyperFlags base;
};

struct CalOpts {
    std::string method, data, queries, knob = "auto";
    double target_speedup = 30.0, tolerance = 0.2;
    std::uint64_t seed = 0;
    HyperFlags base;
};

struct PlotOpts {
    std::string in, out, x = "speedup", y = "mean_precision";
    bool logx = false;
};

// ---- plot ----

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
};

std::vector<CsvRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw FormatError(path + ": missing benchmark CSV header");
    }
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (f.size() != 8) throw FormatError(path + ": malformed row: " + line);
        CsvRow r;
        r.method = f[0];
        r.params = f[1];
        r.k = std::stoull(f[2]);
        r.mean_precision = std::stod(f[3]);
        r.mean_cost = std::stod(f[4]);
        r.speedup = std::stod(f[5]);
        r.n_queries = std::stoull(f[6]);
        r.seed = std::stoull(f[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

double field_of(const CsvRow& r, const std::string& name) {
    if (name == "speedup") return r.speedup;
    if (name == "mean_cost") return r.mean_cost;
    if (name == "mean_precision") return r.mean_precision;
    if (name == "K") return static_cast<double>(r.k);
    if (name == "sigma") {
        std::size_t pos = r.params.find("sigma=");
        if (pos == std::string::npos) return std::nan("");
        return std::stod(r.params.substr(pos + 6));
    }
    throw ArgumentError("unknown plot field '" + name +
                        "' (speedup|mean_cost|mean_precision|K|sigma)");
}

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void write_plot(const std::string& csv_path, const std::string& out_path, const std::string& xf,
                const std::string& yf, bool logx) {
    std::vector<CsvRow> rows = read_csv(csv_path);
    std::map<std::string, std::vector<PlotPoint>> series;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const CsvRow& r : rows) {
        double x = field_of(r, xf);
        double y = field_of(r, yf);
        if (std::isnan(x) || std::isnan(y)) continue;
        if (logx) {
            if (x <= 0.0) throw ArgumentError("--logx needs positive x values");
            x = std::log10(x);
        }
        series[r.method + " K=" + std::to_string(r.k)].push_back({x, y});
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (series.empty()) throw ArgumentError("no plottable rows in " + csv_path);
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double W = 720, H = 480, L = 70, R = 200, T = 30, B = 50;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double fx = xmin + (xmax - xmin) * i / 5.0;
        double fy = ymin + (ymax - ymin) * i / 5.0;
        double gx = px(fx);
        double gy = py(fy);
        svg << "<line x1=\"" << svg_num(gx) << "\" y1=\"" << svg_num(T) << "\" x2=\""
            << svg_num(gx) << "\" y2=\"" << svg_num(H - B) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<line x1=\"" << svg_num(L) << "\" y1=\"" << svg_num(gy) << "\" x2=\""
            << svg_num(W - R) << "\" y2=\"" << svg_num(gy) << "\" stroke=\"#dddddd\"/>\n";
        double label_x = logx ? std::pow(10.0, fx) : fx;
        svg << "<text x=\"" << svg_num(gx) << "\" y=\"" << svg_num(H - B + 18)
            << "\" text-anchor=\"middle\">" << format_double(std::round(label_x * 1000) / 1000)
            << "</text>\n";
        svg << "<text x=\"" << svg_num(L - 8) << "\" y=\"" << svg_num(gy + 4)
            << "\" text-anchor=\"end\">" << format_double(std::round(fy * 1000) / 1000)
            << "</text>\n";
    }
    svg << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\""
        << (H - T - B) << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << svg_num((L + W - R) / 2) << "\" y=\"" << svg_num(H - 12)
        << "\" text-anchor=\"middle\">" << xf << (logx ? " (log scale)" : "") << "</text>\n";
    svg << "<text x=\"16\" y=\"" << svg_num((T + H - B) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << svg_num((T + H - B) / 2)
        << ")\">" << yf << "</text>\n";

    int ci = 0;
    double ly = T + 10;
    for (auto& [name, pts] : series) {
        std::sort(pts.begin(), pts.end(),
                  [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });
        const char* color = palette[ci % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const PlotPoint& p : pts) svg << svg_num(px(p.x)) << "," << svg_num(py(p.y)) << " ";
        svg << "\"/>\n";
        for (const PlotPoint& p : pts) {
            svg << "<circle cx=\"" << svg_num(px(p.x)) << "\" cy=\"" << svg_num(py(p.y))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        svg << "<rect x=\"" << svg_num(W - R + 10) << "\" y=\"" << svg_num(ly - 9)
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << svg_num(W - R + 28) << "\" y=\"" << svg_num(ly + 2) << "\">" << name
            << "</text>\n";
        ly += 18;
        ++ci;
    }
    svg << "</svg>\n";

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << svg.str();
    if (!out) throw IoError("write failed: " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-maximum inner product search benchmark"};
    app.require_subcommand(1);

    // gen-data
    auto g = std::make_shared<GenOpts>();
    auto* gen = app.add_subcommand("gen-data", "generate clustered synthetic vectors");
    gen->add_option("--n", g->n, "database row count")->required();
    gen->add_option("--d", g->d, "dimension")->required();
    gen->add_option("--clusters", g->clusters, "generator cluster count");
    gen->add_option("--spread", g->spread, "within-cluster stddev");
    gen->add_option("--seed", g->seed, "rng seed");
    gen->add_option("--out", g->out, "output vector file")->required();
    gen->add_option("--n-queries", g->n_queries, "held-out queries drawn from the same mixture");
    gen->add_option("--queries-out", g->queries_out, "query vector file");
    gen->callback([g] {
        if (g->n_queries > 0 && g->queries_out.empty()) {
            throw ArgumentError("--n-queries needs --queries-out");
        }
        Dataset all = gen_synthetic(g->n + g->n_queries, g->d, g->clusters, g->spread, g->seed);
        std::vector<std::uint32_t> ids(g->n);
        for (std::size_t i = 0; i < g->n; ++i) ids[i] = static_cast<std::uint32_t>(i);
        save_dataset(take_rows(all, ids), g->out);
        std::cout << "wrote " << g->n << "x" << g->d << " vectors to " << g->out << "\n";
        if (g->n_queries > 0) {
            std::vector<std::uint32_t> qids(g->n_queries);
            for (std::size_t i = 0; i < g->n_queries; ++i) {
                qids[i] = static_cast<std::uint32_t>(g->n + i);
            }
            save_dataset(take_rows(all, qids), g->queries_out);
            std::cout << "wrote " << g->n_queries << "x" << g->d << " queries to "
                      << g->queries_out << "\n";
        }
    });

    // build-index
    auto b = std::make_shared<BuildOpts>();
    auto* build = app.add_subcommand("build-index", "train an index and save it");
    build->add_option("--method", b->method, "kmeans|hier-kmeans|pca-tree|srp|wta")->required();
    build->add_option("--data", b->data, "vector file")->required();
    build->add_option("--out", b->out, "index file")->required();
    build->add_option("--seed", b->seed, "rng seed");
    add_hyper_flags(build, b->h);
    build->callback([b] {
        Method m = parse_method(b->method);
        Dataset ds = load_dataset(b->data);
        HyperParams hp = resolve_defaults(m, b->h.to_params(), ds.size(), ds.dim());
        BuiltIndex built = build_index(m, ds, hp, config_seed(b->seed, m, hp));
        save_built(built, b->out);
        std::cout << "built " << method_name(m) << " (" << flatten_params(m, built.hp) << ") on "
                  << ds.size() << "x" << ds.dim() << ", saved to " << b->out << "\n";
    });

    // ground-truth
    auto t = std::make_shared<GtOpts>();
    auto* gt_cmd = app.add_subcommand("ground-truth", "compute and cache exact top-K");
    gt_cmd->add_option("--data", t->data, "vector file")->required();
    gt_cmd->add_option("--queries", t->queries, "query file")->required();
    gt_cmd->add_option("--topk", t->topk, "K");
    gt_cmd->add_option("--out", t->out, "cache file")->required();
    gt_cmd->callback([t] {
        Dataset ds = load_dataset(t->data);
        QueryBatch q = load_dataset(t->queries);
        GroundTruth gt = compute_ground_truth(ds, q, t->topk);
        save_ground_truth(t->out, gt, content_hash(ds), content_hash(q));
        std::cout << "wrote exact top-" << t->topk << " for " << q.size() << " queries to "
                  << t->out << "\n";
    });

    // query
    auto q = std::make_shared<QueryOpts>();
    auto* query = app.add_subcommand("query", "search a saved index");
    query->add_option("--index", q->index, "index file (any type; omit for an exact scan)");
    query->add_option("--data", q->data, "vector file the index was built on")->required();
    query->add_option("--queries", q->queries, "query file")->required();
    query->add_option("--topk", q->topk, "K");
    query->add_option("--top-p", q->top_p, "clusters expanded per query (k-means indexes)");
    query->add_option("--out", q->out, "per-query result CSV (default: stdout)");
    query->add_option("--gt", q->gt, "ground-truth cache for precision reporting");
    query->callback([q] {
        Dataset ds = load_dataset(q->data);
        QueryBatch qb = load_dataset(q->queries);
        BuiltIndex built;
        if (!q->index.empty()) built = load_index_any(q->index, q->top_p);
        std::ostringstream csv;
        csv << "query,rank,id,score\n";
        double total_cost = 0.0;
        double total_prec = 0.0;
        GroundTruth gt;
        if (!q->gt.empty()) gt = ensure_ground_truth(q->gt, ds, qb, q->topk);
        for (std::size_t i = 0; i < qb.size(); ++i) {
            std::vector<double> qv = qb.row_values(i);
            SearchResult r = search_index(built, ds, qv, q->topk);
            total_cost += r.cost.total();
            for (std::size_t j = 0; j < r.topk.size(); ++j) {
                csv << i << "," << j << "," << r.topk.ids[j] << ","
                    << format_double(r.topk.scores[j]) << "\n";
            }
            if (!q->gt.empty()) {
                total_prec += precision_at_k(truncated(gt.per_query[i], q->topk), r.topk, q->topk);
            }
        }
        if (q->out.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream f(q->out, std::ios::binary | std::ios::trunc);
            if (!f) throw IoError("cannot open for writing: " + q->out);
            f << csv.str();
        }
        double mean_cost = total_cost / static_cast<double>(qb.size());
        std::cout << "mean_cost=" << format_double(mean_cost)
                  << " speedup=" << format_double(static_cast<double>(ds.size()) / mean_cost);
        if (!q->gt.empty()) {
            std::cout << " mean_precision@" << q->topk << "="
                      << format_double(total_prec / static_cast<double>(qb.size()));
        }
        std::cout << "\n";
    });

    // sweep
    auto s = std::make_shared<SweepOpts>();
    auto* sweep = app.add_subcommand("sweep", "hyperparameter sweep to a CSV");
    sweep->add_option("--method", s->method, "method to sweep")->required();
    sweep->add_option("--data", s->data, "vector file")->required();
    sweep->add_option("--queries", s->queries, "query file")->required();
    sweep->add_option("--topk", s->topk, "K list")->delimiter(',');
    sweep->add_option("--seed", s->seed, "rng seed");
    sweep->add_option("--out", s->out, "output CSV")->required();
    sweep->add_option("--gt-cache", s->gt_cache, "ground-truth cache path");
    sweep->add_option("--k-clusters", s->k_clusters, "k grid")->delimiter(',');
    sweep->add_option("--top-p", s->top_p, "p grid")->delimiter(',');
    sweep->add_option("--levels", s->levels, "level-size specs, e.g. 1365/37,2000/100")
        ->delimiter(',');
    sweep->add_option("--pca-depth", s->pca_depth, "depth grid")->delimiter(',');
    sweep->add_option("--tables", s->tables, "table-count grid")->delimiter(',');
    sweep->add_option("--bits", s->bits, "srp bits grid")->delimiter(',');
    sweep->add_option("--perms", s->perms, "wta permutation grid")->delimiter(',');
    sweep->add_option("--prefix-k", s->prefix_k, "wta prefix grid")->delimiter(',');
    sweep->add_option("--mcss-u", s->base.mcss_u, "transform scale bound U");
    sweep->add_option("--mcss-m", s->base.mcss_m, "appended norm components");
    sweep->add_option("--max-iters", s->base.max_iters, "k-means iteration cap");
    sweep->callback([s] {
        SweepSpec spec;
        spec.method = parse_method(s->method);
        spec.grid = expand_grid(spec.method, s->base, s->k_clusters, s->top_p, s->levels,
                                s->pca_depth, s->tables, s->bits, s->perms, s->prefix_k);
        spec.k_list = s->topk;
        spec.seed = s->seed;
        spec.gt_cache = s->gt_cache;
        Dataset ds = load_dataset(s->data);
        QueryBatch qb = load_dataset(s->queries);
        std::vector<CsvRow> rows = run_sweep(spec, ds, qb);
        write_csv(s->out, rows);
        std::cout << "wrote " << rows.size() << " rows to " << s->out << "\n";
    });

    // noise
    auto no = std::make_shared<NoiseOpts>();
    auto* noise = app.add_subcommand("noise", "noise-robustness experiment to a CSV");
    noise->add_option("--data", no->data, "vector file (queries are sampled rows)")->required();
    noise->add_option("--method", no->method, "comma-separated method list");
    noise->add_option("--sigma", no->sigma, "noise stddev grid, ascending")->delimiter(',');
    noise->add_option("--topk", no->topk, "K list")->delimiter(',');
    noise->add_option("--target-speedup", no->target_speedup, "calibration target");
    noise->add_option("--tolerance", no->tolerance, "relative calibration tolerance");
    noise->add_option("--n-queries", no->n_queries, "sampled query count");
    noise->add_option("--seed", no->seed, "rng seed");
    noise->add_option("--out", no->out, "output CSV")->required();
    add_hyper_flags(noise, no->base);
    noise->callback([no] {
        NoiseSpec spec;
        spec.methods = parse_method_list(no->method);
        spec.sigmas = no->sigma;
        spec.k_list = no->topk;
        spec.target_speedup = no->target_speedup;
        spec.tolerance = no->tolerance;
        spec.n_queries = no->n_queries;
        spec.seed = no->seed;
        spec.base = no->base.to_params();
        Dataset ds = load_dataset(no->data);
        std::vector<CsvRow> rows = run_noise(spec, ds);
        write_csv(no->out, rows);
        std::cout << "wrote " << rows.size() << " rows to " << no->out << "\n";
    });

    // calibrate
    auto c = std::make_shared<CalOpts>();
    auto* cal = app.add_subcommand("calibrate", "find hyperparameters hitting a target speedup");
    cal->add_option("--method", c->method, "method to calibrate")->required();
    cal->add_option("--data", c->data, "vector file")->required();
    cal->add_option("--queries", c->queries, "query file")->required();
    cal->add_option("--target-speedup", c->target_speedup, "target")->required();
    cal->add_option("--tolerance", c->tolerance, "relative tolerance");
    cal->add_option("--knob", c->knob, "auto|top-p|k-clusters|depth|tables");
    cal->add_option("--seed", c->seed, "rng seed");
    add_hyper_flags(cal, c->base);
    cal->callback([c] {
        Method m = parse_method(c->method);
        CalibKnob knob = CalibKnob::kAuto;
        if (c->knob == "top-p") {
            knob = CalibKnob::kTopP;
        } else if (c->knob == "k-clusters") {
            knob = CalibKnob::kKClusters;
        } else if (c->knob == "depth") {
            knob = CalibKnob::kDepth;
        } else if (c->knob == "tables") {
            knob = CalibKnob::kTables;
        } else if (c->knob != "auto") {
            throw ArgumentError("unknown --knob '" + c->knob + "'");
        }
        Dataset ds = load_dataset(c->data);
        QueryBatch qb = load_dataset(c->queries);
        CalibrationResult r = calibrate_speedup(m, ds, qb, c->target_speedup, c->tolerance,
                                                c->base.to_params(), knob, c->seed);
        std::cout << "method=" << method_name(m) << " params=" << flatten_params(m, r.hp)
                  << " achieved_speedup=" << format_double(r.achieved) << "\n";
    });

    // plot
    auto p = std::make_shared<PlotOpts>();
    auto* plot = app.add_subcommand("plot", "render a benchmark CSV as an SVG chart");
    plot->add_option("--in", p->in, "benchmark CSV")->required();
    plot->add_option("--out", p->out, "output SVG")->required();
    plot->add_option("--x", p->x, "x field: speedup|mean_cost|mean_precision|K|sigma");
    plot->add_option("--y", p->y, "y field");
    plot->add_flag("--logx", p->logx, "log-scale x axis");
    plot->callback([p] { write_plot(p->in, p->out, p->x, p->y, p->logx); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
