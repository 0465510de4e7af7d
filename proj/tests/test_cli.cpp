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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

namespace {

// End-to-end coverage of the command-line tool. The binary path arrives in
// KMIPS_CLI (set by the test harness); without it these cases are skipped.

std::string cli_path() {
    const char* p = std::getenv("KMIPS_CLI");
    return p == nullptr ? std::string() : std::string(p);
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    RunResult res;
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
    int status = ::pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

#define SKIP_WITHOUT_CLI()                                  \
    if (cli_path().empty()) {                               \
        MESSAGE("KMIPS_CLI not set; skipping CLI checks"); \
        return;                                             \
    }

}  // namespace

TEST_CASE("cli: gen-data is deterministic and splits queries from one draw") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    auto gen = [&](const std::string& tag) {
        return run_cli("gen-data --n 500 --d 10 --clusters 8 --spread 0.4 --seed 11 --out " +
                       tmp.file("db" + tag + ".mips") + " --n-queries 50 --queries-out " +
                       tmp.file("q" + tag + ".mips"));
    };
    RunResult a = gen("A");
    CHECK(a.exit_code == 0);
    RunResult b = gen("B");
    CHECK(b.exit_code == 0);
    CHECK(same_bytes(tmp.file("dbA.mips"), tmp.file("dbB.mips")));
    CHECK(same_bytes(tmp.file("qA.mips"), tmp.file("qB.mips")));
    CHECK(!same_bytes(tmp.file("dbA.mips"), tmp.file("qA.mips")));
}

TEST_CASE("cli: build, ground-truth, query round trip for every method") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips"), q = tmp.file("q.mips"), gt = tmp.file("gt.bin");
    REQUIRE(run_cli("gen-data --n 800 --d 12 --clusters 10 --spread 0.35 --seed 3 --out " + db +
                    " --n-queries 40 --queries-out " + q)
                .exit_code == 0);
    REQUIRE(run_cli("ground-truth --data " + db + " --queries " + q + " --topk 10 --out " + gt)
                .exit_code == 0);

    const std::vector<std::pair<std::string, std::string>> builds{
        {"kmeans", "--k-clusters 30"},
        {"hier-kmeans", "--levels 80/12"},
        {"pca-tree", "--pca-depth 4"},
        {"srp", "--tables 6 --bits 10"},
        {"wta", "--tables 6 --perms 6 --prefix-k 8"},
    };
    for (const auto& [method, flags] : builds) {
        const std::string idx = tmp.file(method + ".idx");
        RunResult b = run_cli("build-index --method " + method + " --data " + db + " --seed 5 " +
                              flags + " --out " + idx);
        CHECK(b.exit_code == 0);
        CHECK(b.output.find("built " + method) != std::string::npos);

        const std::string res = tmp.file(method + ".csv");
        RunResult s = run_cli("query --index " + idx + " --data " + db + " --queries " + q +
                              " --topk 10 --gt " + gt + " --out " + res);
        CHECK(s.exit_code == 0);
        CHECK(s.output.find("mean_precision@10=") != std::string::npos);
        CHECK(s.output.find("speedup=") != std::string::npos);
        const std::string text = slurp(res);
        CHECK(text.rfind("query,rank,id,score", 0) == 0);
        // 40 queries x up to 10 rows each, plus header and final newline.
        CHECK(std::count(text.begin(), text.end(), '\n') >= 41);
    }
}

TEST_CASE("cli: sweep output is byte-identical across runs") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips"), q = tmp.file("q.mips");
    REQUIRE(run_cli("gen-data --n 600 --d 10 --clusters 8 --spread 0.4 --seed 21 --out " + db +
                    " --n-queries 30 --queries-out " + q)
                .exit_code == 0);
    const std::string run1 = tmp.file("s1.csv"), run2 = tmp.file("s2.csv");
    const std::string cmd = "sweep --method kmeans --data " + db + " --queries " + q +
                            " --topk 1,10 --k-clusters 25 --top-p 1,2,4 --seed 9 --out ";
    REQUIRE(run_cli(cmd + run1).exit_code == 0);
    REQUIRE(run_cli(cmd + run2).exit_code == 0);
    CHECK(same_bytes(run1, run2));
    const std::string text = slurp(run1);
    CHECK(text.rfind("method,params,K,mean_precision,mean_cost,speedup,n_queries,seed", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);  // header + 3x2 rows
}

TEST_CASE("cli: noise experiment writes calibrated rows") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips");
    REQUIRE(run_cli("gen-data --n 900 --d 10 --clusters 10 --spread 0.35 --seed 31 --out " + db)
                .exit_code == 0);
    const std::string out = tmp.file("noise.csv");
    RunResult r = run_cli("noise --data " + db +
                          " --method kmeans,srp --sigma 0,0.2 --topk 10 --target-speedup 4"
                          " --tolerance 0.3 --n-queries 40 --seed 7 --out " +
                          out);
    CHECK(r.exit_code == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("method,params,K,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);  // header + 2x2 rows
    CHECK(text.find("sigma=0.2") != std::string::npos);
}

TEST_CASE("cli: calibrate prints the chosen configuration") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips"), q = tmp.file("q.mips");
    REQUIRE(run_cli("gen-data --n 700 --d 10 --clusters 8 --spread 0.4 --seed 41 --out " + db +
                    " --n-queries 25 --queries-out " + q)
                .exit_code == 0);
    RunResult r = run_cli("calibrate --method kmeans --data " + db + " --queries " + q +
                          " --k-clusters 26 --target-speedup 6 --tolerance 0.3 --seed 2");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("method=kmeans") != std::string::npos);
    CHECK(r.output.find("achieved_speedup=") != std::string::npos);
    CHECK(r.output.find("params=") != std::string::npos);
}

TEST_CASE("cli: plot renders an svg from a sweep csv") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips"), q = tmp.file("q.mips");
    REQUIRE(run_cli("gen-data --n 400 --d 8 --clusters 6 --spread 0.4 --seed 51 --out " + db +
                    " --n-queries 20 --queries-out " + q)
                .exit_code == 0);
    const std::string csv = tmp.file("sweep.csv");
    REQUIRE(run_cli("sweep --method kmeans --data " + db + " --queries " + q +
                    " --topk 10 --k-clusters 20 --top-p 1,2,4,8 --seed 1 --out " + csv)
                .exit_code == 0);
    const std::string svg = tmp.file("plot.svg");
    RunResult r = run_cli("plot --in " + csv + " --out " + svg + " --x speedup"
                          " --y mean_precision --logx");
    CHECK(r.exit_code == 0);
    const std::string text = slurp(svg);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
}

TEST_CASE("cli: bad invocations fail with a nonzero exit") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    // Unknown method.
    RunResult r1 = run_cli("build-index --method faiss --data nope.mips --out x.idx --seed 1");
    CHECK(r1.exit_code != 0);
    // Missing required flag.
    RunResult r2 = run_cli("gen-data --n 100");
    CHECK(r2.exit_code != 0);
    // Nonexistent input file.
    RunResult r3 = run_cli("ground-truth --data " + tmp.file("missing.mips") +
                           " --queries " + tmp.file("missing.mips") + " --topk 5 --out " +
                           tmp.file("gt.bin"));
    CHECK(r3.exit_code != 0);
    CHECK(r3.output.find("error:") != std::string::npos);
    // Unknown subcommand.
    CHECK(run_cli("frobnicate").exit_code != 0);
    // Invalid sigma grid (descending).
    const std::string db = tmp.file("db.mips");
    REQUIRE(run_cli("gen-data --n 200 --d 6 --clusters 4 --spread 0.4 --seed 61 --out " + db)
                .exit_code == 0);
    RunResult r4 = run_cli("noise --data " + db + " --method kmeans --sigma 0.4,0.1 --out " +
                           tmp.file("n.csv"));
    CHECK(r4.exit_code != 0);
}

TEST_CASE("cli: query without an index runs exact search") {
    SKIP_WITHOUT_CLI();
    TempDir tmp;
    const std::string db = tmp.file("db.mips"), q = tmp.file("q.mips");
    REQUIRE(run_cli("gen-data --n 300 --d 8 --clusters 5 --spread 0.4 --seed 71 --out " + db +
                    " --n-queries 10 --queries-out " + q)
                .exit_code == 0);
    RunResult r = run_cli("query --data " + db + " --queries " + q + " --topk 5 --out " +
                          tmp.file("res.csv"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("speedup=1") != std::string::npos);
}
