// SPDX-License-Identifier: Apache-2.0
//
// fpc-surrogate - surrogate-assisted design screening for circularly polarized
// Fabry-Perot cavity antenna unit cells.
// Copyright (c) 2026 fpc-surrogate contributors
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
// -------------------------------------------------------------------------
//
// End-to-end tests of the fpctool binary: exit codes, emitted files, and
// report conformance to the schemas shipped under schemas/. The binary path
// comes in through the FPCTOOL_PATH compile definition.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "fpc/checkpoint.hpp"
#include "fpc/config.hpp"
#include "fpc/dataset.hpp"
#include "fpc/design_space.hpp"
#include "fpc/nn.hpp"
#include "fpc/reports.hpp"

namespace {

using namespace fpc;

struct temp_dir {
    std::filesystem::path path;

    explicit temp_dir(const std::string& name) {
        path = std::filesystem::temp_directory_path() /
               ("fpc_cli_" + std::to_string(::getpid()) + "_" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string p(const std::string& name) const { return (path / name).string(); }
};

struct tool_result {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the binary with stdout/stderr captured into files inside `dir`.
// Temp paths carry no spaces or shell metacharacters, so no quoting.
tool_result run_tool(const temp_dir& dir, const std::string& args) {
    std::string out_p = dir.p("run_stdout.txt");
    std::string err_p = dir.p("run_stderr.txt");
    std::string cmd = std::string(FPCTOOL_PATH);
    if (!args.empty()) cmd += " " + args;
    cmd += " >" + out_p + " 2>" + err_p;
    int status = std::system(cmd.c_str());
    tool_result r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = read_file(out_p);
    r.err = read_file(err_p);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        if (end > pos) out.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

// Small training budget so the whole suite stays in seconds; every knob that
// matters for file layout (snapshots, histories) is still exercised.
std::string write_tiny_config(const temp_dir& dir) {
    std::string path = dir.p("tiny.json");
    write_file(path, R"({
  "gan": {"iterations": 6, "batch_size": 8, "snapshot_every": 3},
  "mlp": {"epochs": 2},
  "cnn": {"epochs": 1}
})");
    return path;
}

std::string make_dataset(const temp_dir& dir, const std::string& name, int n,
                         std::uint64_t seed) {
    std::string path = dir.p(name);
    tool_result r = run_tool(dir, "gen-dataset --n " + std::to_string(n) + " --seed " +
                                      std::to_string(seed) + " --out " + path);
    REQUIRE(r.code == 0);
    return path;
}

// A generator checkpoint built in-process: random weights, identity-ish norm.
// Valid as far as the file format cares, instant to produce.
std::string write_generator_checkpoint(const temp_dir& dir, const std::string& name,
                                       std::uint64_t seed) {
    checkpoint ck;
    ck.arch = "gan-generator";
    ck.net = build_generator();
    rng_engine eng = make_engine(seed);
    init_glorot(ck.net, eng);
    ck.has_norm = true;
    for (double& v : ck.norm.lo) v = 0.0;
    for (double& v : ck.norm.hi) v = 1.0;
    std::string path = dir.p(name);
    save_checkpoint(ck, path);
    return path;
}

std::string write_design_file(const temp_dir& dir, const std::string& name,
                              std::uint64_t seed) {
    unit_cell_design d = sample_design(cell_geometry{}, seed);
    std::string path = dir.p(name);
    write_file(path, design_to_line(encode(d)) + "\n");
    return path;
}

json load_schema(const std::string& name) {
    std::string path = std::string(FPC_REPO_DIR) + "/schemas/" + name;
    return json::parse(read_file(path));
}

// Rewrites the trailing FNV-1a checksum after a byte patch, so the loader
// reaches the field under test instead of rejecting the file wholesale.
void reseal_checkpoint(std::string& buf) {
    std::uint64_t sum = fnv1a64(buf.data(), buf.size() - 8);
    for (int i = 0; i < 8; ++i)
        buf[buf.size() - 8 + static_cast<std::size_t>(i)] =
            static_cast<char>((sum >> (8 * i)) & 0xff);
}

}  // namespace

TEST_CASE("--version prints the tool and oracle versions") {
    temp_dir dir("version");
    tool_result r = run_tool(dir, "--version");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "fpc-surrogate/1.0.0 (fpc-oracle/1)"));
}

TEST_CASE("usage failures exit with code 1") {
    temp_dir dir("usage");
    CHECK(run_tool(dir, "").code == 1);                                   // no subcommand
    CHECK(run_tool(dir, "frobnicate").code == 1);                         // unknown subcommand
    CHECK(run_tool(dir, "gen-dataset --n 10").code == 1);                 // missing --out
    CHECK(run_tool(dir, "gen-dataset --format xml --out " + dir.p("x")).code == 1);
    CHECK(run_tool(dir, "screen --out " + dir.p("d")).code == 1);         // neither source
    CHECK(run_tool(dir, "export-spectra --design-file x --out y").code == 1);
    tool_result r = run_tool(dir, "gen-dataset --n 0 --out " + dir.p("z.bin"));
    CHECK(r.code == 1);
    CHECK(contains(r.err, "error:"));
}

TEST_CASE("gen-dataset is seed-deterministic across formats") {
    temp_dir dir("gen");
    tool_result r1 = run_tool(dir, "gen-dataset --n 40 --seed 11 --out " + dir.p("a.bin"));
    REQUIRE(r1.code == 0);
    CHECK(contains(r1.out, "n=40"));
    CHECK(contains(r1.out, "seed=11"));

    tool_result r2 = run_tool(dir, "gen-dataset --n 40 --seed 11 --out " + dir.p("b.bin"));
    REQUIRE(r2.code == 0);
    CHECK(read_file(dir.p("a.bin")) == read_file(dir.p("b.bin")));

    tool_result r3 = run_tool(dir, "gen-dataset --n 40 --seed 12 --out " + dir.p("c.bin"));
    REQUIRE(r3.code == 0);
    CHECK(read_file(dir.p("a.bin")) != read_file(dir.p("c.bin")));

    tool_result r4 = run_tool(
        dir, "gen-dataset --n 40 --seed 11 --format csv --out " + dir.p("d.csv"));
    REQUIRE(r4.code == 0);

    dataset bin = load_dataset(dir.p("a.bin"));
    dataset csv = load_dataset(dir.p("d.csv"));
    CHECK(dataset_fingerprint(bin) == dataset_fingerprint(csv));
    CHECK(contains(r1.out, hex64(dataset_fingerprint(bin))));
}

TEST_CASE("train writes checkpoints and histories for every model") {
    temp_dir dir("train");
    std::string ds = make_dataset(dir, "ds.bin", 40, 11);
    std::string cfg = write_tiny_config(dir);

    tool_result g = run_tool(dir, "train --model gan --config " + cfg + " --seed 3 --dataset " +
                                      ds + " --out " + dir.p("g.fpcm"));
    REQUIRE(g.code == 0);
    CHECK(contains(g.out, "critic sibling"));
    CHECK(std::filesystem::exists(dir.p("g.fpcm")));
    CHECK(std::filesystem::exists(dir.p("g.critic.fpcm")));
    REQUIRE(std::filesystem::exists(dir.p("g.history.csv")));

    checkpoint gen = load_checkpoint(dir.p("g.fpcm"));
    CHECK(gen.arch == "gan-generator");
    CHECK(gen.has_norm);
    CHECK(gen.net.in_dim() == latent_dim + design_dim);
    checkpoint critic = load_checkpoint(dir.p("g.critic.fpcm"));
    CHECK(critic.arch == "gan-critic");

    auto hist = lines_of(read_file(dir.p("g.history.csv")));
    REQUIRE(hist.size() == 7);  // header + one row per iteration
    CHECK(hist[0] == "iter,gen_loss,critic_loss,val_nmse_ar,val_nmse_rl,val_nmse_gain");

    tool_result m = run_tool(dir, "train --model mlp --config " + cfg + " --seed 3 --dataset " +
                                      ds + " --out " + dir.p("m.fpcm"));
    REQUIRE(m.code == 0);
    CHECK(load_checkpoint(dir.p("m.fpcm")).arch == "mlp");
    auto mh = lines_of(read_file(dir.p("m.history.csv")));
    REQUIRE(mh.size() == 3);  // header + one row per epoch
    CHECK(mh[0] == "epoch,train_mse");

    tool_result c = run_tool(dir, "train --model cnn --config " + cfg + " --seed 3 --dataset " +
                                      ds + " --out " + dir.p("c.fpcm") + " --history " +
                                      dir.p("chist.csv"));
    REQUIRE(c.code == 0);
    CHECK(load_checkpoint(dir.p("c.fpcm")).arch == "cnn");
    CHECK(std::filesystem::exists(dir.p("chist.csv")));

    CHECK(run_tool(dir, "train --model rnn --dataset " + ds + " --out " + dir.p("r.fpcm")).code ==
          1);
    tool_result miss = run_tool(
        dir, "train --model mlp --dataset " + dir.p("nope.bin") + " --out " + dir.p("x.fpcm"));
    CHECK(miss.code == 2);
    CHECK(contains(miss.err, "error:"));
}

TEST_CASE("export-spectra emits oracle rows, plus generator rows with a checkpoint") {
    temp_dir dir("spectra");
    std::string design = write_design_file(dir, "design.txt", 19);

    tool_result o = run_tool(
        dir, "export-spectra --oracle --design-file " + design + " --out " + dir.p("o.csv"));
    REQUIRE(o.code == 0);
    CHECK(contains(o.out, "(oracle only)"));
    const std::size_t n_pts = static_cast<std::size_t>(frequency_grid{}.points);
    auto rows = lines_of(read_file(dir.p("o.csv")));
    REQUIRE(rows.size() == 1 + n_pts);
    CHECK(rows[0] == "source,freq_ghz,ar_db,rl_db,gain_dbi");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].rfind("oracle,", 0) == 0);

    std::string ckpt = write_generator_checkpoint(dir, "gen.fpcm", 5);
    tool_result b = run_tool(dir, "export-spectra --checkpoint " + ckpt + " --design-file " +
                                      design + " --out " + dir.p("b.csv"));
    REQUIRE(b.code == 0);
    CHECK(contains(b.out, "(oracle + gan)"));
    auto both = lines_of(read_file(dir.p("b.csv")));
    REQUIRE(both.size() == 1 + 2 * n_pts);
    std::size_t oracle_rows = 0, gan_rows = 0;
    for (std::size_t i = 1; i < both.size(); ++i) {
        oracle_rows += both[i].rfind("oracle,", 0) == 0;
        gan_rows += both[i].rfind("gan,", 0) == 0;
    }
    CHECK(oracle_rows == n_pts);
    CHECK(gan_rows == n_pts);

    CHECK(run_tool(dir, "export-spectra --oracle --checkpoint " + ckpt + " --design-file " +
                            design + " --out " + dir.p("x.csv"))
              .code == 1);  // mutually exclusive sources
    CHECK(run_tool(dir, "export-spectra --oracle --design-file " + dir.p("missing.txt") +
                            " --out " + dir.p("y.csv"))
              .code == 2);
}

TEST_CASE("screen with the oracle writes schema-valid reports") {
    temp_dir dir("screen");
    std::string out_dir = dir.p("reports");
    tool_result r = run_tool(
        dir, "screen --oracle --n 30 --seed 21 --top-k 3 --out " + out_dir);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "pool 30"));
    CHECK(contains(r.out, "reports in " + out_dir));

    json sr = json::parse(read_file(out_dir + "/screening_report.json"));
    CHECK(schema_validate(sr, load_schema("screening_report.schema.json")) == "");
    CHECK(sr.at("pool_size").get<int>() == 30);
    CHECK(sr.at("candidates").size() == 30);
    CHECK(sr.at("ranking").size() == 30);
    CHECK(sr.at("histograms").size() == 5);

    json vr = json::parse(read_file(out_dir + "/verification_report.json"));
    CHECK(schema_validate(vr, load_schema("verification_report.schema.json")) == "");
    REQUIRE(vr.at("rows").size() <= 3);
    for (const auto& row : vr.at("rows")) {
        // oracle screened against itself: the verification deltas vanish
        for (const auto& kv : row.at("deltas").items()) CHECK(kv.value().get<double>() == 0.0);
    }

    for (const char* metric :
         {"f_res_ghz", "gain_at_res_dbi", "zbw_mhz", "ar5bw_mhz", "ar_min_db"}) {
        std::string path = out_dir + "/hist_" + std::string(metric) + ".csv";
        REQUIRE(std::filesystem::exists(path));
        auto hist = lines_of(read_file(path));
        REQUIRE(hist.size() >= 2);
        CHECK(hist[0] == "bin_low,bin_high,count");
    }
}

TEST_CASE("screen accepts a generator checkpoint and rejects other kinds") {
    temp_dir dir("screen_ckpt");
    std::string ckpt = write_generator_checkpoint(dir, "gen.fpcm", 9);
    tool_result r = run_tool(dir, "screen --checkpoint " + ckpt + " --n 10 --seed 5 --top-k 2 " +
                                      "--out " + dir.p("rep"));
    REQUIRE(r.code == 0);
    json sr = json::parse(read_file(dir.p("rep") + "/screening_report.json"));
    CHECK(schema_validate(sr, load_schema("screening_report.schema.json")) == "");
    CHECK(sr.at("pool_size").get<int>() == 10);

    // an mlp checkpoint is a valid file but the wrong model kind
    checkpoint mlp;
    mlp.arch = "mlp";
    mlp.net = build_mlp_baseline();
    save_checkpoint(mlp, dir.p("m.fpcm"));
    tool_result bad = run_tool(
        dir, "screen --checkpoint " + dir.p("m.fpcm") + " --n 5 --out " + dir.p("rep2"));
    CHECK(bad.code == 1);
    CHECK(contains(bad.err, "gan-generator"));
}

TEST_CASE("screening criteria come from a JSON file with closed-world keys") {
    temp_dir dir("criteria");
    write_file(dir.p("crit.json"), R"({"min_zbw_mhz": 0, "max_ar_min_db": 100})");
    tool_result r = run_tool(dir, "screen --oracle --n 8 --seed 4 --criteria " +
                                      dir.p("crit.json") + " --out " + dir.p("rep"));
    REQUIRE(r.code == 0);
    // every gate disabled: the whole pool is feasible
    CHECK(contains(r.out, "pool 8  feasible 8"));

    write_file(dir.p("bad.json"), R"({"min_zbw": 0})");
    CHECK(run_tool(dir, "screen --oracle --n 8 --criteria " + dir.p("bad.json") + " --out " +
                            dir.p("rep2"))
              .code == 1);
}

TEST_CASE("gradcheck passes clean and fails when the gradient is corrupted") {
    temp_dir dir("gradcheck");
    tool_result ok = run_tool(dir, "gradcheck --arch mlp --seed 7");
    CHECK(ok.code == 0);
    CHECK(contains(ok.out, "gradcheck mlp: pass"));
    CHECK(contains(ok.out, "failures=0"));

    tool_result bad = run_tool(dir, "gradcheck --arch mlp --seed 7 --corrupt 100");
    CHECK(bad.code == 3);
    CHECK(contains(bad.out, "fail"));
    CHECK(contains(bad.err, "error:"));

    CHECK(run_tool(dir, "gradcheck --arch transformer").code == 1);
}

TEST_CASE("benchmark emits a schema-valid model comparison report") {
    temp_dir dir("bench");
    std::string ds = make_dataset(dir, "ds.bin", 40, 11);
    std::string cfg = write_tiny_config(dir);
    tool_result r = run_tool(dir, "benchmark --config " + cfg + " --seed 13 --dataset " + ds +
                                      " --out " + dir.p("nmse.json"));
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "report " + dir.p("nmse.json")));

    json doc = json::parse(read_file(dir.p("nmse.json")));
    CHECK(schema_validate(doc, load_schema("nmse_report.schema.json")) == "");
    CHECK(doc.at("tool_version").get<std::string>() == tool_version);
    CHECK(doc.at("oracle_version").get<std::string>() == oracle_version);
    CHECK(doc.at("seeds").at("master").get<std::uint64_t>() == 13);
    CHECK(doc.at("dataset_fingerprint").get<std::string>() ==
          hex64(dataset_fingerprint(load_dataset(ds))));
}

TEST_CASE("config files are closed-world and pin the oracle version") {
    temp_dir dir("config");

    write_file(dir.p("typo.json"), R"({"gan": {"iterationz": 5}})");
    tool_result typo = run_tool(dir, "gen-dataset --config " + dir.p("typo.json") + " --out " +
                                         dir.p("x.bin"));
    CHECK(typo.code == 1);
    CHECK(contains(typo.err, "unknown config key: gan.iterationz"));

    write_file(dir.p("broken.json"), "{");
    CHECK(run_tool(dir, "gen-dataset --config " + dir.p("broken.json") + " --out " +
                            dir.p("y.bin"))
              .code == 1);

    write_file(dir.p("stale.json"), R"({"oracle_version": "fpc-oracle/0"})");
    tool_result stale = run_tool(dir, "gen-dataset --config " + dir.p("stale.json") + " --out " +
                                          dir.p("z.bin"));
    CHECK(stale.code == 4);
    CHECK(contains(stale.err, "oracle"));

    // the shipped default config must parse cleanly
    std::string shipped = std::string(FPC_REPO_DIR) + "/configs/default.json";
    tool_result ok = run_tool(dir, "gen-dataset --config " + shipped + " --n 5 --seed 2 --out " +
                                       dir.p("ok.bin"));
    CHECK(ok.code == 0);
}

TEST_CASE("checkpoint pins map to the version exit code") {
    temp_dir dir("pins");
    std::string design = write_design_file(dir, "design.txt", 23);
    std::string ckpt = write_generator_checkpoint(dir, "gen.fpcm", 5);

    // format version bumped, checksum resealed: loader reports a version error
    std::string buf = read_file(ckpt);
    buf[4] = 2;
    reseal_checkpoint(buf);
    write_file(dir.p("v2.fpcm"), buf);
    tool_result v2 = run_tool(dir, "export-spectra --checkpoint " + dir.p("v2.fpcm") +
                                       " --design-file " + design + " --out " + dir.p("a.csv"));
    CHECK(v2.code == 4);
    CHECK(contains(v2.err, "version"));

    // stale oracle pin inside an otherwise valid checkpoint
    checkpoint stale = load_checkpoint(ckpt);
    stale.oracle_ver = "fpc-oracle/0";
    save_checkpoint(stale, dir.p("stale.fpcm"));
    tool_result so = run_tool(dir, "export-spectra --checkpoint " + dir.p("stale.fpcm") +
                                       " --design-file " + design + " --out " + dir.p("b.csv"));
    CHECK(so.code == 4);
    CHECK(contains(so.err, "oracle"));

    // flipped payload byte without resealing: checksum mismatch is an I/O error
    std::string corrupt = read_file(ckpt);
    corrupt[20] = static_cast<char>(corrupt[20] ^ 0x5a);
    write_file(dir.p("corrupt.fpcm"), corrupt);
    CHECK(run_tool(dir, "export-spectra --checkpoint " + dir.p("corrupt.fpcm") +
                            " --design-file " + design + " --out " + dir.p("c.csv"))
              .code == 2);

    // truncation loses the checksum entirely
    write_file(dir.p("trunc.fpcm"), read_file(ckpt).substr(0, 40));
    CHECK(run_tool(dir, "export-spectra --checkpoint " + dir.p("trunc.fpcm") +
                            " --design-file " + design + " --out " + dir.p("d.csv"))
              .code == 2);
}
