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
// fpctool: command-line front end. Every command is deterministic given its
// flags; all randomness flows from explicit seeds. Configuration comes from
// an optional JSON file plus flag overrides; flags win.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 numeric failure, 4 version
// mismatch.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpc/baselines.hpp"
#include "fpc/checkpoint.hpp"
#include "fpc/config.hpp"
#include "fpc/dataset.hpp"
#include "fpc/design_space.hpp"
#include "fpc/em_oracle.hpp"
#include "fpc/gan.hpp"
#include "fpc/gradcheck.hpp"
#include "fpc/reports.hpp"
#include "fpc/screening.hpp"

namespace {

using namespace fpc;

struct cli_state {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> geometry;  // "side_mm,inset_mm"

    // Applies the config file first, then flag overrides.
    run_config resolve() const {
        run_config c;
        if (!config_path.empty()) c = load_run_config(config_path);
        if (seed) c.seed = *seed;
        if (geometry) {
            double side = 0.0, inset = 0.0;
            if (std::sscanf(geometry->c_str(), "%lf,%lf", &side, &inset) != 2)
                throw usage_error("--geometry expects \"side_mm,inset_mm\", got: " + *geometry);
            c.cell_side_mm = side;
            c.loop_inset_mm = inset;
        }
        return c;
    }
};

std::string history_path_for(const std::string& out) {
    std::string h = out;
    const std::string ext = ".fpcm";
    if (h.size() > ext.size() && h.compare(h.size() - ext.size(), ext.size(), ext) == 0)
        h.resize(h.size() - ext.size());
    return h + ".history.csv";
}

checkpoint dense_checkpoint(const std::string& arch, const network& net, const response_norm& norm,
                            const cell_geometry& g) {
    checkpoint ck;
    ck.arch = arch;
    ck.net = net;
    ck.has_norm = true;
    ck.norm = norm;
    ck.side_mm = g.side_mm;
    ck.inset_mm = g.inset_mm;
    return ck;
}

// Generator checkpoint as a screening predictor: raw designs in mm are
// normalized by the stored geometry, predictions denormalized by the stored
// response range. Re-seeds per call so the closure stays a pure function.
response_predictor checkpoint_predictor(const checkpoint& ck, const gan_config& cfg,
                                        std::uint64_t seed) {
    if (ck.arch != "gan-generator")
        throw usage_error("screening needs a gan-generator checkpoint, got: " + ck.arch);
    if (!ck.has_norm)
        throw usage_error("checkpoint carries no response normalization; retrain and save");
    cell_geometry g = cell_geometry::make(ck.side_mm, ck.inset_mm);
    network gen = ck.net;  // mutable copy, forward touches caches only
    return [gen, norm = ck.norm, g, cfg, seed](const std::vector<design_vector>& designs) mutable {
        matrix x(static_cast<int>(designs.size()), design_dim);
        for (std::size_t i = 0; i < designs.size(); ++i) {
            auto u = normalize_design(designs[i], g);
            for (int j = 0; j < design_dim; ++j) x.at(static_cast<int>(i), j) = u[j];
        }
        rng_engine noise = make_engine(stream_seed(seed, "predict"));
        return predict_physical(gen, norm, x, cfg.predict_policy, cfg.noise_draws, noise);
    };
}

void print_segments(const char* label, const nmse_by_segment& s) {
    std::printf("%s nmse  ar %.6f  rl %.6f  gain %.6f\n", label, s.ar, s.rl, s.gain);
}

int cmd_gen_dataset(const cli_state& cli, int n_flag, const std::string& out,
                    const std::string& format_flag) {
    run_config c = cli.resolve();
    if (n_flag >= 0) c.dataset_n = n_flag;
    if (!format_flag.empty()) c.dataset_format = format_flag;
    dataset ds = generate_dataset(c.geometry(), c.dataset_n, c.seed);
    save_dataset(ds, out, c.dataset_format);
    std::printf("dataset %s  n=%d  seed=%llu  fingerprint %s\n", out.c_str(), c.dataset_n,
                static_cast<unsigned long long>(c.seed), hex64(dataset_fingerprint(ds)).c_str());
    return 0;
}

int cmd_train(const cli_state& cli, const std::string& model, const std::string& dataset_path,
              const std::string& out, std::string history) {
    run_config c = cli.resolve();
    dataset ds = load_dataset(dataset_path);
    if (history.empty()) history = history_path_for(out);

    if (model == "gan") {
        gan_train_result r = train_gan(ds, c.gan, c.seed);
        save_checkpoint(dense_checkpoint("gan-generator", r.generator, r.norm, ds.geometry), out);
        checkpoint critic;
        critic.arch = "gan-critic";
        critic.net = r.critic;
        save_checkpoint(critic, critic_sibling_path(out));
        save_history_csv(r.history, history);
        print_segments("gan val", r.final_val_nmse);
        std::printf("checkpoint %s (+ critic sibling), history %s, %.1f s\n", out.c_str(),
                    history.c_str(), r.elapsed_seconds);
    } else if (model == "mlp") {
        mlp_train_result r = train_mlp(ds, c.mlp, c.seed);
        save_checkpoint(dense_checkpoint("mlp", r.net, r.norm, ds.geometry), out);
        save_baseline_history_csv(r.epoch_train_mse, history);
        print_segments("mlp val", r.val_nmse);
        std::printf("checkpoint %s, history %s, %.1f s\n", out.c_str(), history.c_str(),
                    r.elapsed_seconds);
    } else if (model == "cnn") {
        cnn_train_result r = train_cnn(ds, c.cnn, c.seed);
        checkpoint ck;
        ck.arch = "cnn";
        ck.cnn = r.model;
        ck.has_norm = true;
        ck.norm = r.norm;
        ck.side_mm = ds.geometry.side_mm;
        ck.inset_mm = ds.geometry.inset_mm;
        save_checkpoint(ck, out);
        save_baseline_history_csv(r.epoch_train_mse, history);
        print_segments("cnn val", r.val_nmse);
        std::printf("checkpoint %s, history %s, %.1f s\n", out.c_str(), history.c_str(),
                    r.elapsed_seconds);
    } else {
        throw usage_error("--model must be gan, mlp, or cnn, got: " + model);
    }
    return 0;
}

int cmd_benchmark(const cli_state& cli, const std::string& dataset_path, const std::string& out) {
    run_config c = cli.resolve();
    dataset ds = load_dataset(dataset_path);
    nmse_report rep = benchmark_models(ds, c.gan, c.mlp, c.cnn, c.seed);
    save_json(nmse_report_json(rep), out);
    print_segments("gan ", rep.gan);
    print_segments("cnn ", rep.cnn);
    print_segments("mlp ", rep.mlp);
    print_segments("mean", rep.mean_predictor);
    std::printf("report %s\n", out.c_str());
    return 0;
}

screening_criteria load_criteria(const std::string& path, screening_criteria base) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw usage_error("criteria file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw usage_error("criteria file must hold a JSON object");
    detail::reject_unknown_keys(
        j, {"min_zbw_mhz", "max_ar_min_db", "w_zbw", "w_ar5bw", "w_ar", "w_gain"}, "");
    detail::read_key(j, "min_zbw_mhz", base.min_zbw_mhz, "");
    detail::read_key(j, "max_ar_min_db", base.max_ar_min_db, "");
    detail::read_key(j, "w_zbw", base.w_zbw, "");
    detail::read_key(j, "w_ar5bw", base.w_ar5bw, "");
    detail::read_key(j, "w_ar", base.w_ar, "");
    detail::read_key(j, "w_gain", base.w_gain, "");
    return base;
}

int cmd_screen(const cli_state& cli, const std::string& checkpoint_path, bool use_oracle,
               int n_flag, const std::string& criteria_path, int top_k_flag,
               const std::string& out_dir) {
    run_config c = cli.resolve();
    if (n_flag >= 0) c.screening_n = n_flag;
    if (top_k_flag >= 0) c.screening_top_k = top_k_flag;
    screening_criteria crit = c.criteria;
    if (!criteria_path.empty()) crit = load_criteria(criteria_path, crit);

    cell_geometry g = c.geometry();
    response_predictor predict;
    if (use_oracle) {
        predict = make_oracle_predictor(g);
    } else {
        checkpoint ck = load_checkpoint(checkpoint_path);
        require_oracle_version(ck);
        g = cell_geometry::make(ck.side_mm, ck.inset_mm);
        predict = checkpoint_predictor(ck, c.gan, c.seed);
    }

    screening_report rep = screen_candidates(predict, g, c.screening_n, c.seed, crit);
    selection sel = select_optimal(rep, c.screening_top_k);
    verification_report ver = verify_selection(sel, g);

    std::filesystem::create_directories(out_dir);
    auto in_dir = [&out_dir](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    save_json(screening_report_json(rep), in_dir("screening_report.json"));
    save_json(verification_report_json(ver, rep.pool_seed), in_dir("verification_report.json"));
    for (const auto& h : rep.histograms) save_histogram_csv(h, in_dir("hist_" + h.metric + ".csv"));

    std::printf("pool %d  feasible %d  timing_ms %.2f\n", rep.pool_size, rep.feasible_count,
                rep.timing_ms);
    if (sel.shortfall)
        std::fprintf(stderr, "warning: only %zu feasible designs for top-%d request\n",
                     sel.designs.size(), sel.requested);
    if (!sel.designs.empty()) {
        const auto& w = sel.designs.front();
        std::printf("winner pool_index %d  score %.3f\n", w.index, w.score);
        std::printf("  predicted f_res %.4f GHz  gain %.3f dBi  zbw %.2f MHz  ar5bw %.2f MHz  "
                    "ar_min %.3f dB\n",
                    w.predicted.f_res_ghz, w.predicted.gain_at_res_dbi, w.predicted.zbw_mhz,
                    w.predicted.ar5bw_mhz, w.predicted.ar_min_db);
        const auto& v = ver.rows.front();
        std::printf("  oracle    f_res %.4f GHz  gain %.3f dBi  zbw %.2f MHz  ar5bw %.2f MHz  "
                    "ar_min %.3f dB\n",
                    v.oracle.f_res_ghz, v.oracle.gain_at_res_dbi, v.oracle.zbw_mhz,
                    v.oracle.ar5bw_mhz, v.oracle.ar_min_db);
    }
    std::printf("reports in %s\n", out_dir.c_str());
    return 0;
}

int cmd_export_spectra(const cli_state& cli, const std::string& checkpoint_path, bool use_oracle,
                       const std::string& design_file, const std::string& out) {
    run_config c = cli.resolve();
    std::string text = read_file(design_file);
    std::string line;
    for (std::size_t pos = 0; pos < text.size();) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
        line.clear();
        pos = end + 1;
    }
    if (line.empty()) throw io_error("design file is empty: " + design_file);
    design_vector x = design_from_line(line);

    cell_geometry g = c.geometry();
    std::optional<checkpoint> ck;
    if (!use_oracle) {
        ck = load_checkpoint(checkpoint_path);
        require_oracle_version(*ck);
        g = cell_geometry::make(ck->side_mm, ck->inset_mm);
    }

    frequency_grid grid;
    antenna_response truth = oracle_evaluate(decode_design(x, g), grid);
    std::string csv = spectra_csv_header() + "\n";
    append_spectra_rows(csv, "oracle", truth, grid);
    if (ck) {
        response_predictor predict = checkpoint_predictor(*ck, c.gan, c.seed);
        matrix pred = predict({x});
        response_vector flat;
        for (int j = 0; j < response_dim; ++j) flat[static_cast<std::size_t>(j)] = pred.at(0, j);
        append_spectra_rows(csv, "gan", unflatten_response(flat), grid);
    }
    write_file(out, csv);
    std::printf("spectra %s (%s)\n", out.c_str(), ck ? "oracle + gan" : "oracle only");
    return 0;
}

int cmd_gradcheck(const std::string& arch, std::uint64_t seed, double corrupt) {
    gradcheck_result r = gradcheck_arch(arch, seed, corrupt);
    std::printf("gradcheck %s: %s  probes=%d  failures=%d  max_rel_error=%.3e\n", arch.c_str(),
                r.passed ? "pass" : "fail", r.probes, r.failures, r.max_rel_err);
    if (!r.passed) throw numeric_error("gradient check failed for " + arch);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpc-surrogate: GAN-assisted screening for CP Fabry-Perot cavity antennas"};
    app.set_version_flag("--version", std::string(fpc::tool_version) + " (" +
                                          std::string(fpc::oracle_version) + ")");
    app.require_subcommand(1);

    cli_state cli;
    auto add_common = [&](CLI::App* sub, bool with_geometry) {
        sub->add_option("--config", cli.config_path, "JSON run configuration");
        sub->add_option("--seed", cli.seed, "master seed");
        if (with_geometry)
            sub->add_option("--geometry", cli.geometry, "cell geometry as side_mm,inset_mm");
    };

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "sample designs and run the oracle");
    int gen_n = -1;
    std::string gen_out, gen_format;
    add_common(gen, true);
    gen->add_option("--n", gen_n, "number of design/response pairs");
    gen->add_option("--out", gen_out, "output dataset path")->required();
    gen->add_option("--format", gen_format, "bin or csv")
        ->check(CLI::IsMember({"bin", "csv"}));

    // train
    auto* train = app.add_subcommand("train", "train a surrogate on a dataset");
    std::string train_model, train_dataset, train_out, train_history;
    add_common(train, false);
    train->add_option("--model", train_model, "gan, mlp, or cnn")->required();
    train->add_option("--dataset", train_dataset, "FPCD dataset path")->required();
    train->add_option("--out", train_out, "checkpoint output path")->required();
    train->add_option("--history", train_history,
                      "history CSV path (default: --out with .fpcm replaced by .history.csv)");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "train gan, mlp, cnn on a shared split");
    std::string bench_dataset, bench_out;
    add_common(bench, false);
    bench->add_option("--dataset", bench_dataset, "FPCD dataset path")->required();
    bench->add_option("--out", bench_out, "NMSE report JSON path")->required();

    // screen
    auto* screen = app.add_subcommand("screen", "rank a candidate pool and verify the winners");
    std::string screen_ckpt, screen_criteria, screen_out;
    bool screen_oracle = false;
    int screen_n = -1, screen_top_k = -1;
    add_common(screen, true);
    auto* sc = screen->add_option("--checkpoint", screen_ckpt, "gan-generator checkpoint");
    auto* so = screen->add_flag("--oracle", screen_oracle, "screen with the oracle itself");
    sc->excludes(so);
    screen->add_option("--n", screen_n, "candidate pool size");
    screen->add_option("--criteria", screen_criteria, "JSON file with screening criteria");
    screen->add_option("--top-k", screen_top_k, "designs to select and verify");
    screen->add_option("--out", screen_out, "output directory for reports")->required();

    // export-spectra
    auto* spectra = app.add_subcommand("export-spectra", "frequency sweeps for one design");
    std::string spec_ckpt, spec_design, spec_out;
    bool spec_oracle = false;
    add_common(spectra, true);
    auto* xc = spectra->add_option("--checkpoint", spec_ckpt, "gan-generator checkpoint");
    auto* xo = spectra->add_flag("--oracle", spec_oracle, "oracle curves only");
    xc->excludes(xo);
    spectra->add_option("--design-file", spec_design, "file with one design per line")->required();
    spectra->add_option("--out", spec_out, "spectra CSV path")->required();

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_arch;
    std::uint64_t gc_seed = 7;
    double gc_corrupt = 1.0;
    gc->add_option("--arch", gc_arch, "gan-gen, gan-critic, mlp, or cnn")->required();
    gc->add_option("--seed", gc_seed, "probe seed");
    gc->add_option("--corrupt", gc_corrupt, "scale one gradient entry (mutation testing)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_dataset(cli, gen_n, gen_out, gen_format);
        if (train->parsed())
            return cmd_train(cli, train_model, train_dataset, train_out, train_history);
        if (bench->parsed()) return cmd_benchmark(cli, bench_dataset, bench_out);
        if (screen->parsed()) {
            if (screen_ckpt.empty() && !screen_oracle)
                throw fpc::usage_error("screen needs --checkpoint or --oracle");
            return cmd_screen(cli, screen_ckpt, screen_oracle, screen_n, screen_criteria,
                              screen_top_k, screen_out);
        }
        if (spectra->parsed()) {
            if (spec_ckpt.empty() && !spec_oracle)
                throw fpc::usage_error("export-spectra needs --checkpoint or --oracle");
            return cmd_export_spectra(cli, spec_ckpt, spec_oracle, spec_design, spec_out);
        }
        if (gc->parsed()) return cmd_gradcheck(gc_arch, gc_seed, gc_corrupt);
        throw fpc::usage_error("no subcommand given");
    } catch (const fpc::usage_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const fpc::io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fpc::numeric_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const fpc::version_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
