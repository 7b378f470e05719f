// SPDX-License-Identifier: Apache-2.0
// fpc-surrogate tests: baseline regressors, the mean-predictor floor, and the
// three-way benchmark pipeline contract.

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fpc/baselines.hpp"

using namespace fpc;

TEST_CASE("segment nmse wrapper takes truth first") {
    matrix truth(1, response_dim), pred(1, response_dim);
    truth.at(0, 0) = 1.0;
    truth.at(0, 1) = 2.0;
    pred.at(0, 0) = 1.0;
    pred.at(0, 1) = 1.0;
    CHECK(std::abs(nmse(truth, pred, segment::axial_ratio) - 0.2) < 1e-15);
    CHECK(std::abs(nmse(truth, pred, segment::all) - 0.2) < 1e-15);
    CHECK(nmse(truth, pred, segment::return_loss) == 0.0);
    // swapped arguments normalize by the wrong energy
    CHECK(std::abs(nmse(pred, truth, segment::axial_ratio) - 0.5) < 1e-15);
}

TEST_CASE("mean predictor averages the training rows only") {
    training_arrays arrays;
    arrays.y_phys.resize(4, response_dim);
    arrays.y_phys.at(0, 0) = 1.0;
    arrays.y_phys.at(1, 0) = 3.0;
    arrays.y_phys.at(2, 0) = 4.0;   // validation row, must not shift the mean
    arrays.y_phys.at(3, 0) = 100.0; // unused row
    data_split split;
    split.train_idx = {0, 1};
    split.val_idx = {2};

    matrix mean = mean_predictor_response(arrays, split.train_idx);
    CHECK(mean.at(0, 0) == 2.0);
    for (int j = 1; j < response_dim; ++j) CHECK(mean.at(0, j) == 0.0);

    auto floor_nmse = mean_predictor_nmse(arrays, split);
    CHECK(std::abs(floor_nmse.ar - 0.25) < 1e-15);  // (2-4)^2 / 4^2
    CHECK(floor_nmse.rl == 0.0);
}

TEST_CASE("mlp short run reduces training error deterministically") {
    cell_geometry g;
    auto ds = generate_dataset(g, 40, 6);
    baseline_config cfg;
    cfg.epochs = 30;
    auto res = train_mlp(ds, cfg, 3);

    CHECK(res.final_train_mse < res.initial_train_mse);
    REQUIRE(res.epoch_train_mse.size() == 30);
    for (double v : res.epoch_train_mse) CHECK(std::isfinite(v));
    CHECK(res.epoch_train_mse.back() < res.epoch_train_mse.front());
    CHECK(std::isfinite(res.val_nmse.total()));
    CHECK(res.val_nmse.ar >= 0.0);
    CHECK(res.split.val_idx.size() == 4);

    auto res2 = train_mlp(ds, cfg, 3);
    for (std::size_t i = 0; i < res.net.blocks.size(); ++i)
        CHECK(res.net.blocks[i].fc.w.a == res2.net.blocks[i].fc.w.a);
    CHECK(res.epoch_train_mse == res2.epoch_train_mse);

    auto res3 = train_mlp(ds, cfg, 4);
    CHECK(res.net.blocks[0].fc.w.a != res3.net.blocks[0].fc.w.a);
}

TEST_CASE("cnn short run reduces training error deterministically") {
    cell_geometry g;
    auto ds = generate_dataset(g, 40, 8);
    baseline_config cfg;
    cfg.epochs = 6;
    auto res = train_cnn(ds, cfg, 2);

    CHECK(res.final_train_mse < res.initial_train_mse);
    REQUIRE(res.epoch_train_mse.size() == 6);
    for (double v : res.epoch_train_mse) CHECK(std::isfinite(v));
    CHECK(std::isfinite(res.val_nmse.total()));

    auto res2 = train_cnn(ds, cfg, 2);
    CHECK(res.epoch_train_mse == res2.epoch_train_mse);
    CHECK(res.final_train_mse == res2.final_train_mse);
}

TEST_CASE("rasterized dataset marks one pixel per brick") {
    cell_geometry g;
    auto ds = generate_dataset(g, 10, 12);
    auto grids = rasterize_dataset(ds);
    REQUIRE(grids.size() == 10);
    for (const auto& grid : grids) {
        CHECK(grid.resolution == 60);
        CHECK(grid.popcount() == 36);
    }
}

TEST_CASE("baseline history csv is epoch,train_mse") {
    auto path = (std::filesystem::temp_directory_path() /
                 ("fpc_test_" + std::to_string(::getpid()) + "_bhist.csv"))
                    .string();
    save_baseline_history_csv({0.5, 0.25}, path);
    std::string text = read_file(path);
    std::filesystem::remove(path);
    CHECK(text == "epoch,train_mse\n1,0.5\n2,0.25\n");
}

TEST_CASE("benchmark trains all models on one shared pipeline") {
    cell_geometry g;
    auto ds = generate_dataset(g, 40, 9);
    gan_config gan_cfg;
    gan_cfg.iterations = 12;
    gan_cfg.snapshot_every = 6;
    baseline_config mlp_cfg;
    mlp_cfg.epochs = 10;
    baseline_config cnn_cfg;
    cnn_cfg.epochs = 4;

    gan_train_result gan_out;
    auto rep = benchmark_models(ds, gan_cfg, mlp_cfg, cnn_cfg, 13, &gan_out);

    CHECK(rep.master_seed == 13);
    CHECK(rep.dataset_fp == dataset_fingerprint(ds));
    CHECK(rep.oracle_ver == oracle_version);
    CHECK(rep.pipeline_fp != 0);
    CHECK(rep.pipeline_fp == pipeline_fingerprint(gan_out.split, gan_out.norm));
    for (double v : {rep.gan.ar, rep.gan.rl, rep.gan.gain, rep.mlp.ar, rep.mlp.rl,
                     rep.mlp.gain, rep.cnn.ar, rep.cnn.rl, rep.cnn.gain,
                     rep.mean_predictor.ar, rep.mean_predictor.rl, rep.mean_predictor.gain}) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    CHECK(rep.mean_predictor.total() > 0.0);
    CHECK(rep.gan_seconds > 0.0);
    CHECK(rep.mlp_seconds > 0.0);
    CHECK(rep.cnn_seconds > 0.0);
    CHECK_FALSE(gan_out.generator.blocks.empty());
}
