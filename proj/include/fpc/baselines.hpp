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
// Regression baselines for the surrogate comparison: a dense MLP on the raw
// design vector and a small CNN on the occupancy raster, both trained with
// mean-squared error on exactly the split and normalization the GAN uses.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/conv.hpp"
#include "fpc/dataset.hpp"
#include "fpc/gan.hpp"
#include "fpc/nn.hpp"

namespace fpc {

// Segment-restricted NMSE in physical units (spec order: truth, prediction).
inline double nmse(const matrix& real, const matrix& predicted, segment seg) {
    nmse_by_segment by = compute_segment_nmse(predicted, real);
    switch (seg) {
        case segment::axial_ratio: return by.ar;
        case segment::return_loss: return by.rl;
        case segment::gain: return by.gain;
        case segment::all: break;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < real.a.size(); ++i) {
        double d = predicted.a[i] - real.a[i];
        num += d * d;
        den += real.a[i] * real.a[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

struct baseline_config {
    long long epochs = 2000;
    int batch_size = 16;
    double lr = 5e-4;
    double weight_decay = 0.0;
};

// Training-split mean response in physical units, the floor every model must
// beat.
inline matrix mean_predictor_response(const training_arrays& arrays,
                                      const std::vector<std::uint32_t>& train_idx) {
    matrix mean(1, response_dim);
    for (std::uint32_t idx : train_idx) {
        const double* r = arrays.y_phys.row(static_cast<int>(idx));
        for (int j = 0; j < response_dim; ++j) mean.at(0, j) += r[j];
    }
    for (int j = 0; j < response_dim; ++j) mean.at(0, j) /= static_cast<double>(train_idx.size());
    return mean;
}

inline nmse_by_segment mean_predictor_nmse(const training_arrays& arrays,
                                           const data_split& split) {
    matrix mean = mean_predictor_response(arrays, split.train_idx);
    matrix truth = gather_rows(arrays.y_phys, split.val_idx);
    matrix pred(truth.rows, response_dim);
    for (int i = 0; i < truth.rows; ++i)
        for (int j = 0; j < response_dim; ++j) pred.at(i, j) = mean.at(0, j);
    return compute_segment_nmse(pred, truth);
}

struct mlp_train_result {
    network net;
    response_norm norm;
    data_split split;
    double initial_train_mse = 0.0;
    double final_train_mse = 0.0;
    std::vector<double> epoch_train_mse;  // one row per epoch, normalized units
    nmse_by_segment val_nmse;
    double elapsed_seconds = 0.0;
};

namespace detail {

inline double mean_squared_error(const matrix& pred, const matrix& truth) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.a.size(); ++i) {
        double d = pred.a[i] - truth.a[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.a.size());
}

// Epoch schedule shared by both baselines: seeded shuffle each epoch,
// contiguous batches, the final short batch included.
template <typename StepFn>
inline void run_epochs(const baseline_config& cfg, std::size_t n_train, rng_engine& shuffler,
                       StepFn&& step) {
    std::vector<std::uint32_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = static_cast<std::uint32_t>(i);
    for (long long e = 0; e < cfg.epochs; ++e) {
        for (std::size_t i = n_train; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(shuffler, i));
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n_train;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
            step(order, start, stop);
        }
    }
}

}  // namespace detail

inline mlp_train_result train_mlp_on_split(const dataset& ds, const baseline_config& cfg,
                                           std::uint64_t seed, const data_split& split) {
    const auto t0 = std::chrono::steady_clock::now();
    mlp_train_result res;
    res.split = split;
    res.norm = compute_response_norm(ds, split.train_idx);
    training_arrays arrays = make_training_arrays(ds, res.norm);

    res.net = build_mlp_baseline();
    rng_engine init = make_engine(stream_seed(seed, "mlp-init"));
    init_glorot(res.net, init);
    rng_engine shuffler = make_engine(stream_seed(seed, "mlp-shuffle"));

    matrix train_x = gather_rows(arrays.x, split.train_idx);
    matrix train_y = gather_rows(arrays.y_unit, split.train_idx);
    res.initial_train_mse =
        detail::mean_squared_error(forward(res.net, train_x, run_mode::infer), train_y);

    adam_state opt;
    opt.cfg.lr = cfg.lr;
    opt.cfg.weight_decay = cfg.weight_decay;
    const double dim_scale = static_cast<double>(res.net.out_dim());
    const std::size_t n_train = split.train_idx.size();
    double epoch_sq = 0.0;
    detail::run_epochs(cfg, n_train, shuffler,
                       [&](const std::vector<std::uint32_t>& order, std::size_t start,
                           std::size_t stop) {
                           std::vector<std::uint32_t> rows(order.begin() + start,
                                                           order.begin() + stop);
                           matrix xb(static_cast<int>(rows.size()), train_x.cols);
                           matrix tb(static_cast<int>(rows.size()), train_y.cols);
                           for (std::size_t i = 0; i < rows.size(); ++i) {
                               const double* xs = train_x.row(static_cast<int>(rows[i]));
                               const double* ts = train_y.row(static_cast<int>(rows[i]));
                               for (int j = 0; j < train_x.cols; ++j)
                                   xb.at(static_cast<int>(i), j) = xs[j];
                               for (int j = 0; j < train_y.cols; ++j)
                                   tb.at(static_cast<int>(i), j) = ts[j];
                           }
                           forward_cache cache;
                           matrix y = forward(res.net, xb, run_mode::train, &cache);
                           matrix dy(y.rows, y.cols);
                           const double scale = 2.0 / (static_cast<double>(y.rows) * dim_scale);
                           for (std::size_t i = 0; i < y.a.size(); ++i) {
                               double diff = y.a[i] - tb.a[i];
                               epoch_sq += diff * diff;
                               dy.a[i] = scale * diff;
                           }
                           network_grads g = backward(res.net, cache, dy);
                           adam_step(res.net, g, opt);
                           if (stop == n_train) {
                               res.epoch_train_mse.push_back(
                                   epoch_sq / (static_cast<double>(n_train) * dim_scale));
                               epoch_sq = 0.0;
                           }
                       });

    matrix final_pred = forward(res.net, train_x, run_mode::infer);
    res.final_train_mse = detail::mean_squared_error(final_pred, train_y);
    if (!std::isfinite(res.final_train_mse))
        throw numeric_error("mlp training diverged at seed " + std::to_string(seed));

    matrix val_pred = forward(res.net, gather_rows(arrays.x, split.val_idx), run_mode::infer);
    for (int i = 0; i < val_pred.rows; ++i)
        for (int j = 0; j < val_pred.cols; ++j)
            val_pred.at(i, j) = res.norm.from_unit(j, val_pred.at(i, j));
    res.val_nmse = compute_segment_nmse(val_pred, gather_rows(arrays.y_phys, split.val_idx));
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline mlp_train_result train_mlp(const dataset& ds, const baseline_config& cfg,
                                  std::uint64_t seed) {
    data_split split = make_split(ds.entries.size(), 0.1, stream_seed(seed, "split"));
    return train_mlp_on_split(ds, cfg, seed, split);
}

struct cnn_train_result {
    cnn_model model;
    response_norm norm;
    data_split split;
    double initial_train_mse = 0.0;
    double final_train_mse = 0.0;
    std::vector<double> epoch_train_mse;  // one row per epoch, normalized units
    nmse_by_segment val_nmse;
    double elapsed_seconds = 0.0;
};

inline std::vector<occupancy_grid> rasterize_dataset(const dataset& ds) {
    std::vector<occupancy_grid> grids;
    grids.reserve(ds.entries.size());
    for (const auto& e : ds.entries)
        grids.push_back(rasterize(decode_design(e.x, ds.geometry)));
    return grids;
}

inline matrix cnn_predict_unit(const cnn_model& m, const std::vector<occupancy_grid>& grids) {
    return cnn_forward(m, grids, nullptr);
}

inline cnn_train_result train_cnn_on_split(const dataset& ds, const baseline_config& cfg,
                                           std::uint64_t seed, const data_split& split) {
    const auto t0 = std::chrono::steady_clock::now();
    cnn_train_result res;
    res.split = split;
    res.norm = compute_response_norm(ds, split.train_idx);
    training_arrays arrays = make_training_arrays(ds, res.norm);
    std::vector<occupancy_grid> grids = rasterize_dataset(ds);

    res.model = make_cnn();
    rng_engine init = make_engine(stream_seed(seed, "cnn-init"));
    init_glorot(res.model, init);
    rng_engine shuffler = make_engine(stream_seed(seed, "cnn-shuffle"));

    std::vector<occupancy_grid> train_grids;
    train_grids.reserve(split.train_idx.size());
    for (std::uint32_t idx : split.train_idx) train_grids.push_back(grids[idx]);
    matrix train_y = gather_rows(arrays.y_unit, split.train_idx);
    res.initial_train_mse =
        detail::mean_squared_error(cnn_predict_unit(res.model, train_grids), train_y);

    cnn_adam_state opt;
    opt.cfg.lr = cfg.lr;
    opt.cfg.weight_decay = cfg.weight_decay;
    const double dim_scale = 303.0;
    const std::size_t n_train = split.train_idx.size();
    double epoch_sq = 0.0;
    detail::run_epochs(cfg, n_train, shuffler,
                       [&](const std::vector<std::uint32_t>& order, std::size_t start,
                           std::size_t stop) {
                           std::vector<occupancy_grid> gb;
                           gb.reserve(stop - start);
                           matrix tb(static_cast<int>(stop - start), train_y.cols);
                           for (std::size_t i = start; i < stop; ++i) {
                               gb.push_back(train_grids[order[i]]);
                               const double* ts = train_y.row(static_cast<int>(order[i]));
                               for (int j = 0; j < train_y.cols; ++j)
                                   tb.at(static_cast<int>(i - start), j) = ts[j];
                           }
                           cnn_cache cache;
                           matrix y = cnn_forward(res.model, gb, &cache);
                           matrix dy(y.rows, y.cols);
                           const double scale = 2.0 / (static_cast<double>(y.rows) * dim_scale);
                           for (std::size_t i = 0; i < y.a.size(); ++i) {
                               double diff = y.a[i] - tb.a[i];
                               epoch_sq += diff * diff;
                               dy.a[i] = scale * diff;
                           }
                           cnn_grads g;
                           cnn_backward(res.model, cache, dy, g);
                           cnn_adam_step(res.model, g, opt);
                           if (stop == n_train) {
                               res.epoch_train_mse.push_back(
                                   epoch_sq / (static_cast<double>(n_train) * dim_scale));
                               epoch_sq = 0.0;
                           }
                       });

    res.final_train_mse =
        detail::mean_squared_error(cnn_predict_unit(res.model, train_grids), train_y);
    if (!std::isfinite(res.final_train_mse))
        throw numeric_error("cnn training diverged at seed " + std::to_string(seed));

    std::vector<occupancy_grid> val_grids;
    for (std::uint32_t idx : split.val_idx) val_grids.push_back(grids[idx]);
    matrix val_pred = cnn_predict_unit(res.model, val_grids);
    for (int i = 0; i < val_pred.rows; ++i)
        for (int j = 0; j < val_pred.cols; ++j)
            val_pred.at(i, j) = res.norm.from_unit(j, val_pred.at(i, j));
    res.val_nmse = compute_segment_nmse(val_pred, gather_rows(arrays.y_phys, split.val_idx));
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline cnn_train_result train_cnn(const dataset& ds, const baseline_config& cfg,
                                  std::uint64_t seed) {
    data_split split = make_split(ds.entries.size(), 0.1, stream_seed(seed, "split"));
    return train_cnn_on_split(ds, cfg, seed, split);
}

// Per-epoch training curve, normalized units.
inline void save_baseline_history_csv(const std::vector<double>& epoch_train_mse,
                                      const std::string& path) {
    std::string out = "epoch,train_mse\n";
    for (std::size_t e = 0; e < epoch_train_mse.size(); ++e) {
        out += std::to_string(e + 1);
        out += ',';
        out += format_double(epoch_train_mse[e]);
        out += '\n';
    }
    write_file(path, out);
}

// ---- three-way benchmark -------------------------------------------------

struct nmse_report {
    std::uint64_t master_seed = 0;
    std::uint64_t dataset_fp = 0;
    std::string oracle_ver;
    std::uint64_t pipeline_fp = 0;  // split + normalization, shared by all models
    nmse_by_segment gan, cnn, mlp, mean_predictor;
    double gan_seconds = 0.0, mlp_seconds = 0.0, cnn_seconds = 0.0;
};

// Trains all three models on the identical split/normalization and reports
// validation NMSE per segment alongside the mean-predictor floor.
inline nmse_report benchmark_models(const dataset& ds, const gan_config& gan_cfg,
                                    const baseline_config& mlp_cfg,
                                    const baseline_config& cnn_cfg, std::uint64_t seed,
                                    gan_train_result* gan_out = nullptr) {
    nmse_report rep;
    rep.master_seed = seed;
    rep.dataset_fp = dataset_fingerprint(ds);
    rep.oracle_ver = ds.oracle_ver;
    data_split split = make_split(ds.entries.size(), gan_cfg.val_fraction,
                                  stream_seed(seed, "split"));

    gan_train_result g = train_gan_on_split(ds, gan_cfg, seed, split);
    rep.gan = g.final_val_nmse;
    rep.gan_seconds = g.elapsed_seconds;
    rep.pipeline_fp = pipeline_fingerprint(split, g.norm);

    mlp_train_result m = train_mlp_on_split(ds, mlp_cfg, seed, split);
    rep.mlp = m.val_nmse;
    rep.mlp_seconds = m.elapsed_seconds;
    if (pipeline_fingerprint(m.split, m.norm) != rep.pipeline_fp)
        throw numeric_error("benchmark: mlp pipeline diverged from the shared split");

    cnn_train_result c = train_cnn_on_split(ds, cnn_cfg, seed, split);
    rep.cnn = c.val_nmse;
    rep.cnn_seconds = c.elapsed_seconds;
    if (pipeline_fingerprint(c.split, c.norm) != rep.pipeline_fp)
        throw numeric_error("benchmark: cnn pipeline diverged from the shared split");

    training_arrays arrays = make_training_arrays(ds, g.norm);
    rep.mean_predictor = mean_predictor_nmse(arrays, split);
    if (gan_out) *gan_out = std::move(g);
    return rep;
}

}  // namespace fpc
