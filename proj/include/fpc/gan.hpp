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
// Conditional GAN surrogate training. The generator maps noise plus a
// normalized design vector to a normalized response; the critic scores
// response/design pairs. Non-saturating losses:
//   L_critic = -mean log s(real) - mean log(1 - s(fake))
//   L_gen    = -mean log s(fake)
// with probabilities clamped at 1e-12 inside the logs and their gradients.
// All randomness comes from named substreams of one master seed, so a rerun
// with the same seed reproduces the run bit for bit.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/dataset.hpp"
#include "fpc/nn.hpp"

namespace fpc {

inline constexpr double prob_floor = 1e-12;

enum class noise_policy : std::uint8_t { fixed_zero = 0, average = 1 };

struct gan_config {
    long long iterations = 10000;
    int batch_size = 16;
    double lr = 5e-4;
    double weight_decay = 0.01;
    bool wd_clip_mode = false;       // clamp-to-band reading of the decay constant
    double bn_momentum = 0.8;
    bool conditional_critic = true;
    int critic_steps_per_gen_step = 1;
    noise_policy predict_policy = noise_policy::average;
    int noise_draws = 8;
    long long snapshot_every = 250;  // validation NMSE cadence in history rows
    double val_fraction = 0.1;
};

// ---- response metrics ----------------------------------------------------

struct nmse_by_segment {
    double ar = 0.0, rl = 0.0, gain = 0.0;
    double total() const { return ar + rl + gain; }
};

// NMSE per response segment in physical units: sum of squared errors over
// the evaluation set divided by the summed squared truth of that segment.
inline nmse_by_segment compute_segment_nmse(const matrix& pred, const matrix& truth) {
    if (!pred.same_shape(const_cast<matrix&>(truth)) || pred.cols != response_dim)
        throw usage_error("compute_segment_nmse: shape mismatch");
    double num[3] = {0.0, 0.0, 0.0}, den[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < pred.rows; ++i) {
        const double* p = pred.row(i);
        const double* t = truth.row(i);
        for (int j = 0; j < response_dim; ++j) {
            int seg = j / response_points;
            double d = p[j] - t[j];
            num[seg] += d * d;
            den[seg] += t[j] * t[j];
        }
    }
    nmse_by_segment r;
    r.ar = den[0] > 0.0 ? num[0] / den[0] : 0.0;
    r.rl = den[1] > 0.0 ? num[1] / den[1] : 0.0;
    r.gain = den[2] > 0.0 ? num[2] / den[2] : 0.0;
    return r;
}

// ---- tensors from a dataset ---------------------------------------------

struct training_arrays {
    matrix x;       // [n x 72] designs scaled by 1/side into [0, 1]
    matrix y_unit;  // [n x 303] responses mapped to [-1, 1] by the norm
    matrix y_phys;  // [n x 303] raw responses
};

inline training_arrays make_training_arrays(const dataset& ds, const response_norm& norm) {
    training_arrays t;
    const int n = static_cast<int>(ds.entries.size());
    t.x.resize(n, design_dim);
    t.y_unit.resize(n, response_dim);
    t.y_phys.resize(n, response_dim);
    for (int i = 0; i < n; ++i) {
        design_vector nx = normalize_design(ds.entries[static_cast<std::size_t>(i)].x,
                                            ds.geometry);
        for (int j = 0; j < design_dim; ++j) t.x.at(i, j) = nx[static_cast<std::size_t>(j)];
        const auto& y = ds.entries[static_cast<std::size_t>(i)].y;
        for (int j = 0; j < response_dim; ++j) {
            t.y_phys.at(i, j) = y[static_cast<std::size_t>(j)];
            t.y_unit.at(i, j) = norm.to_unit(j, y[static_cast<std::size_t>(j)]);
        }
    }
    return t;
}

inline matrix gather_rows(const matrix& src, const std::vector<std::uint32_t>& idx) {
    matrix out(static_cast<int>(idx.size()), src.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* s = src.row(static_cast<int>(idx[i]));
        double* d = out.row(static_cast<int>(i));
        for (int j = 0; j < src.cols; ++j) d[j] = s[j];
    }
    return out;
}

// ---- prediction ----------------------------------------------------------

// Surrogate prediction in normalized units. fixed_zero feeds a zero noise
// vector; average feeds `draws` noise batches (drawn whole-batch at a time
// from the engine, draw-major) and averages the outputs.
inline matrix generator_predict(network& gen, const matrix& designs, noise_policy policy,
                                int draws, rng_engine& noise_eng) {
    const int m = designs.rows;
    const int total_in = gen.in_dim();
    const int nz = total_in - designs.cols;
    matrix acc(m, gen.out_dim());
    const int reps = policy == noise_policy::fixed_zero ? 1 : draws;
    for (int rep = 0; rep < reps; ++rep) {
        matrix in(m, total_in);
        for (int i = 0; i < m; ++i) {
            double* r = in.row(i);
            for (int j = 0; j < nz; ++j)
                r[j] = policy == noise_policy::fixed_zero ? 0.0 : normal01(noise_eng);
            const double* d = designs.row(i);
            for (int j = 0; j < designs.cols; ++j) r[nz + j] = d[j];
        }
        matrix out = forward(gen, in, run_mode::infer);
        for (std::size_t k = 0; k < acc.a.size(); ++k) acc.a[k] += out.a[k];
    }
    for (double& v : acc.a) v /= reps;
    return acc;
}

// Physical-unit prediction for a set of raw designs.
inline matrix predict_physical(network& gen, const response_norm& norm, const matrix& designs_unit,
                               noise_policy policy, int draws, rng_engine& noise_eng) {
    matrix unit = generator_predict(gen, designs_unit, policy, draws, noise_eng);
    for (int i = 0; i < unit.rows; ++i) {
        double* r = unit.row(i);
        for (int j = 0; j < unit.cols; ++j) r[j] = norm.from_unit(j, r[j]);
    }
    return unit;
}

// Critic probability for response/design pairs (normalized units).
inline std::vector<double> critic_score(network& critic, const matrix& responses,
                                        const matrix& designs, bool conditional) {
    matrix in(responses.rows, responses.cols + (conditional ? designs.cols : 0));
    for (int i = 0; i < responses.rows; ++i) {
        double* r = in.row(i);
        const double* y = responses.row(i);
        for (int j = 0; j < responses.cols; ++j) r[j] = y[j];
        if (conditional) {
            const double* d = designs.row(i);
            for (int j = 0; j < designs.cols; ++j) r[responses.cols + j] = d[j];
        }
    }
    matrix s = forward(critic, in, run_mode::infer);
    std::vector<double> out(static_cast<std::size_t>(s.rows));
    for (int i = 0; i < s.rows; ++i) out[static_cast<std::size_t>(i)] = s.at(i, 0);
    return out;
}

// ---- training ------------------------------------------------------------

struct history_row {
    long long iter = 0;
    double gen_loss = 0.0, critic_loss = 0.0;
    std::optional<double> val_ar, val_rl, val_gain;
};

struct training_history {
    std::uint64_t split_fingerprint = 0;
    std::vector<history_row> rows;
    std::vector<std::uint32_t> train_use_count;  // per dataset index, validation rows stay 0
};

struct gan_train_result {
    network generator;
    network critic;
    response_norm norm;
    data_split split;
    training_history history;
    nmse_by_segment final_val_nmse;
    double elapsed_seconds = 0.0;
};

namespace detail {

// One adversarial iteration on explicit batches; exposed for tests.
struct gan_step_losses {
    double critic_loss = 0.0, gen_loss = 0.0;
};

inline matrix assemble_critic_input(const network& critic, const gan_config& cfg,
                                    const matrix& y, const matrix& x) {
    matrix in(y.rows, critic.in_dim());
    for (int i = 0; i < y.rows; ++i) {
        double* r = in.row(i);
        const double* yr = y.row(i);
        for (int j = 0; j < y.cols; ++j) r[j] = yr[j];
        if (cfg.conditional_critic) {
            const double* d = x.row(i);
            for (int j = 0; j < x.cols; ++j) r[y.cols + j] = d[j];
        }
    }
    return in;
}

// Critic update on one real batch plus generator fakes. Fakes come from the
// generator in inference mode, so this phase never touches generator batch
// statistics.
inline double critic_phase(network& gen, network& critic, const gan_config& cfg,
                           const matrix& real_y, const matrix& real_x, rng_engine& noise_eng,
                           adam_state& opt_critic) {
    const int bsz = real_y.rows;
    const int nz = gen.in_dim() - real_x.cols;
    matrix gen_in(bsz, gen.in_dim());
    for (int i = 0; i < bsz; ++i) {
        double* r = gen_in.row(i);
        for (int j = 0; j < nz; ++j) r[j] = normal01(noise_eng);
        const double* d = real_x.row(i);
        for (int j = 0; j < real_x.cols; ++j) r[nz + j] = d[j];
    }
    matrix fake_y = forward(gen, gen_in, run_mode::infer);

    forward_cache c_real, c_fake;
    matrix s_real = forward(critic, assemble_critic_input(critic, cfg, real_y, real_x),
                            run_mode::train, &c_real);
    matrix s_fake = forward(critic, assemble_critic_input(critic, cfg, fake_y, real_x),
                            run_mode::train, &c_fake);

    double loss_real = 0.0, loss_fake = 0.0;
    matrix d_real(bsz, 1), d_fake(bsz, 1);
    for (int i = 0; i < bsz; ++i) {
        double sr = std::max(s_real.at(i, 0), prob_floor);
        double sf = std::max(1.0 - s_fake.at(i, 0), prob_floor);
        loss_real -= std::log(sr) / bsz;
        loss_fake -= std::log(sf) / bsz;
        d_real.at(i, 0) = -1.0 / (bsz * sr);
        d_fake.at(i, 0) = 1.0 / (bsz * sf);
    }
    network_grads g_real = backward(critic, c_real, d_real);
    network_grads g_fake = backward(critic, c_fake, d_fake);
    add_grads(g_real, g_fake);
    adam_step(critic, g_real, opt_critic);
    return loss_real + loss_fake;
}

// Generator update with the critic held constant; fresh noise, training-mode
// forward updates the generator running statistics once per call.
inline double generator_phase(network& gen, network& critic, const gan_config& cfg,
                              const matrix& real_x, rng_engine& noise_eng,
                              adam_state& opt_gen) {
    const int bsz = real_x.rows;
    const int nz = gen.in_dim() - real_x.cols;
    matrix gen_in(bsz, gen.in_dim());
    for (int i = 0; i < bsz; ++i) {
        double* r = gen_in.row(i);
        for (int j = 0; j < nz; ++j) r[j] = normal01(noise_eng);
        const double* d = real_x.row(i);
        for (int j = 0; j < real_x.cols; ++j) r[nz + j] = d[j];
    }
    forward_cache c_gen;
    matrix fake = forward(gen, gen_in, run_mode::train, &c_gen, /*update_running=*/true);
    forward_cache c_crit;
    matrix s = forward(critic, assemble_critic_input(critic, cfg, fake, real_x),
                       run_mode::train, &c_crit);
    double gen_loss = 0.0;
    matrix ds(bsz, 1);
    for (int i = 0; i < bsz; ++i) {
        double si = std::max(s.at(i, 0), prob_floor);
        gen_loss -= std::log(si) / bsz;
        ds.at(i, 0) = -1.0 / (bsz * si);
    }
    matrix d_critic_in;
    backward(critic, c_crit, ds, &d_critic_in);  // critic params untouched here
    matrix d_fake(bsz, fake.cols);
    for (int i = 0; i < bsz; ++i) {
        const double* src = d_critic_in.row(i);
        double* d = d_fake.row(i);
        for (int j = 0; j < fake.cols; ++j) d[j] = src[j];
    }
    network_grads g_gen = backward(gen, c_gen, d_fake);
    adam_step(gen, g_gen, opt_gen);
    return gen_loss;
}

inline gan_step_losses gan_train_step(network& gen, network& critic, const gan_config& cfg,
                                      const matrix& real_y, const matrix& real_x,
                                      rng_engine& noise_eng, adam_state& opt_gen,
                                      adam_state& opt_critic) {
    gan_step_losses losses;
    losses.critic_loss = critic_phase(gen, critic, cfg, real_y, real_x, noise_eng, opt_critic);
    losses.gen_loss = generator_phase(gen, critic, cfg, real_x, noise_eng, opt_gen);
    return losses;
}

}  // namespace detail

// Train on an explicit train/validation index split (the cross-validation
// entry point). Normalization is fit on the training rows only.
inline gan_train_result train_gan_on_split(const dataset& ds, const gan_config& cfg,
                                           std::uint64_t seed, const data_split& split) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(ds.entries.size());
    if (n == 0) throw usage_error("train_gan: empty dataset");
    if (n < 2 * cfg.batch_size)
        throw usage_error("train_gan: dataset must hold at least twice the batch size (" +
                          std::to_string(2 * cfg.batch_size) + " entries)");
    if (cfg.critic_steps_per_gen_step < 1 || cfg.batch_size < 2 || cfg.iterations < 1)
        throw usage_error("train_gan: configuration values must be positive");

    gan_train_result res;
    res.split = split;
    res.norm = compute_response_norm(ds, split.train_idx);
    training_arrays arrays = make_training_arrays(ds, res.norm);

    res.generator = build_generator();
    res.critic = build_critic(cfg.conditional_critic);
    for (auto& blk : res.generator.blocks)
        if (blk.has_bn) blk.bn.momentum = cfg.bn_momentum;
    rng_engine init_gen = make_engine(stream_seed(seed, "init-gen"));
    rng_engine init_critic = make_engine(stream_seed(seed, "init-critic"));
    init_glorot(res.generator, init_gen);
    init_glorot(res.critic, init_critic);

    rng_engine batcher = make_engine(stream_seed(seed, "batch"));
    rng_engine noise = make_engine(stream_seed(seed, "noise"));
    rng_engine val_probe = make_engine(stream_seed(seed, "val-probe"));

    adam_state opt_gen, opt_critic;
    opt_gen.cfg.lr = cfg.lr;
    opt_gen.cfg.weight_decay = cfg.weight_decay;
    opt_gen.cfg.clip_mode = cfg.wd_clip_mode;
    opt_critic.cfg = opt_gen.cfg;

    res.history.split_fingerprint = pipeline_fingerprint(split, res.norm);
    res.history.rows.reserve(static_cast<std::size_t>(cfg.iterations));
    res.history.train_use_count.assign(static_cast<std::size_t>(n), 0);

    const std::uint64_t n_train = split.train_idx.size();
    matrix val_x = gather_rows(arrays.x, split.val_idx);
    matrix val_truth = gather_rows(arrays.y_phys, split.val_idx);

    std::vector<std::uint32_t> batch_idx(static_cast<std::size_t>(cfg.batch_size));
    for (long long it = 1; it <= cfg.iterations; ++it) {
        detail::gan_step_losses losses;
        matrix real_x;
        for (int cs = 0; cs < cfg.critic_steps_per_gen_step; ++cs) {
            for (auto& bi : batch_idx) {
                bi = split.train_idx[static_cast<std::size_t>(uniform_below(batcher, n_train))];
                ++res.history.train_use_count[bi];
            }
            matrix real_y = gather_rows(arrays.y_unit, batch_idx);
            real_x = gather_rows(arrays.x, batch_idx);
            losses.critic_loss = detail::critic_phase(res.generator, res.critic, cfg, real_y,
                                                      real_x, noise, opt_critic);
        }
        losses.gen_loss = detail::generator_phase(res.generator, res.critic, cfg, real_x,
                                                  noise, opt_gen);
        if (!std::isfinite(losses.critic_loss) || !std::isfinite(losses.gen_loss))
            throw numeric_error("gan training diverged: non-finite loss at seed " +
                                std::to_string(seed) + ", iteration " + std::to_string(it));
        history_row row;
        row.iter = it;
        row.gen_loss = losses.gen_loss;
        row.critic_loss = losses.critic_loss;
        if (cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0 && val_x.rows > 0) {
            matrix pred = predict_physical(res.generator, res.norm, val_x, cfg.predict_policy,
                                           cfg.noise_draws, val_probe);
            nmse_by_segment v = compute_segment_nmse(pred, val_truth);
            row.val_ar = v.ar;
            row.val_rl = v.rl;
            row.val_gain = v.gain;
        }
        res.history.rows.push_back(row);
    }

    if (val_x.rows > 0) {
        rng_engine final_probe = make_engine(stream_seed(seed, "final-probe"));
        matrix pred = predict_physical(res.generator, res.norm, val_x, cfg.predict_policy,
                                       cfg.noise_draws, final_probe);
        res.final_val_nmse = compute_segment_nmse(pred, val_truth);
    }
    res.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// Standard entry point: seeded 90/10 split, last tenth of the shuffle held
// out for validation.
inline gan_train_result train_gan(const dataset& ds, const gan_config& cfg, std::uint64_t seed) {
    data_split split = make_split(ds.entries.size(), cfg.val_fraction, stream_seed(seed, "split"));
    return train_gan_on_split(ds, cfg, seed, split);
}

// ---- cross-validation ----------------------------------------------------

struct cv_result {
    std::vector<nmse_by_segment> folds;
    nmse_by_segment mean;
};

// k-fold cross-validation with fold-local normalization. Each fold trains
// from scratch with its own child seed.
inline cv_result cross_validate(const dataset& ds, const gan_config& cfg, std::uint64_t seed,
                                int k = 10) {
    auto folds = make_folds(ds.entries.size(), k, stream_seed(seed, "cv-shuffle"));
    cv_result res;
    for (int f = 0; f < k; ++f) {
        gan_train_result r =
            train_gan_on_split(ds, cfg, child_seed(seed, static_cast<std::uint64_t>(f)),
                               folds[static_cast<std::size_t>(f)]);
        res.folds.push_back(r.final_val_nmse);
        res.mean.ar += r.final_val_nmse.ar / k;
        res.mean.rl += r.final_val_nmse.rl / k;
        res.mean.gain += r.final_val_nmse.gain / k;
    }
    return res;
}

// ---- history serialization ----------------------------------------------

inline std::string history_csv_header() {
    return "iter,gen_loss,critic_loss,val_nmse_ar,val_nmse_rl,val_nmse_gain";
}

inline void save_history_csv(const training_history& h, const std::string& path) {
    std::string out = history_csv_header() + "\n";
    for (const auto& r : h.rows) {
        out += std::to_string(r.iter);
        out += ',';
        out += format_double(r.gen_loss);
        out += ',';
        out += format_double(r.critic_loss);
        out += ',';
        if (r.val_ar) out += format_double(*r.val_ar);
        out += ',';
        if (r.val_rl) out += format_double(*r.val_rl);
        out += ',';
        if (r.val_gain) out += format_double(*r.val_gain);
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace fpc
