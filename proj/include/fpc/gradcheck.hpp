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
// Central-difference gradient verification. A fixed random subset of the
// parameters is probed with step h and compared against analytic gradients
// under relative error |a - fd| / max(|a|, |fd|, floor). Batch-norm layers
// run in training mode with running statistics frozen, so the finite
// difference sees exactly the function the backward pass differentiates.
//
// The networks are piecewise linear through leaky_relu and max pooling, and
// with thousands of hidden activations some pre-activation always sits within
// O(h) of a kink. A probe whose +-h evaluations land on different linear
// pieces measures a chord across the kink, not the one-sided derivative the
// backward pass defines, so such probes are rejected and redrawn: each loss
// evaluation reports a fingerprint of its activation pattern (leaky signs and
// pooling argmaxes) and a probe only counts when all three evaluations agree.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/conv.hpp"
#include "fpc/nn.hpp"

namespace fpc {

struct param_ref {
    double* p = nullptr;
    std::size_t n = 0;
};

inline std::vector<param_ref> collect_params(network& net) {
    std::vector<param_ref> refs;
    for (auto& blk : net.blocks) {
        refs.push_back({blk.fc.w.a.data(), blk.fc.w.a.size()});
        refs.push_back({blk.fc.b.data(), blk.fc.b.size()});
        if (blk.has_bn) {
            refs.push_back({blk.bn.gamma.data(), blk.bn.gamma.size()});
            refs.push_back({blk.bn.beta.data(), blk.bn.beta.size()});
        }
    }
    return refs;
}

inline std::vector<param_ref> collect_params(cnn_model& m) {
    return {{m.c1.w.data(), m.c1.w.size()},   {m.c1.b.data(), m.c1.b.size()},
            {m.c2.w.data(), m.c2.w.size()},   {m.c2.b.data(), m.c2.b.size()},
            {m.f1.w.a.data(), m.f1.w.a.size()}, {m.f1.b.data(), m.f1.b.size()},
            {m.f2.w.a.data(), m.f2.w.a.size()}, {m.f2.b.data(), m.f2.b.size()}};
}

// Flattened analytic gradients in the same order as collect_params.
inline std::vector<double> flatten_grads(const network& net, const network_grads& g) {
    std::vector<double> out;
    for (std::size_t i = 0; i < net.blocks.size(); ++i) {
        const auto& bg = g.blocks[i];
        out.insert(out.end(), bg.dw.a.begin(), bg.dw.a.end());
        out.insert(out.end(), bg.db.begin(), bg.db.end());
        if (net.blocks[i].has_bn) {
            out.insert(out.end(), bg.dgamma.begin(), bg.dgamma.end());
            out.insert(out.end(), bg.dbeta.begin(), bg.dbeta.end());
        }
    }
    return out;
}

inline std::vector<double> flatten_grads(const cnn_grads& g) {
    std::vector<double> out;
    out.insert(out.end(), g.dw1.begin(), g.dw1.end());
    out.insert(out.end(), g.db1.begin(), g.db1.end());
    out.insert(out.end(), g.dw2.begin(), g.dw2.end());
    out.insert(out.end(), g.db2.begin(), g.db2.end());
    out.insert(out.end(), g.dwf1.a.begin(), g.dwf1.a.end());
    out.insert(out.end(), g.dbf1.begin(), g.dbf1.end());
    out.insert(out.end(), g.dwf2.a.begin(), g.dwf2.a.end());
    out.insert(out.end(), g.dbf2.begin(), g.dbf2.end());
    return out;
}

struct gradcheck_options {
    int probes = 100;
    double h = 1e-4;
    double tol = 1e-4;
    double rel_floor = 1e-6;
    std::uint64_t seed = 7;
};

struct gradcheck_result {
    bool passed = false;
    int probes = 0;
    int failures = 0;
    int kink_skips = 0;  // probes redrawn because +-h crossed a linear piece
    double max_rel_err = 0.0;
    std::size_t worst_param = 0;
    double worst_analytic = 0.0, worst_fd = 0.0;
};

// loss_piece evaluates the scalar objective with the parameters as currently
// stored and reports a fingerprint of the activation pattern it traversed.
// It is called at the centre once per probe and twice more with one scalar
// displaced by +-h; a probe only counts when all three fingerprints match.
inline gradcheck_result run_gradcheck(
    const std::vector<param_ref>& params, const std::vector<double>& analytic,
    const std::function<std::pair<double, std::uint64_t>()>& loss_piece,
    const gradcheck_options& opt = {}) {
    std::size_t total = 0;
    for (const auto& r : params) total += r.n;
    if (analytic.size() != total)
        throw usage_error("run_gradcheck: analytic gradient size mismatch");
    rng_engine eng = make_engine(stream_seed(opt.seed, "probe"));
    gradcheck_result res;
    const std::uint64_t piece0 = loss_piece().second;  // unperturbed pattern
    const int max_draws = opt.probes * 50;
    int accepted = 0;
    for (int draw = 0; accepted < opt.probes && draw < max_draws; ++draw) {
        std::size_t flat = uniform_below(eng, total);
        std::size_t idx = flat, ri = 0;
        while (idx >= params[ri].n) {
            idx -= params[ri].n;
            ++ri;
        }
        double* slot = params[ri].p + idx;
        const double saved = *slot;
        *slot = saved + opt.h;
        const auto [lp, piece_p] = loss_piece();
        *slot = saved - opt.h;
        const auto [lm, piece_m] = loss_piece();
        *slot = saved;
        if (piece_p != piece0 || piece_m != piece0) {
            ++res.kink_skips;
            continue;
        }
        ++accepted;
        const double fd = (lp - lm) / (2.0 * opt.h);
        const double a = analytic[flat];
        const double rel = std::fabs(a - fd) /
                           std::max(std::max(std::fabs(a), std::fabs(fd)), opt.rel_floor);
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst_param = flat;
            res.worst_analytic = a;
            res.worst_fd = fd;
        }
        if (rel > opt.tol) ++res.failures;
    }
    res.probes = accepted;
    res.passed = accepted == opt.probes && res.failures == 0;
    return res;
}

// Piece-oblivious overload for smooth objectives.
inline gradcheck_result run_gradcheck(const std::vector<param_ref>& params,
                                      const std::vector<double>& analytic,
                                      const std::function<double()>& loss,
                                      const gradcheck_options& opt = {}) {
    return run_gradcheck(
        params, analytic,
        std::function<std::pair<double, std::uint64_t>()>(
            [&loss]() { return std::pair<double, std::uint64_t>(loss(), 0u); }),
        opt);
}

// ---- architecture drivers -----------------------------------------------
//
// Each driver builds the architecture with seeded weights, draws a fixed
// synthetic batch, computes analytic gradients of
//   L = 1/(2B) * sum (y - t)^2
// and probes them. corrupt_scale != 1 scales the analytic gradient before
// checking, which must make the check fail (self-test hook).

namespace detail {

inline void hash_piece(std::uint64_t& fp, std::uint64_t token) {
    fp = (fp ^ token) * 1099511628211ull;
}

// Linear-piece fingerprint of a dense forward: the sign of every leaky_relu
// input. Identity and sigmoid heads are smooth and contribute nothing. The
// cache stores the activation input in pre for batch-norm blocks and leaves
// it aliased to z otherwise.
inline std::uint64_t leaky_pattern(const network& net, const forward_cache& cache) {
    std::uint64_t fp = 1469598103934665603ull;
    for (std::size_t b = 0; b < net.blocks.size(); ++b) {
        if (net.blocks[b].act != activation::leaky_relu) continue;
        const matrix& act_in = net.blocks[b].has_bn ? cache.blocks[b].pre : cache.blocks[b].z;
        for (double v : act_in.a) hash_piece(fp, v > 0.0 ? 2u : 1u);
    }
    return fp;
}

inline std::uint64_t cnn_pattern(const cnn_cache& cache) {
    std::uint64_t fp = 1469598103934665603ull;
    for (const auto& sc : cache.samples) {
        for (double v : sc.z1) hash_piece(fp, v > 0.0 ? 2u : 1u);
        for (std::uint8_t a : sc.arg1) hash_piece(fp, 4u + a);
        for (double v : sc.z2) hash_piece(fp, v > 0.0 ? 2u : 1u);
        for (std::uint8_t a : sc.arg2) hash_piece(fp, 4u + a);
    }
    // dense tail: block 0 is leaky_relu (no bn, so z feeds it), block 1 is
    // the identity head
    if (!cache.fc.blocks.empty())
        for (double v : cache.fc.blocks[0].z.a) hash_piece(fp, v > 0.0 ? 2u : 1u);
    return fp;
}

inline gradcheck_result gradcheck_dense_net(network& net, int batch,
                                            std::uint64_t seed, double corrupt_scale,
                                            bool targets_unit_interval) {
    rng_engine init = make_engine(stream_seed(seed, "init"));
    init_glorot(net, init);
    rng_engine data = make_engine(stream_seed(seed, "data"));
    matrix x(batch, net.in_dim()), t(batch, net.out_dim());
    for (double& v : x.a) v = uniform_range(data, -1.0, 1.0);
    for (double& v : t.a)
        v = targets_unit_interval ? 0.25 + 0.5 * uniform01(data) : uniform_range(data, -1.0, 1.0);
    const double bsz = static_cast<double>(batch);

    forward_cache cache;
    matrix y = forward(net, x, run_mode::train, &cache, /*update_running=*/false);
    matrix dy(y.rows, y.cols);
    for (std::size_t i = 0; i < y.a.size(); ++i) dy.a[i] = (y.a[i] - t.a[i]) / bsz;
    network_grads g = backward(net, cache, dy);
    std::vector<double> flat = flatten_grads(net, g);
    if (corrupt_scale != 1.0)
        for (double& v : flat) v *= corrupt_scale;

    auto loss_piece = [&net, &x, &t, bsz]() {
        forward_cache c2;
        matrix y2 = forward(net, x, run_mode::train, &c2, false);
        double l = 0.0;
        for (std::size_t i = 0; i < y2.a.size(); ++i) {
            double d = y2.a[i] - t.a[i];
            l += d * d;
        }
        return std::pair<double, std::uint64_t>(l / (2.0 * bsz), leaky_pattern(net, c2));
    };
    gradcheck_options opt;
    opt.seed = seed;
    auto params = collect_params(net);
    return run_gradcheck(params, flat,
                         std::function<std::pair<double, std::uint64_t>()>(loss_piece), opt);
}

}  // namespace detail

// arch is one of: gan-gen, gan-critic, mlp, cnn.
inline gradcheck_result gradcheck_arch(const std::string& arch, std::uint64_t seed,
                                       double corrupt_scale = 1.0) {
    const int batch = 4;
    if (arch == "gan-gen") {
        network net = build_generator();
        return detail::gradcheck_dense_net(net, batch, seed, corrupt_scale, false);
    }
    if (arch == "gan-critic") {
        network net = build_critic(true);
        return detail::gradcheck_dense_net(net, batch, seed, corrupt_scale, true);
    }
    if (arch == "mlp") {
        network net = build_mlp_baseline();
        return detail::gradcheck_dense_net(net, batch, seed, corrupt_scale, false);
    }
    if (arch == "cnn") {
        cnn_model m = make_cnn();
        rng_engine init = make_engine(stream_seed(seed, "init"));
        init_glorot(m, init);
        rng_engine data = make_engine(stream_seed(seed, "data"));
        std::vector<occupancy_grid> grids(batch);
        for (auto& g : grids) {
            g.cells.assign(static_cast<std::size_t>(cnn_model::input_res) * cnn_model::input_res,
                           0);
            for (auto& c : g.cells) c = uniform01(data) < 0.2 ? 1 : 0;
        }
        matrix t(batch, 303);
        for (double& v : t.a) v = uniform_range(data, -1.0, 1.0);
        const double bsz = static_cast<double>(batch);

        cnn_cache cache;
        matrix y = cnn_forward(m, grids, &cache);
        matrix dy(y.rows, y.cols);
        for (std::size_t i = 0; i < y.a.size(); ++i) dy.a[i] = (y.a[i] - t.a[i]) / bsz;
        cnn_grads g;
        cnn_backward(m, cache, dy, g);
        std::vector<double> flat = flatten_grads(g);
        if (corrupt_scale != 1.0)
            for (double& v : flat) v *= corrupt_scale;

        auto loss_piece = [&m, &grids, &t, bsz]() {
            cnn_cache c2;
            matrix y2 = cnn_forward(m, grids, &c2);
            double l = 0.0;
            for (std::size_t i = 0; i < y2.a.size(); ++i) {
                double d = y2.a[i] - t.a[i];
                l += d * d;
            }
            return std::pair<double, std::uint64_t>(l / (2.0 * bsz), detail::cnn_pattern(c2));
        };
        gradcheck_options opt;
        opt.seed = seed;
        auto params = collect_params(m);
        return run_gradcheck(params, flat,
                             std::function<std::pair<double, std::uint64_t>()>(loss_piece),
                             opt);
    }
    throw usage_error("unknown gradcheck architecture: " + arch);
}

}  // namespace fpc
