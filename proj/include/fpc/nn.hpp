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
// Dense feed-forward networks in 64-bit floats with exact analytic backward
// passes (batch-norm batch statistics included) and Adam with decoupled
// weight decay. Every reduction accumulates in ascending index order, the
// same order on every run; kernels are shaped so the compiler vectorizes the
// independent-element inner loops without reassociating sums.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpc/common.hpp"

namespace fpc {

struct matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    matrix() = default;
    matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    void resize(int r, int c) {
        rows = r;
        cols = c;
        a.assign(static_cast<std::size_t>(r) * c, 0.0);
    }
    bool same_shape(const matrix& o) const { return rows == o.rows && cols == o.cols; }
};

enum class activation : std::uint8_t { identity = 0, leaky_relu = 1, sigmoid = 2 };

inline constexpr double leaky_slope = 0.2;

inline double apply_activation(activation act, double v) {
    switch (act) {
        case activation::identity: return v;
        case activation::leaky_relu: return v > 0.0 ? v : leaky_slope * v;
        case activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
    }
    return v;
}

struct dense_layer {
    int in = 0, out = 0;
    matrix w;               // [in x out]
    std::vector<double> b;  // [out]
};

struct batch_norm {
    int dim = 0;
    std::vector<double> gamma, beta;        // learned
    std::vector<double> run_mean, run_var;  // inference statistics
    double momentum = 0.8;                  // running <- m*running + (1-m)*batch
    double eps = 1e-5;
};

struct layer_block {
    dense_layer fc;
    bool has_bn = false;
    batch_norm bn;
    activation act = activation::identity;
};

struct network {
    std::vector<layer_block> blocks;

    int in_dim() const { return blocks.empty() ? 0 : blocks.front().fc.in; }
    int out_dim() const { return blocks.empty() ? 0 : blocks.back().fc.out; }

    std::uint64_t param_count() const {
        std::uint64_t n = 0;
        for (const auto& blk : blocks) {
            n += static_cast<std::uint64_t>(blk.fc.in) * blk.fc.out + blk.fc.out;
            if (blk.has_bn) n += 2ull * blk.bn.dim;
        }
        return n;
    }
};

// Build a block list from layer widths; bn[i] marks batch norm after the
// i-th dense layer (before its activation).
inline network make_network(const std::vector<int>& dims,
                            const std::vector<activation>& acts,
                            const std::vector<bool>& bn_flags) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1 || bn_flags.size() != dims.size() - 1)
        throw usage_error("make_network: inconsistent layer specification");
    network net;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        layer_block blk;
        blk.fc.in = dims[i];
        blk.fc.out = dims[i + 1];
        blk.fc.w.resize(dims[i], dims[i + 1]);
        blk.fc.b.assign(dims[i + 1], 0.0);
        blk.act = acts[i];
        blk.has_bn = bn_flags[i];
        if (blk.has_bn) {
            blk.bn.dim = dims[i + 1];
            blk.bn.gamma.assign(blk.bn.dim, 1.0);
            blk.bn.beta.assign(blk.bn.dim, 0.0);
            blk.bn.run_mean.assign(blk.bn.dim, 0.0);
            blk.bn.run_var.assign(blk.bn.dim, 1.0);
        }
        net.blocks.push_back(std::move(blk));
    }
    return net;
}

// Glorot-uniform weights drawn in declaration order (weights row-major),
// zero biases, unit gamma, zero beta, running stats at (0, 1).
inline void init_glorot(network& net, rng_engine& eng) {
    for (auto& blk : net.blocks) {
        double a = std::sqrt(6.0 / (blk.fc.in + blk.fc.out));
        for (double& w : blk.fc.w.a) w = uniform_range(eng, -a, a);
        for (double& b : blk.fc.b) b = 0.0;
        if (blk.has_bn) {
            for (double& g : blk.bn.gamma) g = 1.0;
            for (double& b : blk.bn.beta) b = 0.0;
            for (double& m : blk.bn.run_mean) m = 0.0;
            for (double& v : blk.bn.run_var) v = 1.0;
        }
    }
}

enum class run_mode : std::uint8_t { train = 0, infer = 1 };

struct block_cache {
    matrix x;     // dense input
    matrix z;     // dense output (pre-norm)
    matrix xhat;  // normalized activations (bn only)
    std::vector<double> mean, var;  // batch statistics (bn only)
    matrix pre;   // activation input (z or bn output)
    matrix y;     // block output
};

struct forward_cache {
    run_mode mode = run_mode::train;
    std::vector<block_cache> blocks;
};

namespace kernels {

// C[b,:] = bias + sum_k X[b,k] * W[k,:], k ascending per output element.
inline void dense_forward(const matrix& x, const dense_layer& fc, matrix& z) {
    z.resize(x.rows, fc.out);
    for (int b = 0; b < x.rows; ++b) {
        double* zr = z.row(b);
        for (int n = 0; n < fc.out; ++n) zr[n] = fc.b[n];
        const double* xr = x.row(b);
        for (int k = 0; k < fc.in; ++k) {
            const double s = xr[k];
            const double* wr = fc.w.row(k);
            for (int n = 0; n < fc.out; ++n) zr[n] += s * wr[n];
        }
    }
}

// dW = X^T dZ (batch index ascending), db = column sums, dX = dZ W^T.
inline void dense_backward(const matrix& x, const dense_layer& fc, const matrix& dz,
                           matrix& dw, std::vector<double>& db, matrix* dx) {
    dw.resize(fc.in, fc.out);
    db.assign(fc.out, 0.0);
    for (int b = 0; b < x.rows; ++b) {
        const double* xr = x.row(b);
        const double* gr = dz.row(b);
        for (int k = 0; k < fc.in; ++k) {
            const double s = xr[k];
            double* dwr = dw.row(k);
            for (int n = 0; n < fc.out; ++n) dwr[n] += s * gr[n];
        }
        for (int n = 0; n < fc.out; ++n) db[n] += gr[n];
    }
    if (dx) {
        // transposed weight copy keeps the inner loop contiguous
        matrix wt(fc.out, fc.in);
        for (int k = 0; k < fc.in; ++k) {
            const double* wr = fc.w.row(k);
            for (int n = 0; n < fc.out; ++n) wt.at(n, k) = wr[n];
        }
        dx->resize(x.rows, fc.in);
        for (int b = 0; b < x.rows; ++b) {
            double* dxr = dx->row(b);
            for (int k = 0; k < fc.in; ++k) dxr[k] = 0.0;
            const double* gr = dz.row(b);
            for (int n = 0; n < fc.out; ++n) {
                const double s = gr[n];
                const double* wtr = wt.row(n);
                for (int k = 0; k < fc.in; ++k) dxr[k] += s * wtr[k];
            }
        }
    }
}

}  // namespace kernels

// Forward pass. Train mode uses batch statistics (batch size >= 2 required
// where batch norm is present) and, when update_running is set, folds them
// into the running statistics. Infer mode reads running statistics only and
// never mutates the network.
inline matrix forward(network& net, const matrix& x, run_mode mode,
                      forward_cache* cache = nullptr, bool update_running = true) {
    if (x.cols != net.in_dim())
        throw usage_error("forward: input has " + std::to_string(x.cols) +
                          " columns, network expects " + std::to_string(net.in_dim()));
    if (cache) {
        cache->mode = mode;
        cache->blocks.resize(net.blocks.size());
    }
    matrix cur = x;
    for (std::size_t li = 0; li < net.blocks.size(); ++li) {
        auto& blk = net.blocks[li];
        block_cache local;
        block_cache& bc = cache ? cache->blocks[li] : local;
        bc.x = cur;
        kernels::dense_forward(bc.x, blk.fc, bc.z);
        matrix* pre = &bc.z;
        if (blk.has_bn) {
            const int bsz = bc.z.rows, dim = blk.bn.dim;
            if (mode == run_mode::train && bsz < 2)
                throw usage_error("forward: train-mode batch norm needs batch >= 2");
            bc.xhat.resize(bsz, dim);
            bc.pre.resize(bsz, dim);
            if (mode == run_mode::train) {
                bc.mean.assign(dim, 0.0);
                bc.var.assign(dim, 0.0);
                for (int i = 0; i < bsz; ++i) {
                    const double* zr = bc.z.row(i);
                    for (int j = 0; j < dim; ++j) bc.mean[j] += zr[j];
                }
                for (int j = 0; j < dim; ++j) bc.mean[j] /= bsz;
                for (int i = 0; i < bsz; ++i) {
                    const double* zr = bc.z.row(i);
                    for (int j = 0; j < dim; ++j) {
                        double dzj = zr[j] - bc.mean[j];
                        bc.var[j] += dzj * dzj;
                    }
                }
                for (int j = 0; j < dim; ++j) bc.var[j] /= bsz;  // population variance
                if (update_running) {
                    for (int j = 0; j < dim; ++j) {
                        blk.bn.run_mean[j] =
                            blk.bn.momentum * blk.bn.run_mean[j] + (1.0 - blk.bn.momentum) * bc.mean[j];
                        blk.bn.run_var[j] =
                            blk.bn.momentum * blk.bn.run_var[j] + (1.0 - blk.bn.momentum) * bc.var[j];
                    }
                }
                for (int i = 0; i < bsz; ++i) {
                    const double* zr = bc.z.row(i);
                    double* xh = bc.xhat.row(i);
                    double* pr = bc.pre.row(i);
                    for (int j = 0; j < dim; ++j) {
                        xh[j] = (zr[j] - bc.mean[j]) / std::sqrt(bc.var[j] + blk.bn.eps);
                        pr[j] = blk.bn.gamma[j] * xh[j] + blk.bn.beta[j];
                    }
                }
            } else {
                for (int i = 0; i < bsz; ++i) {
                    const double* zr = bc.z.row(i);
                    double* xh = bc.xhat.row(i);
                    double* pr = bc.pre.row(i);
                    for (int j = 0; j < dim; ++j) {
                        xh[j] = (zr[j] - blk.bn.run_mean[j]) /
                                std::sqrt(blk.bn.run_var[j] + blk.bn.eps);
                        pr[j] = blk.bn.gamma[j] * xh[j] + blk.bn.beta[j];
                    }
                }
            }
            pre = &bc.pre;
        }
        bc.y.resize(pre->rows, pre->cols);
        for (std::size_t i = 0; i < pre->a.size(); ++i)
            bc.y.a[i] = apply_activation(blk.act, pre->a[i]);
        cur = bc.y;
    }
    return cur;
}

struct block_grads {
    matrix dw;
    std::vector<double> db, dgamma, dbeta;
};

struct network_grads {
    std::vector<block_grads> blocks;
};

inline void add_grads(network_grads& acc, const network_grads& g) {
    if (acc.blocks.empty()) {
        acc = g;
        return;
    }
    for (std::size_t i = 0; i < acc.blocks.size(); ++i) {
        auto& a = acc.blocks[i];
        const auto& b = g.blocks[i];
        for (std::size_t k = 0; k < a.dw.a.size(); ++k) a.dw.a[k] += b.dw.a[k];
        for (std::size_t k = 0; k < a.db.size(); ++k) a.db[k] += b.db[k];
        for (std::size_t k = 0; k < a.dgamma.size(); ++k) a.dgamma[k] += b.dgamma[k];
        for (std::size_t k = 0; k < a.dbeta.size(); ++k) a.dbeta[k] += b.dbeta[k];
    }
}

// Exact analytic backward through activation, batch norm (batch statistics
// treated as functions of the input) and the dense layer.
inline network_grads backward(const network& net, const forward_cache& cache,
                              const matrix& grad_out, matrix* grad_in = nullptr) {
    if (cache.mode != run_mode::train)
        throw usage_error("backward: cache was produced in infer mode");
    if (cache.blocks.size() != net.blocks.size())
        throw usage_error("backward: cache does not match the network");
    network_grads grads;
    grads.blocks.resize(net.blocks.size());
    matrix up = grad_out;
    for (int li = static_cast<int>(net.blocks.size()) - 1; li >= 0; --li) {
        const auto& blk = net.blocks[li];
        const auto& bc = cache.blocks[li];
        auto& bg = grads.blocks[li];
        if (!up.same_shape(bc.y))
            throw usage_error("backward: gradient shape mismatch at block " + std::to_string(li));
        // activation
        matrix da(up.rows, up.cols);
        const matrix& pre = blk.has_bn ? bc.pre : bc.z;
        switch (blk.act) {
            case activation::identity:
                da = up;
                break;
            case activation::leaky_relu:
                for (std::size_t i = 0; i < up.a.size(); ++i)
                    da.a[i] = up.a[i] * (pre.a[i] > 0.0 ? 1.0 : leaky_slope);
                break;
            case activation::sigmoid:
                for (std::size_t i = 0; i < up.a.size(); ++i) {
                    double s = bc.y.a[i];
                    da.a[i] = up.a[i] * s * (1.0 - s);
                }
                break;
        }
        // batch norm
        matrix dz_in;
        const matrix* dz = &da;
        if (blk.has_bn) {
            const int bsz = da.rows, dim = blk.bn.dim;
            bg.dgamma.assign(dim, 0.0);
            bg.dbeta.assign(dim, 0.0);
            std::vector<double> sum_dxhat(dim, 0.0), sum_dxhat_zc(dim, 0.0), sum_zc(dim, 0.0);
            for (int i = 0; i < bsz; ++i) {
                const double* dar = da.row(i);
                const double* xh = bc.xhat.row(i);
                const double* zr = bc.z.row(i);
                for (int j = 0; j < dim; ++j) {
                    bg.dgamma[j] += dar[j] * xh[j];
                    bg.dbeta[j] += dar[j];
                    double dxh = dar[j] * blk.bn.gamma[j];
                    double zc = zr[j] - bc.mean[j];
                    sum_dxhat[j] += dxh;
                    sum_dxhat_zc[j] += dxh * zc;
                    sum_zc[j] += zc;
                }
            }
            std::vector<double> inv_std(dim), dvar(dim), dmean(dim);
            for (int j = 0; j < dim; ++j) {
                inv_std[j] = 1.0 / std::sqrt(bc.var[j] + blk.bn.eps);
                dvar[j] = sum_dxhat_zc[j] * (-0.5) * inv_std[j] * inv_std[j] * inv_std[j];
                dmean[j] = -inv_std[j] * sum_dxhat[j] + dvar[j] * (-2.0 / bsz) * sum_zc[j];
            }
            dz_in.resize(bsz, dim);
            for (int i = 0; i < bsz; ++i) {
                const double* dar = da.row(i);
                const double* zr = bc.z.row(i);
                double* out = dz_in.row(i);
                for (int j = 0; j < dim; ++j) {
                    double dxh = dar[j] * blk.bn.gamma[j];
                    double zc = zr[j] - bc.mean[j];
                    out[j] = dxh * inv_std[j] + dvar[j] * 2.0 * zc / bsz + dmean[j] / bsz;
                }
            }
            dz = &dz_in;
        }
        // dense
        matrix* dx_target = (li > 0 || grad_in) ? &up : nullptr;
        matrix dx;
        kernels::dense_backward(bc.x, blk.fc, *dz, bg.dw, bg.db, dx_target ? &dx : nullptr);
        if (dx_target) up = std::move(dx);
    }
    if (grad_in) *grad_in = up;
    return grads;
}

// ---- Adam with decoupled weight decay -----------------------------------

struct adam_config {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // applies to weights and gamma, never bias/beta
    bool clip_mode = false;     // alternative reading: clamp weights to +-weight_decay
};

struct tensor_moments {
    std::vector<double> m, v;
};

struct adam_state {
    adam_config cfg;
    long long t = 0;
    // per block: w, b, gamma, beta moments (empty vectors where absent)
    std::vector<std::array<tensor_moments, 4>> blocks;
};

namespace detail {

inline void adam_update(std::vector<double>& p, const std::vector<double>& g,
                        tensor_moments& mo, const adam_config& c, long long t, bool decayed) {
    if (mo.m.empty()) {
        mo.m.assign(p.size(), 0.0);
        mo.v.assign(p.size(), 0.0);
    }
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < p.size(); ++i) {
        mo.m[i] = c.beta1 * mo.m[i] + (1.0 - c.beta1) * g[i];
        mo.v[i] = c.beta2 * mo.v[i] + (1.0 - c.beta2) * g[i] * g[i];
        double mhat = mo.m[i] / bc1;
        double vhat = mo.v[i] / bc2;
        double step = c.lr * mhat / (std::sqrt(vhat) + c.eps);
        if (decayed && !c.clip_mode) step += c.lr * c.weight_decay * p[i];
        p[i] -= step;
        if (decayed && c.clip_mode && c.weight_decay > 0.0) {
            if (p[i] > c.weight_decay) p[i] = c.weight_decay;
            if (p[i] < -c.weight_decay) p[i] = -c.weight_decay;
        }
    }
}

}  // namespace detail

// One optimizer step. The update is elementwise per parameter tensor, so any
// flattening order yields the same trajectory.
inline void adam_step(network& net, const network_grads& g, adam_state& st) {
    if (g.blocks.size() != net.blocks.size())
        throw usage_error("adam_step: gradient/network mismatch");
    st.blocks.resize(net.blocks.size());
    ++st.t;
    for (std::size_t i = 0; i < net.blocks.size(); ++i) {
        auto& blk = net.blocks[i];
        auto& mo = st.blocks[i];
        detail::adam_update(blk.fc.w.a, g.blocks[i].dw.a, mo[0], st.cfg, st.t, true);
        detail::adam_update(blk.fc.b, g.blocks[i].db, mo[1], st.cfg, st.t, false);
        if (blk.has_bn) {
            detail::adam_update(blk.bn.gamma, g.blocks[i].dgamma, mo[2], st.cfg, st.t, true);
            detail::adam_update(blk.bn.beta, g.blocks[i].dbeta, mo[3], st.cfg, st.t, false);
        }
    }
}

// ---- architecture builders ----------------------------------------------

inline constexpr int latent_dim = 100;

// 172 -> 128 -> 256 -> 512 -> 303; batch norm then LeakyReLU(0.2) on hidden
// layers, identity output.
inline network build_generator() {
    return make_network({latent_dim + 72, 128, 256, 512, 303},
                        {activation::leaky_relu, activation::leaky_relu,
                         activation::leaky_relu, activation::identity},
                        {true, true, true, false});
}

// (303 [+72 when conditioned]) -> 512 -> 256 -> 1; no batch norm, sigmoid out.
inline network build_critic(bool conditional = true) {
    int in = 303 + (conditional ? 72 : 0);
    return make_network({in, 512, 256, 1},
                        {activation::leaky_relu, activation::leaky_relu, activation::sigmoid},
                        {false, false, false});
}

// Dense baseline: 72 -> 256 -> 256 -> 303, LeakyReLU hidden, identity out.
inline network build_mlp_baseline() {
    return make_network({72, 256, 256, 303},
                        {activation::leaky_relu, activation::leaky_relu, activation::identity},
                        {false, false, false});
}

}  // namespace fpc
