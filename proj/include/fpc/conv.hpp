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
// Small convolutional baseline over the 60 x 60 occupancy raster:
//   conv 3x3 (1->8, pad 1) - LeakyReLU - maxpool 2x2
//   conv 3x3 (8->16, pad 1) - LeakyReLU - maxpool 2x2
//   flatten (channel, row, column) -> dense 3600->256 - LeakyReLU
//   dense 256->303 (identity)
// Direct convolutions; inner loops update independent output elements so the
// compiler vectorizes them, reductions in the weight-gradient kernel run as
// four stride-4 partial sums combined in lane order (fixed, documented order).

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/design_space.hpp"
#include "fpc/nn.hpp"

namespace fpc {

struct conv_layer {
    int in_ch = 0, out_ch = 0;       // 3x3 kernel, pad 1, stride 1
    std::vector<double> w;           // [out_ch][in_ch][3][3]
    std::vector<double> b;           // [out_ch]

    double& wt(int oc, int ic, int ky, int kx) {
        return w[static_cast<std::size_t>(((oc * in_ch + ic) * 3 + ky) * 3 + kx)];
    }
    double wt(int oc, int ic, int ky, int kx) const {
        return w[static_cast<std::size_t>(((oc * in_ch + ic) * 3 + ky) * 3 + kx)];
    }
};

struct cnn_model {
    static constexpr int input_res = 60;  // default rasterizer resolution
    conv_layer c1;  // 1 -> 8
    conv_layer c2;  // 8 -> 16
    dense_layer f1;  // 3600 -> 256
    dense_layer f2;  // 256 -> 303

    std::uint64_t param_count() const {
        return c1.w.size() + c1.b.size() + c2.w.size() + c2.b.size() +
               static_cast<std::uint64_t>(f1.in) * f1.out + f1.out +
               static_cast<std::uint64_t>(f2.in) * f2.out + f2.out;
    }
};

inline cnn_model make_cnn() {
    cnn_model m;
    m.c1.in_ch = 1;
    m.c1.out_ch = 8;
    m.c1.w.assign(8 * 1 * 9, 0.0);
    m.c1.b.assign(8, 0.0);
    m.c2.in_ch = 8;
    m.c2.out_ch = 16;
    m.c2.w.assign(16 * 8 * 9, 0.0);
    m.c2.b.assign(16, 0.0);
    m.f1.in = 16 * 15 * 15;
    m.f1.out = 256;
    m.f1.w.resize(m.f1.in, m.f1.out);
    m.f1.b.assign(m.f1.out, 0.0);
    m.f2.in = 256;
    m.f2.out = 303;
    m.f2.w.resize(m.f2.in, m.f2.out);
    m.f2.b.assign(m.f2.out, 0.0);
    return m;
}

// Glorot-uniform conv and dense weights in declaration order, zero biases.
// Convolution fans count the 3x3 receptive field.
inline void init_glorot(cnn_model& m, rng_engine& eng) {
    auto fill_conv = [&eng](conv_layer& c) {
        double a = std::sqrt(6.0 / (c.in_ch * 9.0 + c.out_ch * 9.0));
        for (double& w : c.w) w = uniform_range(eng, -a, a);
        for (double& b : c.b) b = 0.0;
    };
    auto fill_dense = [&eng](dense_layer& d) {
        double a = std::sqrt(6.0 / (d.in + d.out));
        for (double& w : d.w.a) w = uniform_range(eng, -a, a);
        for (double& b : d.b) b = 0.0;
    };
    fill_conv(m.c1);
    fill_conv(m.c2);
    fill_dense(m.f1);
    fill_dense(m.f2);
}

namespace kernels {

// out[oc] = b[oc] + sum_{ic,ky,kx} w * shifted(in[ic]); channels ascending,
// then kernel row, then kernel column.
inline void conv3x3_forward(const std::vector<double>& in, int ch_in, int hw,
                            const conv_layer& c, std::vector<double>& out) {
    const std::size_t plane = static_cast<std::size_t>(hw) * hw;
    out.assign(static_cast<std::size_t>(c.out_ch) * plane, 0.0);
    for (int oc = 0; oc < c.out_ch; ++oc) {
        double* op = out.data() + oc * plane;
        const double bias = c.b[oc];
        for (std::size_t i = 0; i < plane; ++i) op[i] = bias;
        for (int ic = 0; ic < ch_in; ++ic) {
            const double* ip = in.data() + ic * plane;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const double wv = c.wt(oc, ic, ky, kx);
                    const int y0 = std::max(0, 1 - ky), y1 = std::min(hw, hw + 1 - ky);
                    const int x0 = std::max(0, 1 - kx), x1 = std::min(hw, hw + 1 - kx);
                    for (int y = y0; y < y1; ++y) {
                        double* orow = op + static_cast<std::size_t>(y) * hw;
                        const double* irow = ip + static_cast<std::size_t>(y + ky - 1) * hw + (kx - 1);
                        for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

// d_in (optional) and d_w/d_b for the same geometry. d_w uses four stride-4
// partial accumulators per row, combined in lane order 0,1,2,3.
inline void conv3x3_backward(const std::vector<double>& in, int ch_in, int hw,
                             const conv_layer& c, const std::vector<double>& dout,
                             std::vector<double>& dw, std::vector<double>& db,
                             std::vector<double>* din) {
    const std::size_t plane = static_cast<std::size_t>(hw) * hw;
    dw.assign(c.w.size(), 0.0);
    db.assign(c.b.size(), 0.0);
    if (din) din->assign(static_cast<std::size_t>(ch_in) * plane, 0.0);
    for (int oc = 0; oc < c.out_ch; ++oc) {
        const double* gp = dout.data() + oc * plane;
        {
            double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
            const int n = hw * hw;
            int i = 0;
            for (; i + 4 <= n; i += 4) {
                p0 += gp[i];
                p1 += gp[i + 1];
                p2 += gp[i + 2];
                p3 += gp[i + 3];
            }
            double s = p0 + p1 + p2 + p3;
            for (; i < n; ++i) s += gp[i];
            db[oc] += s;
        }
        for (int ic = 0; ic < ch_in; ++ic) {
            const double* ip = in.data() + ic * plane;
            double* dip = din ? din->data() + ic * plane : nullptr;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const int y0 = std::max(0, 1 - ky), y1 = std::min(hw, hw + 1 - ky);
                    const int x0 = std::max(0, 1 - kx), x1 = std::min(hw, hw + 1 - kx);
                    double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* grow = gp + static_cast<std::size_t>(y) * hw;
                        const double* irow = ip + static_cast<std::size_t>(y + ky - 1) * hw + (kx - 1);
                        int x = x0;
                        for (; x + 4 <= x1; x += 4) {
                            p0 += grow[x] * irow[x];
                            p1 += grow[x + 1] * irow[x + 1];
                            p2 += grow[x + 2] * irow[x + 2];
                            p3 += grow[x + 3] * irow[x + 3];
                        }
                        for (; x < x1; ++x) p0 += grow[x] * irow[x];
                    }
                    dw[static_cast<std::size_t>(((oc * ch_in + ic) * 3 + ky) * 3 + kx)] +=
                        p0 + p1 + p2 + p3;
                    if (dip) {
                        const double wv = c.wt(oc, ic, ky, kx);
                        for (int y = y0; y < y1; ++y) {
                            const double* grow = gp + static_cast<std::size_t>(y) * hw;
                            double* drow = dip + static_cast<std::size_t>(y + ky - 1) * hw + (kx - 1);
                            for (int x = x0; x < x1; ++x) drow[x] += wv * grow[x];
                        }
                    }
                }
            }
        }
    }
}

// 2x2 max pooling, stride 2; ties keep the first maximum in scan order
// (0,0), (0,1), (1,0), (1,1). arg stores that choice for routing gradients.
inline void maxpool2_forward(const std::vector<double>& in, int ch, int hw,
                             std::vector<double>& out, std::vector<std::uint8_t>& arg) {
    const int oh = hw / 2;
    const std::size_t iplane = static_cast<std::size_t>(hw) * hw;
    const std::size_t oplane = static_cast<std::size_t>(oh) * oh;
    out.assign(static_cast<std::size_t>(ch) * oplane, 0.0);
    arg.assign(static_cast<std::size_t>(ch) * oplane, 0);
    for (int c = 0; c < ch; ++c) {
        const double* ip = in.data() + c * iplane;
        double* op = out.data() + c * oplane;
        std::uint8_t* ap = arg.data() + c * oplane;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < oh; ++x) {
                const double* base = ip + static_cast<std::size_t>(2 * y) * hw + 2 * x;
                double best = base[0];
                std::uint8_t which = 0;
                if (base[1] > best) { best = base[1]; which = 1; }
                if (base[hw] > best) { best = base[hw]; which = 2; }
                if (base[hw + 1] > best) { best = base[hw + 1]; which = 3; }
                op[static_cast<std::size_t>(y) * oh + x] = best;
                ap[static_cast<std::size_t>(y) * oh + x] = which;
            }
        }
    }
}

inline void maxpool2_backward(const std::vector<double>& dout, int ch, int hw,
                              const std::vector<std::uint8_t>& arg, std::vector<double>& din) {
    const int oh = hw / 2;
    const std::size_t iplane = static_cast<std::size_t>(hw) * hw;
    const std::size_t oplane = static_cast<std::size_t>(oh) * oh;
    din.assign(static_cast<std::size_t>(ch) * iplane, 0.0);
    for (int c = 0; c < ch; ++c) {
        const double* gp = dout.data() + c * oplane;
        const std::uint8_t* ap = arg.data() + c * oplane;
        double* dp = din.data() + c * iplane;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < oh; ++x) {
                std::uint8_t which = ap[static_cast<std::size_t>(y) * oh + x];
                int iy = 2 * y + (which >> 1), ix = 2 * x + (which & 1);
                dp[static_cast<std::size_t>(iy) * hw + ix] =
                    gp[static_cast<std::size_t>(y) * oh + x];
            }
        }
    }
}

}  // namespace kernels

struct cnn_sample_cache {
    std::vector<double> in;                 // 1 x 60 x 60
    std::vector<double> z1, a1, p1;         // conv1 pre-act, act, pooled
    std::vector<std::uint8_t> arg1;
    std::vector<double> z2, a2, p2;         // conv2 pre-act, act, pooled (= flatten)
    std::vector<std::uint8_t> arg2;
};

struct cnn_cache {
    std::vector<cnn_sample_cache> samples;
    matrix flat;  // [B x 3600]
    forward_cache fc;  // dense tail caches (reuses the generic block machinery)
};

inline std::vector<double> grid_to_plane(const occupancy_grid& g) {
    std::vector<double> p(g.cells.size());
    for (std::size_t i = 0; i < g.cells.size(); ++i) p[i] = g.cells[i] ? 1.0 : 0.0;
    return p;
}

// Forward over a batch of occupancy rasters; returns [B x 303].
inline matrix cnn_forward(const cnn_model& m, const std::vector<occupancy_grid>& grids,
                          cnn_cache* cache = nullptr) {
    const int bsz = static_cast<int>(grids.size());
    const int hw = cnn_model::input_res;
    cnn_cache local;
    cnn_cache& cc = cache ? *cache : local;
    cc.samples.resize(bsz);
    cc.flat.resize(bsz, m.f1.in);
    for (int b = 0; b < bsz; ++b) {
        auto& sc = cc.samples[b];
        sc.in = grid_to_plane(grids[static_cast<std::size_t>(b)]);
        kernels::conv3x3_forward(sc.in, 1, hw, m.c1, sc.z1);
        sc.a1.resize(sc.z1.size());
        for (std::size_t i = 0; i < sc.z1.size(); ++i)
            sc.a1[i] = apply_activation(activation::leaky_relu, sc.z1[i]);
        kernels::maxpool2_forward(sc.a1, 8, hw, sc.p1, sc.arg1);
        kernels::conv3x3_forward(sc.p1, 8, hw / 2, m.c2, sc.z2);
        sc.a2.resize(sc.z2.size());
        for (std::size_t i = 0; i < sc.z2.size(); ++i)
            sc.a2[i] = apply_activation(activation::leaky_relu, sc.z2[i]);
        kernels::maxpool2_forward(sc.a2, 16, hw / 2, sc.p2, sc.arg2);
        double* row = cc.flat.row(b);
        for (int i = 0; i < m.f1.in; ++i) row[i] = sc.p2[static_cast<std::size_t>(i)];
    }
    // dense tail as two generic blocks: 3600 -> 256 LeakyReLU, 256 -> 303
    auto& fcache = cc.fc;
    fcache.mode = run_mode::train;
    fcache.blocks.resize(2);
    auto& b1 = fcache.blocks[0];
    b1.x = cc.flat;
    kernels::dense_forward(b1.x, m.f1, b1.z);
    b1.y.resize(b1.z.rows, b1.z.cols);
    for (std::size_t i = 0; i < b1.z.a.size(); ++i)
        b1.y.a[i] = apply_activation(activation::leaky_relu, b1.z.a[i]);
    auto& b2 = fcache.blocks[1];
    b2.x = b1.y;
    kernels::dense_forward(b2.x, m.f2, b2.z);
    b2.y = b2.z;
    return b2.y;
}

struct cnn_grads {
    std::vector<double> dw1, db1, dw2, db2;
    matrix dwf1, dwf2;
    std::vector<double> dbf1, dbf2;
};

inline void cnn_backward(const cnn_model& m, const cnn_cache& cc, const matrix& grad_out,
                         cnn_grads& g) {
    const int bsz = static_cast<int>(cc.samples.size());
    const int hw = cnn_model::input_res;
    // dense tail
    const auto& b2 = cc.fc.blocks[1];
    const auto& b1 = cc.fc.blocks[0];
    matrix d_h;  // gradient at fc1 output (post-activation)
    kernels::dense_backward(b2.x, m.f2, grad_out, g.dwf2, g.dbf2, &d_h);
    matrix d_z1(d_h.rows, d_h.cols);
    for (std::size_t i = 0; i < d_h.a.size(); ++i)
        d_z1.a[i] = d_h.a[i] * (b1.z.a[i] > 0.0 ? 1.0 : leaky_slope);
    matrix d_flat;
    kernels::dense_backward(b1.x, m.f1, d_z1, g.dwf1, g.dbf1, &d_flat);
    // conv trunk, per sample, gradients summed over the batch ascending
    g.dw1.assign(m.c1.w.size(), 0.0);
    g.db1.assign(m.c1.b.size(), 0.0);
    g.dw2.assign(m.c2.w.size(), 0.0);
    g.db2.assign(m.c2.b.size(), 0.0);
    std::vector<double> dp2, da2, dz2, dp1, da1, dz1, dw_s, db_s;
    for (int b = 0; b < bsz; ++b) {
        const auto& sc = cc.samples[b];
        const double* fr = d_flat.row(b);
        dp2.assign(static_cast<std::size_t>(m.f1.in), 0.0);
        for (int i = 0; i < m.f1.in; ++i) dp2[static_cast<std::size_t>(i)] = fr[i];
        kernels::maxpool2_backward(dp2, 16, hw / 2, sc.arg2, da2);
        dz2.resize(da2.size());
        for (std::size_t i = 0; i < da2.size(); ++i)
            dz2[i] = da2[i] * (sc.z2[i] > 0.0 ? 1.0 : leaky_slope);
        kernels::conv3x3_backward(sc.p1, 8, hw / 2, m.c2, dz2, dw_s, db_s, &dp1);
        for (std::size_t i = 0; i < dw_s.size(); ++i) g.dw2[i] += dw_s[i];
        for (std::size_t i = 0; i < db_s.size(); ++i) g.db2[i] += db_s[i];
        kernels::maxpool2_backward(dp1, 8, hw, sc.arg1, da1);
        dz1.resize(da1.size());
        for (std::size_t i = 0; i < da1.size(); ++i)
            dz1[i] = da1[i] * (sc.z1[i] > 0.0 ? 1.0 : leaky_slope);
        kernels::conv3x3_backward(sc.in, 1, hw, m.c1, dz1, dw_s, db_s, nullptr);
        for (std::size_t i = 0; i < dw_s.size(); ++i) g.dw1[i] += dw_s[i];
        for (std::size_t i = 0; i < db_s.size(); ++i) g.db1[i] += db_s[i];
    }
}

struct cnn_adam_state {
    adam_config cfg;
    long long t = 0;
    std::array<tensor_moments, 8> mo;  // c1.w c1.b c2.w c2.b f1.w f1.b f2.w f2.b
};

inline void cnn_adam_step(cnn_model& m, const cnn_grads& g, cnn_adam_state& st) {
    ++st.t;
    detail::adam_update(m.c1.w, g.dw1, st.mo[0], st.cfg, st.t, true);
    detail::adam_update(m.c1.b, g.db1, st.mo[1], st.cfg, st.t, false);
    detail::adam_update(m.c2.w, g.dw2, st.mo[2], st.cfg, st.t, true);
    detail::adam_update(m.c2.b, g.db2, st.mo[3], st.cfg, st.t, false);
    detail::adam_update(m.f1.w.a, g.dwf1.a, st.mo[4], st.cfg, st.t, true);
    detail::adam_update(m.f1.b, g.dbf1, st.mo[5], st.cfg, st.t, false);
    detail::adam_update(m.f2.w.a, g.dwf2.a, st.mo[6], st.cfg, st.t, true);
    detail::adam_update(m.f2.b, g.dbf2, st.mo[7], st.cfg, st.t, false);
}

}  // namespace fpc
