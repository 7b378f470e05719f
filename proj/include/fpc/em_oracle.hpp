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
// Synthetic electromagnetic oracle: a fixed, closed-form stand-in for a
// full-wave solver. Pure function of the design, no noise. The functional
// forms are versioned; datasets and checkpoints record the version string
// and refuse to mix versions.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/design_space.hpp"

namespace fpc {

inline constexpr const char* oracle_version = "fpc-oracle/1";

inline constexpr int response_points = 101;  // per curve on the default grid
inline constexpr int response_dim = 303;     // ar || rl || gain

struct frequency_grid {
    double f_lo_ghz = 2.0;
    double f_hi_ghz = 3.0;
    int points = response_points;

    double spacing() const { return (f_hi_ghz - f_lo_ghz) / (points - 1); }
    double at(int i) const { return f_lo_ghz + i * spacing(); }
};

// Segment layout of the flat response vector.
enum class segment { all = 0, axial_ratio = 1, return_loss = 2, gain = 3 };

struct antenna_response {
    std::vector<double> ar_db;     // axial ratio
    std::vector<double> rl_db;     // return loss (negative dips)
    std::vector<double> gain_dbi;  // boresight gain
};

using response_vector = std::array<double, response_dim>;

struct oracle_features {
    double m_x = 0.0;    // mean brick x / side
    double m_y = 0.0;    // mean brick y / side
    double asym = 0.0;   // |#(y>x) - #(y<x)| / 36
    double spread = 0.0; // population std of offset_index / slots_per_edge, clamped [0,1]
    double fine = 0.0;   // mean sin(4 pi x / side) * sin(4 pi y / side)
};

// Feature reductions run over bricks in canonical order, ascending.
inline oracle_features compute_features(const unit_cell_design& d) {
    const double side = d.geometry.side_mm;
    const int n = static_cast<int>(d.bricks.size());
    if (n != bricks_per_design)
        throw usage_error("oracle: expected 36 bricks, found " + std::to_string(n));
    oracle_features f;
    double sum_x = 0.0, sum_y = 0.0, sum_fine = 0.0;
    int gt = 0, lt = 0;
    for (const auto& b : d.bricks) {
        sum_x += b.x_mm;
        sum_y += b.y_mm;
        if (b.y_mm > b.x_mm) ++gt;
        else if (b.y_mm < b.x_mm) ++lt;
        const double four_pi = 4.0 * 3.14159265358979323846264338327950288;
        sum_fine += std::sin(four_pi * b.x_mm / side) * std::sin(four_pi * b.y_mm / side);
    }
    f.m_x = sum_x / n / side;
    f.m_y = sum_y / n / side;
    f.asym = std::abs(gt - lt) / static_cast<double>(n);
    f.fine = sum_fine / n;
    double mean_k = 0.0;
    for (const auto& b : d.bricks) mean_k += b.offset_index;
    mean_k /= n;
    double var_k = 0.0;
    for (const auto& b : d.bricks) {
        double dk = b.offset_index - mean_k;
        var_k += dk * dk;
    }
    var_k /= n;  // population variance
    f.spread = std::clamp(std::sqrt(var_k) / d.geometry.slots_per_edge(), 0.0, 1.0);
    return f;
}

struct oracle_params {
    double f_r_ghz = 0.0;
    double q = 0.0;
    double depth_db = 0.0;
    double f_ar_ghz = 0.0;
    double ar_floor_db = 0.0;
    double gain_peak_dbi = 0.0;
};

inline oracle_params oracle_params_from(const oracle_features& f) {
    oracle_params p;
    p.f_r_ghz = std::clamp(2.45 + 0.2 * (f.m_x + f.m_y - 1.0) + 0.005 * f.fine, 2.1, 2.9);
    p.q = 20.0 + 30.0 * f.spread;
    p.depth_db = 15.0 + 10.0 * (1.0 - f.asym);
    p.f_ar_ghz = p.f_r_ghz + 0.05 * (f.m_x - f.m_y);
    p.ar_floor_db = 0.3 + 7.0 * f.asym;
    p.gain_peak_dbi = 3.4 + 6.0 * (1.0 - 0.3 * f.asym);
    return p;
}

inline antenna_response oracle_evaluate(const unit_cell_design& d,
                                        const frequency_grid& grid = {}) {
    const oracle_params p = oracle_params_from(compute_features(d));
    antenna_response r;
    r.ar_db.resize(grid.points);
    r.rl_db.resize(grid.points);
    r.gain_dbi.resize(grid.points);
    const double gamma = p.f_r_ghz / (2.0 * p.q);  // Lorentzian half-width
    for (int i = 0; i < grid.points; ++i) {
        const double f = grid.at(i);
        const double u = (f - p.f_r_ghz) / gamma;
        r.rl_db[i] = -p.depth_db / (1.0 + u * u);
        const double v = (f - p.f_r_ghz) / 0.15;
        r.gain_dbi[i] = 3.4 + (p.gain_peak_dbi - 3.4) / (1.0 + v * v);
        const double w = (f - p.f_ar_ghz) / 0.2;
        r.ar_db[i] = p.ar_floor_db + 25.0 * w * w;
        if (!std::isfinite(r.rl_db[i]) || !std::isfinite(r.gain_dbi[i]) ||
            !std::isfinite(r.ar_db[i]))
            throw numeric_error("oracle produced a non-finite sample");
    }
    return r;
}

inline response_vector flatten_response(const antenna_response& r) {
    if (r.ar_db.size() != response_points || r.rl_db.size() != response_points ||
        r.gain_dbi.size() != response_points)
        throw usage_error("flatten_response: expected the default 101-point grid");
    response_vector y{};
    for (int i = 0; i < response_points; ++i) {
        y[i] = r.ar_db[i];
        y[response_points + i] = r.rl_db[i];
        y[2 * response_points + i] = r.gain_dbi[i];
    }
    return y;
}

inline antenna_response unflatten_response(const response_vector& y) {
    antenna_response r;
    r.ar_db.assign(y.begin(), y.begin() + response_points);
    r.rl_db.assign(y.begin() + response_points, y.begin() + 2 * response_points);
    r.gain_dbi.assign(y.begin() + 2 * response_points, y.end());
    return r;
}

struct derived_metrics {
    double f_res_ghz = 0.0;
    double gain_at_res_dbi = 0.0;
    double zbw_mhz = 0.0;    // contiguous return-loss <= -10 dB span
    double ar5bw_mhz = 0.0;  // contiguous axial-ratio <= 5 dB span
    double ar_min_db = 0.0;
};

namespace detail {
// Width in GHz of the contiguous sub-threshold region around index `center`,
// with linearly interpolated crossings; band edges clip at the grid bounds.
// `below` means curve[i] <= threshold counts as inside.
inline double band_width(const std::vector<double>& curve, const frequency_grid& grid,
                         int center, double threshold) {
    const int n = static_cast<int>(curve.size());
    if (curve[center] > threshold) return 0.0;
    int l = center, r = center;
    while (l > 0 && curve[l - 1] <= threshold) --l;
    while (r + 1 < n && curve[r + 1] <= threshold) ++r;
    double f_left = grid.at(0);
    if (l > 0) {
        // crossing between l-1 (above) and l (below)
        double t = (threshold - curve[l - 1]) / (curve[l] - curve[l - 1]);
        f_left = grid.at(l - 1) + t * grid.spacing();
    }
    double f_right = grid.at(n - 1);
    if (r + 1 < n) {
        double t = (threshold - curve[r]) / (curve[r + 1] - curve[r]);
        f_right = grid.at(r) + t * grid.spacing();
    }
    return f_right - f_left;
}

inline int argmin(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] < v[best]) best = i;  // ties keep the lowest index
    return best;
}
}  // namespace detail

inline derived_metrics extract_metrics(const antenna_response& r,
                                       const frequency_grid& grid = {}) {
    const int n = grid.points;
    if (static_cast<int>(r.ar_db.size()) != n || static_cast<int>(r.rl_db.size()) != n ||
        static_cast<int>(r.gain_dbi.size()) != n)
        throw usage_error("extract_metrics: response length does not match the grid");
    derived_metrics m;
    const int i_res = detail::argmin(r.rl_db);
    m.f_res_ghz = grid.at(i_res);
    m.gain_at_res_dbi = r.gain_dbi[i_res];
    m.zbw_mhz = 1000.0 * detail::band_width(r.rl_db, grid, i_res, -10.0);
    const int i_ar = detail::argmin(r.ar_db);
    m.ar_min_db = r.ar_db[i_ar];
    m.ar5bw_mhz = 1000.0 * detail::band_width(r.ar_db, grid, i_ar, 5.0);
    return m;
}

}  // namespace fpc
