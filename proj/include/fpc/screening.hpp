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
// Candidate-pool screening: sample random designs, predict their spectra
// through a surrogate, gate on feasibility thresholds, rank by a weighted
// score, and verify the chosen designs against the oracle.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/design_space.hpp"
#include "fpc/em_oracle.hpp"
#include "fpc/nn.hpp"

namespace fpc {

struct screening_criteria {
    double min_zbw_mhz = 100.0;
    double max_ar_min_db = 3.0;
    double w_zbw = 1.0;
    double w_ar5bw = 1.0;
    double w_ar = 50.0;
    double w_gain = 10.0;

    void validate() const {
        if (min_zbw_mhz < 0.0 || max_ar_min_db < 0.0 || w_zbw < 0.0 || w_ar5bw < 0.0 ||
            w_ar < 0.0 || w_gain < 0.0)
            throw usage_error("screening criteria: thresholds and weights must be >= 0");
    }
};

struct score_result {
    double score = 0.0;
    bool feasible = false;
};

// Weighted preference with hard feasibility gates; infeasible designs rank
// behind every feasible one via a -inf score.
inline score_result score_design(const derived_metrics& m, const screening_criteria& c) {
    score_result r;
    r.feasible = m.zbw_mhz >= c.min_zbw_mhz && m.ar_min_db <= c.max_ar_min_db;
    if (!r.feasible) {
        r.score = -std::numeric_limits<double>::infinity();
        return r;
    }
    r.score = c.w_zbw * m.zbw_mhz + c.w_ar5bw * m.ar5bw_mhz - c.w_ar * m.ar_min_db +
              c.w_gain * m.gain_at_res_dbi;
    return r;
}

struct screening_candidate {
    int index = 0;  // pool position
    design_vector design{};
    derived_metrics predicted;
    double score = 0.0;
    bool feasible = false;
};

struct metric_histogram {
    std::string metric;
    std::vector<double> edges;          // bins + 1 ascending edges
    std::vector<std::uint64_t> counts;  // one per bin, total == pool size
};

// Equal-width bins over [min, max]; the top edge is inclusive so totals
// always equal the sample count. A degenerate range widens to unit width.
inline metric_histogram make_histogram(const std::string& metric,
                                       const std::vector<double>& values, int bins = 20) {
    if (bins < 1) throw usage_error("histogram: need at least one bin");
    metric_histogram h;
    h.metric = metric;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    double lo = 0.0, hi = 1.0;
    if (!values.empty()) {
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
    h.edges.back() = hi;
    for (double v : values) {
        int b = static_cast<int>((v - lo) / width);
        if (b < 0) b = 0;
        if (b >= bins) b = bins - 1;
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

inline void save_histogram_csv(const metric_histogram& h, const std::string& path) {
    std::string out = "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += format_double(h.edges[i]);
        out += ',';
        out += format_double(h.edges[i + 1]);
        out += ',';
        out += std::to_string(h.counts[i]);
        out += '\n';
    }
    write_file(path, out);
}

struct screening_report {
    std::uint64_t pool_seed = 0;
    int pool_size = 0;
    screening_criteria criteria;
    std::vector<screening_candidate> candidates;  // pool order
    std::vector<int> ranking;  // feasible by descending score, then infeasible by index
    int feasible_count = 0;
    double timing_ms = 0.0;  // wall clock; excluded from determinism comparisons
    std::vector<metric_histogram> histograms;  // one per derived metric
};

// Surrogate interface: raw designs (mm) in, physical-unit responses out.
using response_predictor = std::function<matrix(const std::vector<design_vector>&)>;

// Ranking order: feasible candidates by descending score, ties by lower
// ar_min then lower pool index; infeasible candidates follow in pool order.
inline std::vector<int> rank_candidates(const std::vector<screening_candidate>& cs) {
    std::vector<int> order;
    order.reserve(cs.size());
    for (int i = 0; i < static_cast<int>(cs.size()); ++i) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&cs](int a, int b) {
        const auto& ca = cs[static_cast<std::size_t>(a)];
        const auto& cb = cs[static_cast<std::size_t>(b)];
        if (ca.feasible != cb.feasible) return ca.feasible;
        if (!ca.feasible) return a < b;
        if (ca.score != cb.score) return ca.score > cb.score;
        if (ca.predicted.ar_min_db != cb.predicted.ar_min_db)
            return ca.predicted.ar_min_db < cb.predicted.ar_min_db;
        return a < b;
    });
    return order;
}

inline screening_report screen_candidates(const response_predictor& predict,
                                          const cell_geometry& geometry, int n,
                                          std::uint64_t seed,
                                          const screening_criteria& criteria = {}) {
    criteria.validate();
    if (n < 1) throw usage_error("screen_candidates: pool size must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    screening_report rep;
    rep.pool_seed = seed;
    rep.pool_size = n;
    rep.criteria = criteria;
    std::vector<design_vector> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        unit_cell_design d = sample_design(geometry, child_seed(seed, static_cast<std::uint64_t>(i)));
        pool.push_back(encode(d));
    }
    matrix resp = predict(pool);
    if (resp.rows != n || resp.cols != response_dim)
        throw usage_error("screen_candidates: predictor returned wrong shape");
    rep.candidates.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& cand = rep.candidates[static_cast<std::size_t>(i)];
        cand.index = i;
        cand.design = pool[static_cast<std::size_t>(i)];
        std::array<double, response_dim> flat{};
        for (int j = 0; j < response_dim; ++j) flat[static_cast<std::size_t>(j)] = resp.at(i, j);
        if (!std::isfinite(resp.at(i, 0)))
            throw numeric_error("screen_candidates: non-finite prediction at pool index " +
                                std::to_string(i));
        cand.predicted = extract_metrics(unflatten_response(flat));
        score_result s = score_design(cand.predicted, criteria);
        cand.score = s.score;
        cand.feasible = s.feasible;
        if (s.feasible) ++rep.feasible_count;
    }
    rep.ranking = rank_candidates(rep.candidates);

    auto collect = [&rep](const std::string& name, double derived_metrics::*field) {
        std::vector<double> v;
        v.reserve(rep.candidates.size());
        for (const auto& c : rep.candidates) v.push_back(c.predicted.*field);
        rep.histograms.push_back(make_histogram(name, v));
    };
    collect("f_res_ghz", &derived_metrics::f_res_ghz);
    collect("gain_at_res_dbi", &derived_metrics::gain_at_res_dbi);
    collect("zbw_mhz", &derived_metrics::zbw_mhz);
    collect("ar5bw_mhz", &derived_metrics::ar5bw_mhz);
    collect("ar_min_db", &derived_metrics::ar_min_db);

    rep.timing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

struct selection {
    int requested = 0;
    bool shortfall = false;  // fewer feasible candidates than requested
    std::vector<screening_candidate> designs;
};

inline selection select_optimal(const screening_report& rep, int k) {
    if (k < 1) throw usage_error("select_optimal: k must be positive");
    selection sel;
    sel.requested = k;
    for (int idx : rep.ranking) {
        const auto& c = rep.candidates[static_cast<std::size_t>(idx)];
        if (!c.feasible) break;
        sel.designs.push_back(c);
        if (static_cast<int>(sel.designs.size()) == k) break;
    }
    sel.shortfall = static_cast<int>(sel.designs.size()) < k;
    return sel;
}

struct verification_row {
    int pool_index = 0;
    derived_metrics predicted;
    derived_metrics oracle;
    double d_f_res_ghz = 0.0, d_gain_dbi = 0.0, d_zbw_mhz = 0.0, d_ar5bw_mhz = 0.0,
           d_ar_min_db = 0.0;  // absolute deltas
};

struct verification_report {
    std::vector<verification_row> rows;
};

// Ground-truth check of the selected designs: decode, run the oracle, and
// report absolute surrogate-vs-oracle deltas per metric.
inline verification_report verify_selection(const selection& sel, const cell_geometry& geometry,
                                            const frequency_grid& grid = {}) {
    verification_report rep;
    for (const auto& c : sel.designs) {
        unit_cell_design d = decode_design(c.design, geometry);
        derived_metrics truth = extract_metrics(oracle_evaluate(d, grid), grid);
        verification_row row;
        row.pool_index = c.index;
        row.predicted = c.predicted;
        row.oracle = truth;
        row.d_f_res_ghz = std::fabs(c.predicted.f_res_ghz - truth.f_res_ghz);
        row.d_gain_dbi = std::fabs(c.predicted.gain_at_res_dbi - truth.gain_at_res_dbi);
        row.d_zbw_mhz = std::fabs(c.predicted.zbw_mhz - truth.zbw_mhz);
        row.d_ar5bw_mhz = std::fabs(c.predicted.ar5bw_mhz - truth.ar5bw_mhz);
        row.d_ar_min_db = std::fabs(c.predicted.ar_min_db - truth.ar_min_db);
        rep.rows.push_back(row);
    }
    return rep;
}

// Oracle-as-surrogate predictor (used for self-consistency tests and the
// --oracle screening mode).
inline response_predictor make_oracle_predictor(const cell_geometry& geometry,
                                                const frequency_grid& grid = {}) {
    return [geometry, grid](const std::vector<design_vector>& designs) {
        matrix out(static_cast<int>(designs.size()), response_dim);
        for (std::size_t i = 0; i < designs.size(); ++i) {
            unit_cell_design d = decode_design(designs[i], geometry);
            auto flat = flatten_response(oracle_evaluate(d, grid));
            for (int j = 0; j < response_dim; ++j)
                out.at(static_cast<int>(i), j) = flat[static_cast<std::size_t>(j)];
        }
        return out;
    };
}

}  // namespace fpc
