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
// JSON report emission plus a small structural validator for the schema
// files shipped under schemas/. Every report embeds the tool version, the
// oracle version, and the seeds behind its numbers.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "fpc/baselines.hpp"
#include "fpc/checkpoint.hpp"
#include "fpc/common.hpp"
#include "fpc/em_oracle.hpp"
#include "fpc/gan.hpp"
#include "fpc/screening.hpp"

namespace fpc {

using json = nlohmann::json;

inline json segment_json(const nmse_by_segment& s) {
    return json{{"axial_ratio", s.ar}, {"return_loss", s.rl}, {"gain", s.gain}};
}

inline json nmse_report_json(const nmse_report& rep) {
    json j;
    j["tool_version"] = tool_version;
    j["oracle_version"] = rep.oracle_ver;
    j["dataset_fingerprint"] = hex64(rep.dataset_fp);
    j["pipeline_fingerprint"] = hex64(rep.pipeline_fp);
    j["seeds"] = json{{"master", rep.master_seed}};
    j["models"] = json{{"gan", segment_json(rep.gan)},
                       {"cnn", segment_json(rep.cnn)},
                       {"mlp", segment_json(rep.mlp)}};
    j["mean_predictor"] = segment_json(rep.mean_predictor);
    j["training_seconds"] = json{{"gan", rep.gan_seconds},
                                 {"mlp", rep.mlp_seconds},
                                 {"cnn", rep.cnn_seconds}};
    return j;
}

inline json metrics_json(const derived_metrics& m) {
    return json{{"f_res_ghz", m.f_res_ghz},
                {"gain_at_res_dbi", m.gain_at_res_dbi},
                {"zbw_mhz", m.zbw_mhz},
                {"ar5bw_mhz", m.ar5bw_mhz},
                {"ar_min_db", m.ar_min_db}};
}

inline json histogram_json(const metric_histogram& h) {
    return json{{"metric", h.metric}, {"edges", h.edges}, {"counts", h.counts}};
}

inline json screening_report_json(const screening_report& rep) {
    json j;
    j["tool_version"] = tool_version;
    j["oracle_version"] = oracle_version;
    j["pool_seed"] = rep.pool_seed;
    j["pool_size"] = rep.pool_size;
    j["criteria"] = json{{"min_zbw_mhz", rep.criteria.min_zbw_mhz},
                         {"max_ar_min_db", rep.criteria.max_ar_min_db},
                         {"w_zbw", rep.criteria.w_zbw},
                         {"w_ar5bw", rep.criteria.w_ar5bw},
                         {"w_ar", rep.criteria.w_ar},
                         {"w_gain", rep.criteria.w_gain}};
    j["feasible_count"] = rep.feasible_count;
    j["timing_ms"] = rep.timing_ms;
    json cands = json::array();
    for (const auto& c : rep.candidates) {
        json jc;
        jc["index"] = c.index;
        jc["design"] = c.design;
        jc["predicted"] = metrics_json(c.predicted);
        if (std::isfinite(c.score)) jc["score"] = c.score;
        else jc["score"] = nullptr;  // infeasible: -inf has no JSON encoding
        jc["feasible"] = c.feasible;
        cands.push_back(jc);
    }
    j["candidates"] = cands;
    j["ranking"] = rep.ranking;
    json hists = json::array();
    for (const auto& h : rep.histograms) hists.push_back(histogram_json(h));
    j["histograms"] = hists;
    return j;
}

inline json verification_report_json(const verification_report& rep,
                                     std::uint64_t pool_seed) {
    json j;
    j["tool_version"] = tool_version;
    j["oracle_version"] = oracle_version;
    j["pool_seed"] = pool_seed;
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back(json{{"pool_index", r.pool_index},
                            {"predicted", metrics_json(r.predicted)},
                            {"oracle", metrics_json(r.oracle)},
                            {"deltas",
                             json{{"f_res_ghz", r.d_f_res_ghz},
                                  {"gain_dbi", r.d_gain_dbi},
                                  {"zbw_mhz", r.d_zbw_mhz},
                                  {"ar5bw_mhz", r.d_ar5bw_mhz},
                                  {"ar_min_db", r.d_ar_min_db}}}});
    }
    j["rows"] = rows;
    return j;
}

inline void save_json(const json& j, const std::string& path) {
    write_file(path, j.dump(2) + "\n");
}

// ---- spectra CSV ---------------------------------------------------------

// One row per frequency point per source; sources are tagged in the first
// column ("oracle" or "gan").
inline std::string spectra_csv_header() { return "source,freq_ghz,ar_db,rl_db,gain_dbi"; }

inline void append_spectra_rows(std::string& out, const std::string& source,
                                const antenna_response& r, const frequency_grid& grid = {}) {
    for (int i = 0; i < grid.points; ++i) {
        out += source;
        out += ',';
        out += format_double(grid.at(i));
        out += ',';
        out += format_double(r.ar_db[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(r.rl_db[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(r.gain_dbi[static_cast<std::size_t>(i)]);
        out += '\n';
    }
}

// ---- structural schema validation ---------------------------------------
//
// Supports the subset of JSON Schema the shipped schemas use: type,
// properties, required, additionalProperties (boolean), items (single
// schema), enum. Returns the first violation path, or empty on success.

inline std::string schema_validate(const json& doc, const json& schema,
                                   const std::string& path = "$") {
    if (schema.contains("enum")) {
        for (const auto& v : schema.at("enum"))
            if (v == doc) return "";
        return path + ": value not in enum";
    }
    if (schema.contains("type")) {
        const auto& t = schema.at("type");
        auto matches = [&doc](const std::string& ty) {
            if (ty == "object") return doc.is_object();
            if (ty == "array") return doc.is_array();
            if (ty == "string") return doc.is_string();
            if (ty == "number") return doc.is_number();
            if (ty == "integer") return doc.is_number_integer();
            if (ty == "boolean") return doc.is_boolean();
            if (ty == "null") return doc.is_null();
            return false;
        };
        bool ok = false;
        if (t.is_string()) ok = matches(t.get<std::string>());
        else if (t.is_array()) {
            for (const auto& ty : t)
                if (matches(ty.get<std::string>())) ok = true;
        }
        if (!ok) return path + ": type mismatch";
    }
    if (doc.is_object() && schema.contains("required")) {
        for (const auto& k : schema.at("required"))
            if (!doc.contains(k.get<std::string>()))
                return path + ": missing required key " + k.get<std::string>();
    }
    if (doc.is_object() && schema.contains("properties")) {
        const auto& props = schema.at("properties");
        for (auto it = props.begin(); it != props.end(); ++it) {
            if (doc.contains(it.key())) {
                std::string err = schema_validate(doc.at(it.key()), it.value(),
                                                  path + "." + it.key());
                if (!err.empty()) return err;
            }
        }
        if (schema.contains("additionalProperties") &&
            schema.at("additionalProperties").is_boolean() &&
            !schema.at("additionalProperties").get<bool>()) {
            for (auto it = doc.begin(); it != doc.end(); ++it)
                if (!props.contains(it.key()))
                    return path + ": unexpected key " + it.key();
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        int i = 0;
        for (const auto& el : doc) {
            std::string err =
                schema_validate(el, schema.at("items"), path + "[" + std::to_string(i) + "]");
            if (!err.empty()) return err;
            ++i;
        }
    }
    return "";
}

}  // namespace fpc
