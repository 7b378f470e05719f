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
// Run configuration: one JSON document covering geometry, dataset, training
// and screening settings. Parsing is closed-world: an unknown key anywhere
// in the document is an error, so a misspelled hyperparameter can never fall
// back to a default silently. Command-line flags override file values.

#pragma once

#include <cstdint>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "fpc/baselines.hpp"
#include "fpc/common.hpp"
#include "fpc/design_space.hpp"
#include "fpc/em_oracle.hpp"
#include "fpc/gan.hpp"
#include "fpc/screening.hpp"

namespace fpc {

struct run_config {
    std::uint64_t seed = 7;
    std::string oracle_pin = oracle_version;
    double cell_side_mm = 30.0;
    double loop_inset_mm = 2.0;
    int dataset_n = 300;
    std::string dataset_format = "bin";
    gan_config gan;
    baseline_config mlp;
    baseline_config cnn;
    screening_criteria criteria;
    int screening_n = 500;
    int screening_top_k = 5;

    cell_geometry geometry() const { return cell_geometry::make(cell_side_mm, loop_inset_mm); }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                                const std::string& prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw usage_error("unknown config key: " + prefix + it.key());
    }
}

template <typename T>
inline void read_key(const nlohmann::json& obj, const char* key, T& target,
                     const std::string& prefix) {
    if (!obj.contains(key)) return;
    try {
        target = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw usage_error("config key " + prefix + key + " has the wrong type");
    }
}

}  // namespace detail

inline run_config parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw usage_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("config root must be a JSON object");
    run_config c;
    detail::reject_unknown_keys(
        j, {"seed", "oracle_version", "geometry", "dataset", "gan", "mlp", "cnn", "screening"},
        "");
    detail::read_key(j, "seed", c.seed, "");
    detail::read_key(j, "oracle_version", c.oracle_pin, "");
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        if (!g.is_object()) throw usage_error("config key geometry must be an object");
        detail::reject_unknown_keys(g, {"cell_side_mm", "loop_inset_mm"}, "geometry.");
        detail::read_key(g, "cell_side_mm", c.cell_side_mm, "geometry.");
        detail::read_key(g, "loop_inset_mm", c.loop_inset_mm, "geometry.");
    }
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        if (!d.is_object()) throw usage_error("config key dataset must be an object");
        detail::reject_unknown_keys(d, {"n", "format"}, "dataset.");
        detail::read_key(d, "n", c.dataset_n, "dataset.");
        detail::read_key(d, "format", c.dataset_format, "dataset.");
    }
    if (j.contains("gan")) {
        const auto& g = j.at("gan");
        if (!g.is_object()) throw usage_error("config key gan must be an object");
        detail::reject_unknown_keys(
            g,
            {"iterations", "batch_size", "lr", "weight_decay", "weight_decay_mode",
             "bn_momentum", "conditional_critic", "critic_steps_per_gen_step", "noise_draws",
             "predict_policy", "snapshot_every", "val_fraction"},
            "gan.");
        detail::read_key(g, "iterations", c.gan.iterations, "gan.");
        detail::read_key(g, "batch_size", c.gan.batch_size, "gan.");
        detail::read_key(g, "lr", c.gan.lr, "gan.");
        detail::read_key(g, "weight_decay", c.gan.weight_decay, "gan.");
        detail::read_key(g, "bn_momentum", c.gan.bn_momentum, "gan.");
        detail::read_key(g, "conditional_critic", c.gan.conditional_critic, "gan.");
        detail::read_key(g, "critic_steps_per_gen_step", c.gan.critic_steps_per_gen_step,
                         "gan.");
        detail::read_key(g, "noise_draws", c.gan.noise_draws, "gan.");
        detail::read_key(g, "snapshot_every", c.gan.snapshot_every, "gan.");
        detail::read_key(g, "val_fraction", c.gan.val_fraction, "gan.");
        if (g.contains("weight_decay_mode")) {
            std::string mode;
            detail::read_key(g, "weight_decay_mode", mode, "gan.");
            if (mode == "decay") c.gan.wd_clip_mode = false;
            else if (mode == "clip") c.gan.wd_clip_mode = true;
            else throw usage_error("gan.weight_decay_mode must be \"decay\" or \"clip\"");
        }
        if (g.contains("predict_policy")) {
            std::string pol;
            detail::read_key(g, "predict_policy", pol, "gan.");
            if (pol == "fixed_zero") c.gan.predict_policy = noise_policy::fixed_zero;
            else if (pol == "average") c.gan.predict_policy = noise_policy::average;
            else throw usage_error("gan.predict_policy must be \"fixed_zero\" or \"average\"");
        }
    }
    auto read_baseline = [&j](const char* name, baseline_config& cfg) {
        if (!j.contains(name)) return;
        const auto& b = j.at(name);
        if (!b.is_object()) throw usage_error(std::string("config key ") + name +
                                              " must be an object");
        std::string prefix = std::string(name) + ".";
        detail::reject_unknown_keys(b, {"epochs", "batch_size", "lr", "weight_decay"}, prefix);
        detail::read_key(b, "epochs", cfg.epochs, prefix);
        detail::read_key(b, "batch_size", cfg.batch_size, prefix);
        detail::read_key(b, "lr", cfg.lr, prefix);
        detail::read_key(b, "weight_decay", cfg.weight_decay, prefix);
    };
    read_baseline("mlp", c.mlp);
    read_baseline("cnn", c.cnn);
    if (j.contains("screening")) {
        const auto& s = j.at("screening");
        if (!s.is_object()) throw usage_error("config key screening must be an object");
        detail::reject_unknown_keys(s,
                                    {"n", "top_k", "min_zbw_mhz", "max_ar_min_db", "w_zbw",
                                     "w_ar5bw", "w_ar", "w_gain"},
                                    "screening.");
        detail::read_key(s, "n", c.screening_n, "screening.");
        detail::read_key(s, "top_k", c.screening_top_k, "screening.");
        detail::read_key(s, "min_zbw_mhz", c.criteria.min_zbw_mhz, "screening.");
        detail::read_key(s, "max_ar_min_db", c.criteria.max_ar_min_db, "screening.");
        detail::read_key(s, "w_zbw", c.criteria.w_zbw, "screening.");
        detail::read_key(s, "w_ar5bw", c.criteria.w_ar5bw, "screening.");
        detail::read_key(s, "w_ar", c.criteria.w_ar, "screening.");
        detail::read_key(s, "w_gain", c.criteria.w_gain, "screening.");
    }
    if (c.oracle_pin != oracle_version)
        throw version_error("config pins oracle version \"" + c.oracle_pin +
                            "\", this build provides \"" + std::string(oracle_version) + "\"");
    return c;
}

inline run_config load_run_config(const std::string& path) {
    return parse_run_config(read_file(path));
}

// Canonical one-line summary of the default protocol. Frozen by a test so
// any drift in a default is caught as a fingerprint change.
inline std::string protocol_fingerprint_string(const run_config& c = {}) {
    std::string s;
    s += "pairs=" + std::to_string(c.dataset_n);
    s += ";val_fraction=" + format_double(c.gan.val_fraction);
    s += ";cv_folds=10";
    s += ";iterations=" + std::to_string(c.gan.iterations);
    s += ";batch=" + std::to_string(c.gan.batch_size);
    s += ";lr=" + format_double(c.gan.lr);
    s += ";weight_decay=" + format_double(c.gan.weight_decay);
    s += ";bn_momentum=" + format_double(c.gan.bn_momentum);
    s += ";latent=" + std::to_string(latent_dim);
    network gen = build_generator();
    s += ";generator=" + std::to_string(gen.in_dim());
    for (const auto& blk : gen.blocks) s += "/" + std::to_string(blk.fc.out);
    network critic = build_critic(c.gan.conditional_critic);
    s += ";critic=" + std::to_string(critic.in_dim());
    for (const auto& blk : critic.blocks) s += "/" + std::to_string(blk.fc.out);
    s += ";critic_out=sigmoid";
    s += ";pool=" + std::to_string(c.screening_n);
    return s;
}

inline std::uint64_t protocol_fingerprint(const run_config& c = {}) {
    return fnv1a64(protocol_fingerprint_string(c));
}

}  // namespace fpc
