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
// Seeded design/response datasets and the FPCD v1 on-disk formats.
//
// Binary layout (all integers and doubles little-endian):
//   "FPCD" | u32 version=1 | u32 n | u32 design_dim=72 | u32 resp_dim=303
//   n records of 72+303 f64 (design then response)
//   footer: oracle version string (u32 length + bytes) | u64 master_seed
//           | f64 cell_side_mm | f64 loop_inset_mm
// The CSV twin holds the same values in decimal (exact round-trip formatting)
// with the footer as trailing '#' comment lines.

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/design_space.hpp"
#include "fpc/em_oracle.hpp"

namespace fpc {

struct dataset_entry {
    design_vector x{};
    response_vector y{};
};

struct dataset {
    cell_geometry geometry;
    std::uint64_t master_seed = 0;
    std::string oracle_ver = oracle_version;
    std::vector<dataset_entry> entries;
};

// Fingerprint of the data itself (decoded values, not the file encoding),
// so the csv and binary forms of one dataset share a fingerprint.
inline std::uint64_t dataset_fingerprint(const dataset& ds) {
    std::uint64_t h = fnv1a_offset;
    for (const auto& e : ds.entries) {
        for (double v : e.x) h = fnv1a64_f64(v, h);
        for (double v : e.y) h = fnv1a64_f64(v, h);
    }
    return h;
}

// Entry i is drawn from child_seed(master_seed, i); generation order is
// therefore immaterial and regeneration is bit-exact.
inline dataset generate_dataset(const cell_geometry& g, int n, std::uint64_t master_seed) {
    if (n <= 0) throw usage_error("generate_dataset: n must be positive");
    dataset ds{g, master_seed, oracle_version, {}};
    ds.entries.resize(n);
    for (int i = 0; i < n; ++i) {
        unit_cell_design d = sample_design(g, child_seed(master_seed, i));
        ds.entries[i].x = encode(d);
        ds.entries[i].y = flatten_response(oracle_evaluate(d));
        for (double v : ds.entries[i].y)
            if (!std::isfinite(v)) throw numeric_error("generate_dataset: non-finite response");
    }
    return ds;
}

// ---- binary form --------------------------------------------------------

inline void save_dataset_bin(const dataset& ds, const std::string& path) {
    std::string buf;
    buf.reserve(16 + ds.entries.size() * (design_dim + response_dim) * 8 + 64);
    buf += "FPCD";
    put_u32(buf, 1);
    put_u32(buf, static_cast<std::uint32_t>(ds.entries.size()));
    put_u32(buf, design_dim);
    put_u32(buf, response_dim);
    for (const auto& e : ds.entries) {
        for (double v : e.x) put_f64(buf, v);
        for (double v : e.y) put_f64(buf, v);
    }
    put_str(buf, ds.oracle_ver);
    put_u64(buf, ds.master_seed);
    put_f64(buf, ds.geometry.side_mm);
    put_f64(buf, ds.geometry.inset_mm);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("write failed: " + path);
}

inline dataset load_dataset_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    byte_reader r(buf);
    r.need(4);
    if (std::string(buf, 0, 4) != "FPCD") throw io_error("not an FPCD file: " + path);
    r.pos = 4;
    std::uint32_t version = r.u32();
    if (version != 1)
        throw version_error("unsupported FPCD version " + std::to_string(version));
    std::uint32_t n = r.u32(), dd = r.u32(), rd = r.u32();
    if (dd != design_dim || rd != response_dim)
        throw io_error("FPCD dimension mismatch in " + path);
    dataset ds;
    ds.entries.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (int j = 0; j < design_dim; ++j) ds.entries[i].x[j] = r.f64();
        for (int j = 0; j < response_dim; ++j) ds.entries[i].y[j] = r.f64();
    }
    ds.oracle_ver = r.str();
    ds.master_seed = r.u64();
    double side = r.f64(), inset = r.f64();
    ds.geometry = cell_geometry::make(side, inset);
    for (const auto& e : ds.entries)
        for (double v : e.y)
            if (!std::isfinite(v)) throw numeric_error("non-finite response in " + path);
    return ds;
}

// ---- csv form -----------------------------------------------------------

inline std::string dataset_csv_header() {
    std::string h;
    for (int i = 0; i < design_dim; ++i) h += "x" + std::to_string(i) + ",";
    for (int i = 0; i < response_points; ++i) h += "ar" + std::to_string(i) + ",";
    for (int i = 0; i < response_points; ++i) h += "rl" + std::to_string(i) + ",";
    for (int i = 0; i < response_points; ++i) {
        h += "g" + std::to_string(i);
        if (i + 1 < response_points) h += ",";
    }
    return h;
}

inline void save_dataset_csv(const dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << dataset_csv_header() << "\n";
    for (const auto& e : ds.entries) {
        std::string line;
        for (int j = 0; j < design_dim; ++j) {
            line += format_double(e.x[j]);
            line += ",";
        }
        for (int j = 0; j < response_dim; ++j) {
            line += format_double(e.y[j]);
            if (j + 1 < response_dim) line += ",";
        }
        out << line << "\n";
    }
    out << "# oracle_version=" << ds.oracle_ver << "\n";
    out << "# master_seed=" << ds.master_seed << "\n";
    out << "# cell_side_mm=" << format_double(ds.geometry.side_mm) << "\n";
    out << "# loop_inset_mm=" << format_double(ds.geometry.inset_mm) << "\n";
    if (!out) throw io_error("write failed: " + path);
}

inline dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty csv: " + path);
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != dataset_csv_header()) throw io_error("unexpected csv header in " + path);
    dataset ds;
    double side = 30.0, inset = 2.0;
    bool have_side = false, have_inset = false, have_ver = false, have_seed = false;
    while (std::getline(in, line)) {
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            while (!key.empty() && key.front() == ' ') key.erase(key.begin());
            std::string val = line.substr(eq + 1);
            if (key == "oracle_version") { ds.oracle_ver = val; have_ver = true; }
            else if (key == "master_seed") { ds.master_seed = std::strtoull(val.c_str(), nullptr, 10); have_seed = true; }
            else if (key == "cell_side_mm") { side = std::strtod(val.c_str(), nullptr); have_side = true; }
            else if (key == "loop_inset_mm") { inset = std::strtod(val.c_str(), nullptr); have_inset = true; }
            continue;
        }
        dataset_entry e;
        const char* p = line.c_str();
        char* end = nullptr;
        for (int j = 0; j < design_dim + response_dim; ++j) {
            double v = std::strtod(p, &end);
            if (end == p) throw io_error("short csv row in " + path);
            if (j < design_dim) e.x[j] = v;
            else e.y[j - design_dim] = v;
            p = end;
            if (*p == ',') ++p;
        }
        ds.entries.push_back(e);
    }
    if (!(have_ver && have_seed && have_side && have_inset))
        throw io_error("missing footer metadata in " + path);
    ds.geometry = cell_geometry::make(side, inset);
    for (const auto& e : ds.entries)
        for (double v : e.y)
            if (!std::isfinite(v)) throw numeric_error("non-finite response in " + path);
    return ds;
}

inline void save_dataset(const dataset& ds, const std::string& path, const std::string& format) {
    if (format == "bin") save_dataset_bin(ds, path);
    else if (format == "csv") save_dataset_csv(ds, path);
    else throw usage_error("unknown dataset format: " + format);
}

inline dataset load_dataset(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw io_error("cannot open: " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::string(magic, 4) == "FPCD") return load_dataset_bin(path);
    return load_dataset_csv(path);
}

// ---- splits and response normalization ----------------------------------

struct data_split {
    std::vector<std::uint32_t> train_idx;
    std::vector<std::uint32_t> val_idx;
};

// Seeded shuffle, last `val_fraction` of the permutation is validation.
inline data_split make_split(int n, double val_fraction, std::uint64_t seed) {
    if (n < 2) throw usage_error("make_split: need at least 2 entries");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    rng_engine eng = make_engine(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }
    int n_val = static_cast<int>(std::lround(n * val_fraction));
    n_val = std::clamp(n_val, 1, n - 1);
    data_split s;
    s.train_idx.assign(idx.begin(), idx.end() - n_val);
    s.val_idx.assign(idx.end() - n_val, idx.end());
    return s;
}

// k folds covering every index exactly once as validation.
inline std::vector<data_split> make_folds(int n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw usage_error("make_folds: bad fold count");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    rng_engine eng = make_engine(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }
    std::vector<data_split> folds(k);
    for (int f = 0; f < k; ++f) {
        int lo = static_cast<int>(static_cast<long long>(n) * f / k);
        int hi = static_cast<int>(static_cast<long long>(n) * (f + 1) / k);
        for (int i = 0; i < n; ++i) {
            if (i >= lo && i < hi) folds[f].val_idx.push_back(idx[i]);
            else folds[f].train_idx.push_back(idx[i]);
        }
    }
    return folds;
}

// Per-dimension min/max of responses over the *training* indices only;
// maps responses affinely to [-1, 1].
struct response_norm {
    std::array<double, response_dim> lo{};
    std::array<double, response_dim> hi{};

    double to_unit(int j, double v) const {
        double range = hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
        if (range < 1e-12) return 0.0;
        return 2.0 * (v - lo[static_cast<std::size_t>(j)]) / range - 1.0;
    }
    double from_unit(int j, double u) const {
        double range = hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
        if (range < 1e-12) return lo[static_cast<std::size_t>(j)];
        return lo[static_cast<std::size_t>(j)] + (u + 1.0) * 0.5 * range;
    }
};

inline response_norm compute_response_norm(const dataset& ds,
                                           const std::vector<std::uint32_t>& train_idx) {
    if (train_idx.empty()) throw usage_error("compute_response_norm: empty training set");
    response_norm nm;
    for (int j = 0; j < response_dim; ++j) {
        nm.lo[j] = ds.entries[train_idx[0]].y[j];
        nm.hi[j] = nm.lo[j];
    }
    for (std::uint32_t i : train_idx)
        for (int j = 0; j < response_dim; ++j) {
            nm.lo[j] = std::min(nm.lo[j], ds.entries[i].y[j]);
            nm.hi[j] = std::max(nm.hi[j], ds.entries[i].y[j]);
        }
    return nm;
}

// Fingerprint binding split indices and normalization stats; every model in a
// benchmark run must observe the identical value.
inline std::uint64_t pipeline_fingerprint(const data_split& s, const response_norm& nm) {
    std::uint64_t h = fnv1a_offset;
    for (std::uint32_t u : s.train_idx) h = fnv1a64(&u, 4, h);
    for (std::uint32_t u : s.val_idx) h = fnv1a64(&u, 4, h);
    for (double v : nm.lo) h = fnv1a64_f64(v, h);
    for (double v : nm.hi) h = fnv1a64_f64(v, h);
    return h;
}

}  // namespace fpc
