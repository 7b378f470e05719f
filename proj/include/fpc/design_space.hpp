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
// Design space of a square unit cell: a dielectric loop inset from the cell
// boundary carries a single ring of candidate anchor positions ("slots") for
// 0.5 mm metal bricks. A design places exactly 36 distinct bricks on slots.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fpc/common.hpp"

namespace fpc {

inline constexpr double brick_mm = 0.5;   // brick edge, fixed by the process
inline constexpr int bricks_per_design = 36;
inline constexpr int design_dim = 72;     // 36 (x, y) pairs, interleaved

struct cell_geometry {
    double side_mm = 30.0;   // cell edge length
    double inset_mm = 2.0;   // loop inset from the cell boundary

    // Count of brick anchor positions along one ring edge, corners included.
    int slots_per_edge() const {
        return static_cast<int>(std::floor((side_mm - 2.0 * inset_mm) / brick_mm));
    }
    // Anchor ring bounds: a brick anchored at (x, y) occupies
    // [x, x+brick] x [y, y+brick], which must stay inside the loop band.
    double ring_lo() const { return inset_mm; }
    double ring_hi() const { return inset_mm + (slots_per_edge() - 1) * brick_mm; }
    // Distinct slots on the closed ring (the 4 corners are shared by 2 edges).
    int total_slots() const { return 4 * slots_per_edge() - 4; }

    static cell_geometry make(double side_mm, double inset_mm) {
        cell_geometry g{side_mm, inset_mm};
        if (!(side_mm > 0.0) || !(inset_mm >= 0.0))
            throw usage_error("cell geometry: side must be positive and inset non-negative");
        if (side_mm - 2.0 * inset_mm < 2.0 * brick_mm)
            throw usage_error("cell geometry: loop span too small for a slot ring");
        if (g.slots_per_edge() < 2)
            throw usage_error("cell geometry: fewer than 2 slots per edge");
        return g;
    }
};

enum class edge : std::uint8_t { bottom = 0, right = 1, top = 2, left = 3 };

inline const char* edge_name(edge e) {
    switch (e) {
        case edge::bottom: return "bottom";
        case edge::right: return "right";
        case edge::top: return "top";
        case edge::left: return "left";
    }
    return "?";
}

struct slot_coordinate {
    edge e = edge::bottom;
    int offset_index = 0;  // steps of brick_mm from the edge's low corner
    double x_mm = 0.0;
    double y_mm = 0.0;
};

// All distinct slots, in the canonical order (bottom, right, top, left; each
// ascending by offset). Corner ownership follows ring order: bottom keeps both
// of its corners, right and top keep their far corner, left keeps none.
inline std::vector<slot_coordinate> enumerate_slots(const cell_geometry& g) {
    const int s = g.slots_per_edge();
    const double lo = g.ring_lo();
    std::vector<slot_coordinate> out;
    out.reserve(static_cast<std::size_t>(g.total_slots()));
    auto at = [&](int k) { return lo + k * brick_mm; };
    for (int k = 0; k < s; ++k) out.push_back({edge::bottom, k, at(k), lo});
    for (int k = 1; k < s; ++k) out.push_back({edge::right, k, at(s - 1), at(k)});
    for (int k = 0; k < s - 1; ++k) out.push_back({edge::top, k, at(k), at(s - 1)});
    for (int k = 1; k < s - 1; ++k) out.push_back({edge::left, k, lo, at(k)});
    return out;
}

struct unit_cell_design {
    cell_geometry geometry;
    std::vector<slot_coordinate> bricks;  // canonical order, size 36
};

using design_vector = std::array<double, design_dim>;

namespace detail {
// Quantized integer key; slot coordinates are multiples of 0.5 mm, so the
// doubled values are exactly representable integers.
inline std::pair<long long, long long> slot_key(double x, double y) {
    return {std::llround(x * 2.0), std::llround(y * 2.0)};
}
inline bool canonical_less(const slot_coordinate& a, const slot_coordinate& b) {
    if (a.e != b.e) return static_cast<int>(a.e) < static_cast<int>(b.e);
    return a.offset_index < b.offset_index;
}
}  // namespace detail

inline void canonicalize(unit_cell_design& d) {
    std::sort(d.bricks.begin(), d.bricks.end(), detail::canonical_less);
}

// Uniform draw of 36 distinct slots via partial Fisher-Yates on the slot list.
inline unit_cell_design sample_design(const cell_geometry& g, std::uint64_t seed) {
    auto slots = enumerate_slots(g);
    const int n = static_cast<int>(slots.size());
    if (n < bricks_per_design)
        throw usage_error("sample_design: geometry provides " + std::to_string(n) +
                          " slots, need " + std::to_string(bricks_per_design));
    rng_engine eng = make_engine(seed);
    std::vector<int> idx(slots.size());
    for (int i = 0; i < n; ++i) idx[i] = i;
    unit_cell_design d{g, {}};
    d.bricks.reserve(bricks_per_design);
    for (int i = 0; i < bricks_per_design; ++i) {
        int j = i + static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
        d.bricks.push_back(slots[idx[i]]);
    }
    canonicalize(d);
    return d;
}

// Structural checks; returns human-readable violations, empty when valid.
inline std::vector<std::string> validate_design(const unit_cell_design& d) {
    std::vector<std::string> v;
    if (static_cast<int>(d.bricks.size()) != bricks_per_design) {
        v.push_back("expected 36 bricks, found " + std::to_string(d.bricks.size()));
    }
    const auto slots = enumerate_slots(d.geometry);
    for (std::size_t i = 0; i < d.bricks.size(); ++i) {
        const auto& b = d.bricks[i];
        std::ostringstream os;
        double rx = b.x_mm * 2.0, ry = b.y_mm * 2.0;
        if (std::abs(rx - std::llround(rx)) > 1e-9 || std::abs(ry - std::llround(ry)) > 1e-9) {
            os << "brick " << i << " off the 0.5 mm grid: (" << b.x_mm << ", " << b.y_mm << ")";
            v.push_back(os.str());
            continue;
        }
        auto key = detail::slot_key(b.x_mm, b.y_mm);
        bool found = false;
        for (const auto& s : slots) {
            if (detail::slot_key(s.x_mm, s.y_mm) == key) {
                found = true;
                if (s.e != b.e || s.offset_index != b.offset_index) {
                    os << "brick " << i << " edge/offset tag mismatch at (" << b.x_mm << ", "
                       << b.y_mm << ")";
                    v.push_back(os.str());
                }
                break;
            }
        }
        if (!found) {
            os << "brick " << i << " not on the slot ring: (" << b.x_mm << ", " << b.y_mm << ")";
            v.push_back(os.str());
        }
    }
    for (std::size_t i = 0; i < d.bricks.size(); ++i)
        for (std::size_t j = i + 1; j < d.bricks.size(); ++j)
            if (detail::slot_key(d.bricks[i].x_mm, d.bricks[i].y_mm) ==
                detail::slot_key(d.bricks[j].x_mm, d.bricks[j].y_mm))
                v.push_back("duplicate slot at index " + std::to_string(i) + "," +
                            std::to_string(j));
    for (std::size_t i = 1; i < d.bricks.size(); ++i)
        if (detail::canonical_less(d.bricks[i], d.bricks[i - 1])) {
            v.push_back("bricks not in canonical (edge, offset) order");
            break;
        }
    return v;
}

// Emits in canonical order regardless of the input list order, so designs
// holding the same slot set encode identically.
inline design_vector encode(const unit_cell_design& d) {
    if (static_cast<int>(d.bricks.size()) != bricks_per_design)
        throw usage_error("encode: expected 36 bricks, found " + std::to_string(d.bricks.size()));
    unit_cell_design c = d;
    canonicalize(c);
    design_vector x{};
    for (int i = 0; i < bricks_per_design; ++i) {
        x[2 * i] = c.bricks[i].x_mm;
        x[2 * i + 1] = c.bricks[i].y_mm;
    }
    return x;
}

// Snap tolerance for decoding free-floating coordinates back onto slots:
// half a brick on each axis.
inline constexpr double decode_snap_mm = 0.25;

inline unit_cell_design decode_design(const design_vector& x, const cell_geometry& g) {
    const auto slots = enumerate_slots(g);
    unit_cell_design d{g, {}};
    d.bricks.reserve(bricks_per_design);
    for (int i = 0; i < bricks_per_design; ++i) {
        const double px = x[2 * i], py = x[2 * i + 1];
        const slot_coordinate* best = nullptr;
        double best_d2 = 0.0;
        for (const auto& s : slots) {
            double dx = std::abs(px - s.x_mm), dy = std::abs(py - s.y_mm);
            if (dx > decode_snap_mm + 1e-9 || dy > decode_snap_mm + 1e-9) continue;
            double d2 = dx * dx + dy * dy;
            if (!best || d2 < best_d2) {  // ties keep canonical-order slot (list order)
                best = &s;
                best_d2 = d2;
            }
        }
        if (!best) {
            std::ostringstream os;
            os << "decode: coordinate " << i << " (" << px << ", " << py
               << "): no slot within tolerance (" << decode_snap_mm << " mm)";
            throw usage_error(os.str());
        }
        d.bricks.push_back(*best);
    }
    canonicalize(d);
    auto v = validate_design(d);
    if (!v.empty()) throw usage_error("decode: " + v.front());
    return d;
}

// Coordinates scaled by the cell side; values lie in [0, 1].
inline std::array<double, design_dim> normalize_design(const design_vector& x,
                                                       const cell_geometry& g) {
    std::array<double, design_dim> u{};
    for (int i = 0; i < design_dim; ++i) u[i] = x[i] / g.side_mm;
    return u;
}

inline design_vector denormalize_design(const std::array<double, design_dim>& u,
                                        const cell_geometry& g) {
    design_vector x{};
    for (int i = 0; i < design_dim; ++i) x[i] = u[i] * g.side_mm;
    return x;
}

struct occupancy_grid {
    int resolution = 60;
    std::vector<std::uint8_t> cells;  // row-major, cells[row * resolution + col]

    int popcount() const {
        int c = 0;
        for (auto v : cells) c += (v != 0);
        return c;
    }
};

// Binary raster of brick anchors; at the default resolution (side / brick)
// one pixel is exactly one brick footprint.
inline occupancy_grid rasterize(const unit_cell_design& d, int resolution = 60) {
    if (resolution <= 0) throw usage_error("rasterize: resolution must be positive");
    occupancy_grid grid;
    grid.resolution = resolution;
    grid.cells.assign(static_cast<std::size_t>(resolution) * resolution, 0);
    const double pixel = d.geometry.side_mm / resolution;
    for (const auto& b : d.bricks) {
        int col = static_cast<int>(std::floor(b.x_mm / pixel));
        int row = static_cast<int>(std::floor(b.y_mm / pixel));
        col = std::clamp(col, 0, resolution - 1);
        row = std::clamp(row, 0, resolution - 1);
        grid.cells[static_cast<std::size_t>(row) * resolution + col] = 1;
    }
    return grid;
}

// One text line: 72 space-separated mm values, exact round trip.
inline std::string design_to_line(const design_vector& x) {
    std::string s;
    for (int i = 0; i < design_dim; ++i) {
        if (i) s.push_back(' ');
        s += format_double(x[i]);
    }
    return s;
}

inline design_vector design_from_line(const std::string& line) {
    design_vector x{};
    const char* p = line.c_str();
    char* end = nullptr;
    for (int i = 0; i < design_dim; ++i) {
        x[i] = std::strtod(p, &end);
        if (end == p)
            throw usage_error("design line: expected 72 numeric values, got " +
                              std::to_string(i));
        p = end;
    }
    while (*p == ' ' || *p == '\t' || *p == '\r' || *p == '\n') ++p;
    if (*p != '\0') throw usage_error("design line: trailing content after 72 values");
    return x;
}

}  // namespace fpc
