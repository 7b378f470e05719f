// SPDX-License-Identifier: Apache-2.0
// fpc-surrogate tests: oracle feature reductions, closed-form spectra,
// metric extraction, and the frozen reference-design values.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fpc/em_oracle.hpp"

using namespace fpc;

namespace {

slot_coordinate find_slot(const std::vector<slot_coordinate>& slots, edge e, double x, double y) {
    for (const auto& s : slots)
        if (s.e == e && s.x_mm == x && s.y_mm == y) return s;
    FAIL("no slot at (" << x << ", " << y << ")");
    return {};
}

// Diagonally symmetric 36-brick design with m_x = m_y = 0.5 exactly, asym = 0
// exactly, and fine summing to ~1e-15 (sine terms cancel in pi-shifted and
// full-period groups). Frozen oracle values: f_r 2.45 GHz, ar_min 0.3 dB,
// peak gain 9.4 dBi, return loss at resonance -25 dB.
unit_cell_design balanced_reference(const cell_geometry& g) {
    auto slots = enumerate_slots(g);
    const std::vector<double> ring = {3, 4, 5, 6, 7, 23, 24, 25, 26, 27};
    const std::vector<double> band = {13, 14, 16, 17, 20.5, 21.5, 23.5, 24.5};
    unit_cell_design d{g, {}};
    for (double x : ring) d.bricks.push_back(find_slot(slots, edge::bottom, x, 2.0));
    for (double y : ring) d.bricks.push_back(find_slot(slots, edge::left, 2.0, y));
    for (double x : band) d.bricks.push_back(find_slot(slots, edge::top, x, 27.5));
    for (double y : band) d.bricks.push_back(find_slot(slots, edge::right, 27.5, y));
    canonicalize(d);
    return d;
}

}  // namespace

TEST_CASE("frequency grid endpoints and spacing") {
    frequency_grid g;
    CHECK(g.at(0) == 2.0);
    CHECK(g.at(100) == 3.0);
    CHECK(g.points == 101);
    CHECK(std::abs(g.spacing() - 0.01) < 1e-15);
}

TEST_CASE("features: diagonal symmetry gives asym exactly 0") {
    cell_geometry g;
    auto d = balanced_reference(g);
    REQUIRE(validate_design(d).empty());
    auto f = compute_features(d);
    CHECK(f.asym == 0.0);
    CHECK(f.m_x == 0.5);
    CHECK(f.m_y == 0.5);
    CHECK(std::abs(f.fine) < 1e-12);
}

TEST_CASE("features: all bricks on the bottom edge pin m_y to inset/side") {
    cell_geometry g;
    auto slots = enumerate_slots(g);
    unit_cell_design d{g, {}};
    for (const auto& s : slots)
        if (s.e == edge::bottom && s.offset_index < 36) d.bricks.push_back(s);
    REQUIRE(d.bricks.size() == 36);
    auto f = compute_features(d);
    CHECK(std::abs(f.m_y - 2.0 / 30.0) < 1e-15);
}

TEST_CASE("features: fine stays within [-1, 1] over sampled designs") {
    cell_geometry g;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto f = compute_features(sample_design(g, seed));
        CHECK(f.fine >= -1.0);
        CHECK(f.fine <= 1.0);
        CHECK(f.m_x >= 0.0);
        CHECK(f.m_x <= 1.0);
        CHECK(f.asym >= 0.0);
        CHECK(f.asym <= 1.0);
        CHECK(f.spread >= 0.0);
        CHECK(f.spread <= 1.0);
    }
}

TEST_CASE("balanced reference reproduces the frozen headline values") {
    cell_geometry g;
    auto d = balanced_reference(g);
    auto r = oracle_evaluate(d);
    auto m = extract_metrics(r);
    CHECK(std::abs(m.f_res_ghz - 2.45) < 1e-12);
    CHECK(std::abs(m.ar_min_db - 0.3) < 1e-12);
    CHECK(std::abs(m.gain_at_res_dbi - 9.4) < 1e-12);
    // return loss at resonance equals the full -25 dB depth (asym = 0)
    int i_res = 45;
    CHECK(std::abs(r.rl_db[i_res] - (-25.0)) < 1e-9);
}

TEST_CASE("asym=1 design: ar floor 7.3 dB, no 5 dB band") {
    cell_geometry g;
    auto slots = enumerate_slots(g);
    unit_cell_design d{g, {}};
    for (const auto& s : slots)
        if (s.e == edge::left && s.offset_index >= 1 && s.offset_index <= 36)
            d.bricks.push_back(s);
    REQUIRE(d.bricks.size() == 36);
    auto f = compute_features(d);
    CHECK(f.asym == 1.0);
    auto m = extract_metrics(oracle_evaluate(d));
    CHECK(m.ar_min_db >= 7.3 - 1e-9);
    CHECK(m.ar5bw_mhz == 0.0);
}

TEST_CASE("analytic Lorentzian: zbw 100 MHz to interpolation accuracy") {
    frequency_grid grid;
    antenna_response r;
    r.ar_db.assign(101, 3.0);
    r.rl_db.resize(101);
    r.gain_dbi.assign(101, 5.0);
    for (int i = 0; i < 101; ++i) {
        double u = (grid.at(i) - 2.45) / 0.05;
        r.rl_db[i] = -20.0 / (1.0 + u * u);
    }
    auto m = extract_metrics(r, grid);
    CHECK(std::abs(m.zbw_mhz - 100.0) < 1e-6);
    CHECK(std::abs(m.f_res_ghz - 2.45) < 1e-12);

    // doubling the grid density moves the interpolated width by well under 1 MHz
    frequency_grid dense{2.0, 3.0, 201};
    antenna_response r2;
    r2.ar_db.assign(201, 3.0);
    r2.rl_db.resize(201);
    r2.gain_dbi.assign(201, 5.0);
    for (int i = 0; i < 201; ++i) {
        double u = (dense.at(i) - 2.45) / 0.05;
        r2.rl_db[i] = -20.0 / (1.0 + u * u);
    }
    auto m2 = extract_metrics(r2, dense);
    CHECK(std::abs(m2.zbw_mhz - m.zbw_mhz) < 1.0);
}

TEST_CASE("constant curves: full-span and zero bandwidths") {
    frequency_grid grid;
    antenna_response r;
    r.ar_db.assign(101, 3.0);
    r.rl_db.assign(101, -5.0);
    r.gain_dbi.assign(101, 5.0);
    auto m = extract_metrics(r, grid);
    CHECK(m.ar5bw_mhz == 1000.0);
    CHECK(m.ar_min_db == 3.0);
    CHECK(m.zbw_mhz == 0.0);
}

TEST_CASE("one brick across the diagonal shifts ar floor by 14/36 dB") {
    cell_geometry g;
    auto base = balanced_reference(g);
    auto p0 = oracle_params_from(compute_features(base));

    auto slots = enumerate_slots(g);
    auto moved = base;
    for (std::size_t i = 0; i < moved.bricks.size(); ++i)
        if (moved.bricks[i].e == edge::bottom && moved.bricks[i].x_mm == 3.0) {
            moved.bricks[i] = find_slot(slots, edge::left, 2.0, 10.0);
            break;
        }
    canonicalize(moved);
    REQUIRE(validate_design(moved).empty());
    auto f1 = compute_features(moved);
    CHECK(std::abs(f1.asym - 2.0 / 36.0) < 1e-15);
    auto p1 = oracle_params_from(f1);
    CHECK(std::abs((p1.ar_floor_db - p0.ar_floor_db) - 14.0 / 36.0) < 1e-9);

    // grid-sampled minimum tracks the floor to within one sampling step
    auto m1 = extract_metrics(oracle_evaluate(moved));
    CHECK(std::abs(m1.ar_min_db - p1.ar_floor_db) < 0.02);
}

TEST_CASE("response vector segments are (ar, rl, gain)") {
    cell_geometry g;
    auto r = oracle_evaluate(sample_design(g, 17));
    auto base = flatten_response(r);

    auto bumped = r;
    bumped.ar_db[50] += 1.0;
    auto v = flatten_response(bumped);
    int first_(0), second_(0), third_(0);
    for (int i = 0; i < 101; ++i) first_ += v[i] != base[i];
    for (int i = 101; i < 202; ++i) second_ += v[i] != base[i];
    for (int i = 202; i < 303; ++i) third_ += v[i] != base[i];
    CHECK(first_ == 1);
    CHECK(second_ == 0);
    CHECK(third_ == 0);

    bumped = r;
    bumped.gain_dbi[50] += 1.0;
    v = flatten_response(bumped);
    first_ = second_ = third_ = 0;
    for (int i = 0; i < 101; ++i) first_ += v[i] != base[i];
    for (int i = 101; i < 202; ++i) second_ += v[i] != base[i];
    for (int i = 202; i < 303; ++i) third_ += v[i] != base[i];
    CHECK(first_ == 0);
    CHECK(second_ == 0);
    CHECK(third_ == 1);

    auto back = unflatten_response(base);
    CHECK(back.ar_db == r.ar_db);
    CHECK(back.rl_db == r.rl_db);
    CHECK(back.gain_dbi == r.gain_dbi);
}

TEST_CASE("physical sanity bounds hold over sampled designs") {
    cell_geometry g;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto r = oracle_evaluate(sample_design(g, seed));
        for (int i = 0; i < 101; ++i) {
            CHECK(r.rl_db[i] <= 0.0);
            CHECK(r.ar_db[i] >= 0.0);
            CHECK(r.gain_dbi[i] >= 3.0);
            CHECK(r.gain_dbi[i] <= 10.0);
            CHECK(std::isfinite(r.rl_db[i]));
        }
    }
}

TEST_CASE("oracle is bitwise deterministic") {
    cell_geometry g;
    auto d = sample_design(g, 31);
    auto a = flatten_response(oracle_evaluate(d));
    auto b = flatten_response(oracle_evaluate(d));
    for (int i = 0; i < response_dim; ++i) CHECK(a[i] == b[i]);
}
