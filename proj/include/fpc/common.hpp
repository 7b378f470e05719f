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

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fpc {

inline constexpr const char* tool_version = "fpc-surrogate/1.0.0";

// Error taxonomy; the CLI maps these to process exit codes.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;  // exit 1
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;  // exit 2
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;  // exit 3 (NaN/Inf guard)
};
struct version_error : std::runtime_error {
    using std::runtime_error::runtime_error;  // exit 4 (artifact version pin)
};

// ---- hashing ------------------------------------------------------------

inline constexpr std::uint64_t fnv1a_offset = 14695981039346656037ull;
inline constexpr std::uint64_t fnv1a_prime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = fnv1a_offset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= fnv1a_prime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = fnv1a_offset) {
    return fnv1a64(s.data(), s.size(), h);
}

// Feed a double into a running FNV-1a hash as its little-endian bytes.
inline std::uint64_t fnv1a64_f64(double v, std::uint64_t h) {
    auto u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    return fnv1a64(b, 8, h);
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---- seeding ------------------------------------------------------------
//
// All randomness flows from std::mt19937_64 (bit-portable engine) through the
// hand-rolled draws below, so results do not depend on the standard library's
// distribution implementations. Seeds are scrambled with SplitMix64.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t s = seed;
    return splitmix64(s);
}

// Per-entry child seed: independent of evaluation order across indices.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master + (index + 1) * 0x9E3779B97F4A7C15ull;
    return splitmix64(s);
}

// Named substream, e.g. stream_seed(seed, "init-gen").
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view tag) {
    std::uint64_t s = master ^ fnv1a64(tag);
    return splitmix64(s);
}

using rng_engine = std::mt19937_64;

inline rng_engine make_engine(std::uint64_t seed) { return rng_engine(mix_seed(seed)); }

// Uniform on [0,1) with 53 random bits.
inline double uniform01(rng_engine& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(rng_engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Unbiased integer draw in [0, n) by rejection.
inline std::uint64_t uniform_below(rng_engine& g, std::uint64_t n) {
    if (n == 0) throw usage_error("uniform_below: empty range");
    const std::uint64_t t = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        std::uint64_t x = g();
        if (x >= t) return x % n;
    }
}

// Standard normal via Box-Muller; consumes two engine words per draw.
inline double normal01(rng_engine& g) {
    double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = static_cast<double>(g() >> 11) * 0x1.0p-53;        // [0,1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// ---- little-endian binary encoding --------------------------------------

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_str(std::string& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s.data(), s.size());
}

struct byte_reader {
    const unsigned char* p = nullptr;
    std::size_t n = 0;
    std::size_t pos = 0;

    explicit byte_reader(const std::string& buf)
        : p(reinterpret_cast<const unsigned char*>(buf.data())), n(buf.size()) {}

    void need(std::size_t k) const {
        if (pos + k > n) throw io_error("truncated binary payload");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::uint32_t k = u32();
        need(k);
        std::string s(reinterpret_cast<const char*>(p + pos), k);
        pos += k;
        return s;
    }
    bool at_end() const { return pos == n; }
};

// ---- whole-file I/O ------------------------------------------------------

inline void write_file(const std::string& path, const std::string& data) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw io_error("cannot open for writing: " + path);
    std::size_t wrote = data.empty() ? 0 : std::fwrite(data.data(), 1, data.size(), f);
    int rc = std::fclose(f);
    if (wrote != data.size() || rc != 0) throw io_error("short write: " + path);
}

inline std::string read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open: " + path);
    std::string data;
    char buf[1 << 16];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) data.append(buf, got);
    bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw io_error("read failure: " + path);
    return data;
}

// ---- text formatting ----------------------------------------------------

// Shortest-exact double formatting: parses back to the identical bit pattern.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v)) {
        // try shorter forms for readability where they stay exact
        for (int prec = 1; prec <= 16; ++prec) {
            char b2[32];
            std::snprintf(b2, sizeof b2, "%.*g", prec, v);
            if (std::bit_cast<std::uint64_t>(std::strtod(b2, nullptr)) ==
                std::bit_cast<std::uint64_t>(v))
                return b2;
        }
    }
    return buf;
}

}  // namespace fpc
