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
// FPCM v1 model checkpoints.
//
//   magic "FPCM" | u32 version=1 | str oracle_version | str arch_kind
//   f64 adam_eps
//   architecture descriptor
//     dense kinds: u32 n_blocks, per block u32 in, u32 out, u8 activation,
//                  u8 has_bn [, f64 momentum, f64 eps]
//     cnn: u32 c1_out, u32 c2_out, u32 f1_out, u32 f2_out
//   u8 has_norm [, 303 lo f64, 303 hi f64, f64 side_mm, f64 inset_mm]
//   parameters, little-endian f64, declaration order
//     dense: per block W row-major, bias, gamma, beta
//     cnn: c1.w, c1.b, c2.w, c2.b, f1.w, f1.b, f2.w, f2.b
//   batch-norm running statistics (run_mean then run_var per BN block)
//   u64 FNV-1a checksum of every preceding byte
//
// Round trips are bitwise lossless. Known architecture kinds have their
// layer dimensions asserted at load; a mismatch is a version error.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpc/common.hpp"
#include "fpc/conv.hpp"
#include "fpc/dataset.hpp"
#include "fpc/em_oracle.hpp"
#include "fpc/nn.hpp"

namespace fpc {

inline constexpr std::uint32_t checkpoint_version = 1;

struct checkpoint {
    std::string arch;  // gan-generator | gan-critic | mlp | cnn
    std::string oracle_ver = oracle_version;
    double adam_eps = 1e-8;
    bool has_norm = false;
    response_norm norm;
    double side_mm = 30.0;
    double inset_mm = 2.0;
    network net;     // dense kinds
    cnn_model cnn;   // arch == "cnn"
};

namespace detail {

inline void put_network(std::string& out, const network& net) {
    put_u32(out, static_cast<std::uint32_t>(net.blocks.size()));
    for (const auto& blk : net.blocks) {
        put_u32(out, static_cast<std::uint32_t>(blk.fc.in));
        put_u32(out, static_cast<std::uint32_t>(blk.fc.out));
        out.push_back(static_cast<char>(blk.act));
        out.push_back(static_cast<char>(blk.has_bn ? 1 : 0));
        if (blk.has_bn) {
            put_f64(out, blk.bn.momentum);
            put_f64(out, blk.bn.eps);
        }
    }
}

inline network read_network(byte_reader& r) {
    std::uint32_t nb = r.u32();
    if (nb == 0 || nb > 64) throw io_error("checkpoint: implausible block count");
    std::vector<int> dims;
    std::vector<activation> acts;
    std::vector<bool> bns;
    std::vector<std::pair<double, double>> bn_consts;
    for (std::uint32_t i = 0; i < nb; ++i) {
        std::uint32_t in = r.u32(), out = r.u32();
        r.need(2);
        std::uint8_t act = r.p[r.pos++];
        std::uint8_t has_bn = r.p[r.pos++];
        if (act > 2 || has_bn > 1) throw io_error("checkpoint: bad block descriptor");
        if (i == 0)
            dims.push_back(static_cast<int>(in));
        else if (dims.back() != static_cast<int>(in))
            throw io_error("checkpoint: layer dimensions do not chain");
        dims.push_back(static_cast<int>(out));
        acts.push_back(static_cast<activation>(act));
        bns.push_back(has_bn == 1);
        if (has_bn == 1) {
            double mom = r.f64(), eps = r.f64();
            bn_consts.emplace_back(mom, eps);
        } else {
            bn_consts.emplace_back(0.0, 0.0);
        }
    }
    network net = make_network(dims, acts, bns);
    for (std::uint32_t i = 0; i < nb; ++i) {
        if (net.blocks[i].has_bn) {
            net.blocks[i].bn.momentum = bn_consts[i].first;
            net.blocks[i].bn.eps = bn_consts[i].second;
        }
    }
    return net;
}

inline void put_doubles(std::string& out, const std::vector<double>& v) {
    for (double x : v) put_f64(out, x);
}

inline void read_doubles(byte_reader& r, std::vector<double>& v) {
    for (double& x : v) x = r.f64();
}

}  // namespace detail

inline std::string serialize_checkpoint(const checkpoint& ck) {
    std::string out = "FPCM";
    put_u32(out, checkpoint_version);
    put_str(out, ck.oracle_ver);
    put_str(out, ck.arch);
    put_f64(out, ck.adam_eps);
    if (ck.arch == "cnn") {
        put_u32(out, static_cast<std::uint32_t>(ck.cnn.c1.out_ch));
        put_u32(out, static_cast<std::uint32_t>(ck.cnn.c2.out_ch));
        put_u32(out, static_cast<std::uint32_t>(ck.cnn.f1.out));
        put_u32(out, static_cast<std::uint32_t>(ck.cnn.f2.out));
    } else {
        detail::put_network(out, ck.net);
    }
    out.push_back(static_cast<char>(ck.has_norm ? 1 : 0));
    if (ck.has_norm) {
        for (double v : ck.norm.lo) put_f64(out, v);
        for (double v : ck.norm.hi) put_f64(out, v);
        put_f64(out, ck.side_mm);
        put_f64(out, ck.inset_mm);
    }
    if (ck.arch == "cnn") {
        detail::put_doubles(out, ck.cnn.c1.w);
        detail::put_doubles(out, ck.cnn.c1.b);
        detail::put_doubles(out, ck.cnn.c2.w);
        detail::put_doubles(out, ck.cnn.c2.b);
        detail::put_doubles(out, ck.cnn.f1.w.a);
        detail::put_doubles(out, ck.cnn.f1.b);
        detail::put_doubles(out, ck.cnn.f2.w.a);
        detail::put_doubles(out, ck.cnn.f2.b);
    } else {
        for (const auto& blk : ck.net.blocks) {
            detail::put_doubles(out, blk.fc.w.a);
            detail::put_doubles(out, blk.fc.b);
            if (blk.has_bn) {
                detail::put_doubles(out, blk.bn.gamma);
                detail::put_doubles(out, blk.bn.beta);
            }
        }
        for (const auto& blk : ck.net.blocks) {
            if (blk.has_bn) {
                detail::put_doubles(out, blk.bn.run_mean);
                detail::put_doubles(out, blk.bn.run_var);
            }
        }
    }
    put_u64(out, fnv1a64(out.data(), out.size()));
    return out;
}

inline void save_checkpoint(const checkpoint& ck, const std::string& path) {
    write_file(path, serialize_checkpoint(ck));
}

inline checkpoint parse_checkpoint(const std::string& buf) {
    if (buf.size() < 12 || buf.compare(0, 4, "FPCM") != 0)
        throw io_error("not an FPCM checkpoint");
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i)
        stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[buf.size() - 8 + i]))
                  << (8 * i);
    if (fnv1a64(buf.data(), buf.size() - 8) != stored)
        throw io_error("checkpoint checksum mismatch");
    byte_reader r(buf);
    r.pos = 4;
    std::uint32_t ver = r.u32();
    if (ver != checkpoint_version)
        throw version_error("checkpoint format version " + std::to_string(ver) +
                            ", this build reads version 1");
    checkpoint ck;
    ck.oracle_ver = r.str();
    ck.arch = r.str();
    ck.adam_eps = r.f64();
    if (ck.arch == "cnn") {
        std::uint32_t c1 = r.u32(), c2 = r.u32(), f1 = r.u32(), f2 = r.u32();
        if (c1 != 8 || c2 != 16 || f1 != 256 || f2 != 303)
            throw version_error("checkpoint cnn architecture mismatch");
        ck.cnn = make_cnn();
    } else {
        ck.net = detail::read_network(r);
    }
    r.need(1);
    ck.has_norm = r.p[r.pos++] == 1;
    if (ck.has_norm) {
        for (double& v : ck.norm.lo) v = r.f64();
        for (double& v : ck.norm.hi) v = r.f64();
        ck.side_mm = r.f64();
        ck.inset_mm = r.f64();
    }
    if (ck.arch == "cnn") {
        detail::read_doubles(r, ck.cnn.c1.w);
        detail::read_doubles(r, ck.cnn.c1.b);
        detail::read_doubles(r, ck.cnn.c2.w);
        detail::read_doubles(r, ck.cnn.c2.b);
        detail::read_doubles(r, ck.cnn.f1.w.a);
        detail::read_doubles(r, ck.cnn.f1.b);
        detail::read_doubles(r, ck.cnn.f2.w.a);
        detail::read_doubles(r, ck.cnn.f2.b);
    } else {
        for (auto& blk : ck.net.blocks) {
            detail::read_doubles(r, blk.fc.w.a);
            detail::read_doubles(r, blk.fc.b);
            if (blk.has_bn) {
                detail::read_doubles(r, blk.bn.gamma);
                detail::read_doubles(r, blk.bn.beta);
            }
        }
        for (auto& blk : ck.net.blocks) {
            if (blk.has_bn) {
                detail::read_doubles(r, blk.bn.run_mean);
                detail::read_doubles(r, blk.bn.run_var);
            }
        }
    }
    if (r.pos != buf.size() - 8) throw io_error("checkpoint has trailing bytes");

    // architecture conformance for the known kinds
    auto expect_dims = [&ck](const std::vector<int>& dims) {
        if (ck.net.blocks.size() != dims.size() - 1)
            throw version_error("checkpoint architecture mismatch for " + ck.arch);
        for (std::size_t i = 0; i < ck.net.blocks.size(); ++i)
            if (ck.net.blocks[i].fc.in != dims[i] || ck.net.blocks[i].fc.out != dims[i + 1])
                throw version_error("checkpoint architecture mismatch for " + ck.arch);
    };
    if (ck.arch == "gan-generator") expect_dims({172, 128, 256, 512, 303});
    else if (ck.arch == "gan-critic") {
        if (ck.net.in_dim() != 375 && ck.net.in_dim() != 303)
            throw version_error("checkpoint architecture mismatch for gan-critic");
        expect_dims({ck.net.in_dim(), 512, 256, 1});
    } else if (ck.arch == "mlp") expect_dims({72, 256, 256, 303});
    else if (ck.arch != "cnn")
        throw version_error("unknown checkpoint architecture kind: " + ck.arch);
    return ck;
}

inline checkpoint load_checkpoint(const std::string& path) {
    return parse_checkpoint(read_file(path));
}

// Oracle pin shared by every artifact consumer: a checkpoint trained against
// a different oracle version must not silently feed downstream stages.
inline void require_oracle_version(const checkpoint& ck) {
    if (ck.oracle_ver != oracle_version)
        throw version_error("checkpoint oracle version \"" + ck.oracle_ver +
                            "\", this build expects \"" + std::string(oracle_version) + "\"");
}

// GAN training writes the generator to `path` and the critic alongside it.
inline std::string critic_sibling_path(const std::string& path) {
    std::size_t dot = path.rfind('.');
    std::size_t slash = path.find_last_of("/\\");
    bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    if (has_ext) return path.substr(0, dot) + ".critic" + path.substr(dot);
    return path + ".critic";
}

}  // namespace fpc
