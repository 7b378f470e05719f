// SPDX-License-Identifier: Apache-2.0
// fpc-surrogate tests: central-difference gradient verification across all
// four trainable architectures.

#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "fpc/gradcheck.hpp"

using namespace fpc;

TEST_CASE("analytic gradients match central differences at 1e-4") {
    for (const std::string arch : {"gan-gen", "gan-critic", "mlp", "cnn"}) {
        INFO("architecture " << arch);
        auto res = gradcheck_arch(arch, 7);
        CHECK(res.passed);
        CHECK(res.probes == 100);
        CHECK(res.failures == 0);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("a corrupted gradient component is detected") {
    auto res = gradcheck_arch("mlp", 7, 100.0);
    CHECK_FALSE(res.passed);
    CHECK(res.failures > 0);
    auto res2 = gradcheck_arch("gan-critic", 7, 100.0);
    CHECK_FALSE(res2.passed);
}

TEST_CASE("probe selection is seed-deterministic") {
    auto a = gradcheck_arch("mlp", 11);
    auto b = gradcheck_arch("mlp", 11);
    CHECK(a.max_rel_err == b.max_rel_err);
    CHECK(a.probes == b.probes);
}

TEST_CASE("unknown architectures are rejected") {
    CHECK_THROWS_AS(gradcheck_arch("transformer", 1), usage_error);
}
