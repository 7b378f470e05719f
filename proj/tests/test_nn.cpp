// SPDX-License-Identifier: Apache-2.0
// fpc-surrogate tests: dense kernels against naive references, batch-norm
// statistics, Adam semantics, and the frozen architecture parameter counts.

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fpc/nn.hpp"

using namespace fpc;

namespace {

matrix random_matrix(int r, int c, rng_engine& eng) {
    matrix m(r, c);
    for (double& v : m.a) v = uniform_range(eng, -1.0, 1.0);
    return m;
}

matrix naive_dense_forward(const matrix& x, const dense_layer& fc) {
    matrix z(x.rows, fc.out);
    for (int b = 0; b < x.rows; ++b)
        for (int n = 0; n < fc.out; ++n) {
            double s = fc.b[n];
            for (int k = 0; k < fc.in; ++k) s += x.at(b, k) * fc.w.at(k, n);
            z.at(b, n) = s;
        }
    return z;
}

}  // namespace

TEST_CASE("architecture parameter counts are frozen") {
    CHECK(build_generator().param_count() == 343983ull);
    CHECK(build_critic(true).param_count() == 324097ull);
    CHECK(build_critic(false).param_count() == 287233ull);
    CHECK(build_mlp_baseline().param_count() == 162351ull);
}

TEST_CASE("architecture shapes match their contracts") {
    auto gen = build_generator();
    REQUIRE(gen.blocks.size() == 4);
    CHECK(gen.in_dim() == 172);
    CHECK(gen.out_dim() == 303);
    const int gdims[5] = {172, 128, 256, 512, 303};
    for (int i = 0; i < 4; ++i) {
        CHECK(gen.blocks[i].fc.in == gdims[i]);
        CHECK(gen.blocks[i].fc.out == gdims[i + 1]);
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(gen.blocks[i].has_bn);
        CHECK(gen.blocks[i].act == activation::leaky_relu);
    }
    CHECK_FALSE(gen.blocks[3].has_bn);
    CHECK(gen.blocks[3].act == activation::identity);

    auto cr = build_critic(true);
    REQUIRE(cr.blocks.size() == 3);
    CHECK(cr.in_dim() == 375);
    CHECK(cr.out_dim() == 1);
    for (const auto& blk : cr.blocks) CHECK_FALSE(blk.has_bn);
    CHECK(cr.blocks[0].act == activation::leaky_relu);
    CHECK(cr.blocks[1].act == activation::leaky_relu);
    CHECK(cr.blocks[2].act == activation::sigmoid);
    CHECK(build_critic(false).in_dim() == 303);

    auto mlp = build_mlp_baseline();
    CHECK(mlp.in_dim() == 72);
    CHECK(mlp.out_dim() == 303);
}

TEST_CASE("activation values") {
    CHECK(apply_activation(activation::leaky_relu, -1.0) == -0.2);
    CHECK(apply_activation(activation::leaky_relu, 2.0) == 2.0);
    CHECK(apply_activation(activation::sigmoid, 0.0) == 0.5);
    CHECK(apply_activation(activation::identity, -3.5) == -3.5);
}

TEST_CASE("dense kernels agree with naive references") {
    rng_engine eng = make_engine(101);
    dense_layer fc;
    fc.in = 7;
    fc.out = 5;
    fc.w = random_matrix(7, 5, eng);
    fc.b.resize(5);
    for (double& b : fc.b) b = uniform_range(eng, -1.0, 1.0);
    matrix x = random_matrix(4, 7, eng);

    matrix z;
    kernels::dense_forward(x, fc, z);
    matrix z_ref = naive_dense_forward(x, fc);
    REQUIRE(z.same_shape(z_ref));
    for (std::size_t i = 0; i < z.a.size(); ++i)
        CHECK(std::abs(z.a[i] - z_ref.a[i]) < 1e-10);

    matrix dz = random_matrix(4, 5, eng);
    matrix dw, dx;
    std::vector<double> db;
    kernels::dense_backward(x, fc, dz, dw, db, &dx);
    for (int k = 0; k < 7; ++k)
        for (int n = 0; n < 5; ++n) {
            double s = 0.0;
            for (int b = 0; b < 4; ++b) s += x.at(b, k) * dz.at(b, n);
            CHECK(std::abs(dw.at(k, n) - s) < 1e-10);
        }
    for (int n = 0; n < 5; ++n) {
        double s = 0.0;
        for (int b = 0; b < 4; ++b) s += dz.at(b, n);
        CHECK(std::abs(db[n] - s) < 1e-10);
    }
    for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 7; ++k) {
            double s = 0.0;
            for (int n = 0; n < 5; ++n) s += dz.at(b, n) * fc.w.at(k, n);
            CHECK(std::abs(dx.at(b, k) - s) < 1e-10);
        }
}

TEST_CASE("train-mode batch norm standardizes each dimension") {
    auto net = make_network({6, 4}, {activation::identity}, {true});
    rng_engine eng = make_engine(7);
    init_glorot(net, eng);
    matrix x = random_matrix(16, 6, eng);
    forward_cache cache;
    matrix y = forward(net, x, run_mode::train, &cache, false);
    for (int j = 0; j < 4; ++j) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 16; ++i) mean += y.at(i, j);
        mean /= 16;
        for (int i = 0; i < 16; ++i) {
            double d = y.at(i, j) - mean;
            var += d * d;
        }
        var /= 16;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(var - 1.0) < 1e-3);  // off by var/(var+eps)
    }
}

TEST_CASE("running statistics follow the momentum rule") {
    auto net = make_network({3, 2}, {activation::identity}, {true});
    rng_engine eng = make_engine(11);
    init_glorot(net, eng);
    matrix x = random_matrix(8, 3, eng);

    // reference batch statistics of the dense output
    matrix z;
    kernels::dense_forward(x, net.blocks[0].fc, z);
    std::vector<double> mean(2, 0.0), var(2, 0.0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 2; ++j) mean[j] += z.at(i, j);
    for (int j = 0; j < 2; ++j) mean[j] /= 8;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 2; ++j) {
            double d = z.at(i, j) - mean[j];
            var[j] += d * d;
        }
    for (int j = 0; j < 2; ++j) var[j] /= 8;

    auto untouched = net;
    forward(untouched, x, run_mode::train, nullptr, false);
    CHECK(untouched.blocks[0].bn.run_mean == std::vector<double>(2, 0.0));
    CHECK(untouched.blocks[0].bn.run_var == std::vector<double>(2, 1.0));

    forward(net, x, run_mode::train, nullptr, true);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(net.blocks[0].bn.run_mean[j] - 0.2 * mean[j]) < 1e-12);
        CHECK(std::abs(net.blocks[0].bn.run_var[j] - (0.8 + 0.2 * var[j])) < 1e-12);
    }

    // infer mode reads the running statistics and accepts batch size 1
    matrix probe = random_matrix(1, 3, eng);
    matrix out = forward(net, probe, run_mode::infer);
    matrix zp;
    kernels::dense_forward(probe, net.blocks[0].fc, zp);
    const auto& bn = net.blocks[0].bn;
    for (int j = 0; j < 2; ++j) {
        double expect = bn.gamma[j] * (zp.at(0, j) - bn.run_mean[j]) /
                            std::sqrt(bn.run_var[j] + bn.eps) +
                        bn.beta[j];
        CHECK(std::abs(out.at(0, j) - expect) < 1e-12);
    }
}

TEST_CASE("train-mode batch norm rejects batches of one") {
    auto net = make_network({3, 2}, {activation::identity}, {true});
    matrix one(1, 3);
    CHECK_THROWS_AS(forward(net, one, run_mode::train), usage_error);
    CHECK_NOTHROW(forward(net, one, run_mode::infer));
    matrix wrong(2, 4);
    CHECK_THROWS_AS(forward(net, wrong, run_mode::train), usage_error);
}

TEST_CASE("batch-norm gradient sums to zero over the batch") {
    auto net = make_network({5, 3}, {activation::identity}, {true});
    rng_engine eng = make_engine(23);
    init_glorot(net, eng);
    for (double& v : net.blocks[0].bn.gamma) v = uniform_range(eng, 0.5, 1.5);
    matrix x = random_matrix(6, 5, eng);
    forward_cache cache;
    forward(net, x, run_mode::train, &cache, false);
    matrix gout = random_matrix(6, 3, eng);
    // adding a constant to every batch element of one pre-norm dimension is
    // absorbed by the batch mean, so the bias gradient below the norm is zero
    auto grads = backward(net, cache, gout);
    for (double v : grads.blocks[0].db) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("backward demands a train-mode cache and matching shapes") {
    auto net = build_mlp_baseline();
    rng_engine eng = make_engine(5);
    init_glorot(net, eng);
    matrix x = random_matrix(2, 72, eng);
    forward_cache cache;
    forward(net, x, run_mode::infer, &cache);
    matrix g(2, 303);
    CHECK_THROWS_AS(backward(net, cache, g), usage_error);

    forward(net, x, run_mode::train, &cache);
    matrix bad(3, 303);
    CHECK_THROWS_AS(backward(net, cache, bad), usage_error);
}

TEST_CASE("adam first step and bias correction") {
    auto net = make_network({2, 2}, {activation::identity}, {false});
    net.blocks[0].fc.w.at(0, 0) = 1.0;
    net.blocks[0].fc.w.at(1, 1) = -2.0;
    network_grads g;
    g.blocks.resize(1);
    g.blocks[0].dw.resize(2, 2);
    g.blocks[0].dw.at(0, 0) = 0.3;
    g.blocks[0].dw.at(1, 1) = -0.7;
    g.blocks[0].db.assign(2, 0.0);
    g.blocks[0].db[0] = 0.5;

    adam_state st;
    st.cfg.lr = 1e-3;
    adam_step(net, g, st);
    CHECK(st.t == 1);

    auto first_step = [&](double grad) {
        double m = 0.1 * grad, v = 0.001 * grad * grad;
        double mhat = m / 0.1, vhat = v / 0.001;
        return st.cfg.lr * mhat / (std::sqrt(vhat) + st.cfg.eps);
    };
    CHECK(std::abs(net.blocks[0].fc.w.at(0, 0) - (1.0 - first_step(0.3))) < 1e-12);
    CHECK(std::abs(net.blocks[0].fc.w.at(1, 1) - (-2.0 - first_step(-0.7))) < 1e-12);
    CHECK(net.blocks[0].fc.w.at(0, 1) == 0.0);  // zero gradient, zero moments
    CHECK(std::abs(net.blocks[0].fc.b[0] - (-first_step(0.5))) < 1e-12);
}

TEST_CASE("weight decay is decoupled and spares biases") {
    auto net = make_network({2, 2}, {activation::identity}, {true});
    net.blocks[0].fc.w.at(0, 0) = 2.0;
    net.blocks[0].fc.b[0] = 2.0;
    net.blocks[0].bn.gamma[0] = 2.0;
    net.blocks[0].bn.beta[0] = 2.0;
    network_grads g;
    g.blocks.resize(1);
    g.blocks[0].dw.resize(2, 2);
    g.blocks[0].db.assign(2, 0.0);
    g.blocks[0].dgamma.assign(2, 0.0);
    g.blocks[0].dbeta.assign(2, 0.0);

    adam_state st;
    st.cfg.lr = 0.1;
    st.cfg.weight_decay = 0.5;
    adam_step(net, g, st);
    // zero gradients: weights and gamma shrink by lr*wd*p, bias and beta hold
    CHECK(std::abs(net.blocks[0].fc.w.at(0, 0) - (2.0 - 0.1 * 0.5 * 2.0)) < 1e-15);
    CHECK(std::abs(net.blocks[0].bn.gamma[0] - (2.0 - 0.1 * 0.5 * 2.0)) < 1e-15);
    CHECK(net.blocks[0].fc.b[0] == 2.0);
    CHECK(net.blocks[0].bn.beta[0] == 2.0);
}

TEST_CASE("clip mode clamps weights instead of decaying them") {
    auto net = make_network({2, 2}, {activation::identity}, {false});
    net.blocks[0].fc.w.at(0, 0) = 1.0;
    net.blocks[0].fc.w.at(0, 1) = -1.0;
    net.blocks[0].fc.w.at(1, 0) = 0.01;
    network_grads g;
    g.blocks.resize(1);
    g.blocks[0].dw.resize(2, 2);
    g.blocks[0].db.assign(2, 0.0);

    adam_state st;
    st.cfg.weight_decay = 0.05;
    st.cfg.clip_mode = true;
    adam_step(net, g, st);
    CHECK(net.blocks[0].fc.w.at(0, 0) == 0.05);
    CHECK(net.blocks[0].fc.w.at(0, 1) == -0.05);
    CHECK(net.blocks[0].fc.w.at(1, 0) == 0.01);
}

TEST_CASE("glorot init stays inside its bounds and is seed-deterministic") {
    auto a = build_generator();
    auto b = build_generator();
    rng_engine e1 = make_engine(42), e2 = make_engine(42), e3 = make_engine(43);
    init_glorot(a, e1);
    init_glorot(b, e2);
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        double bound = std::sqrt(6.0 / (a.blocks[i].fc.in + a.blocks[i].fc.out));
        double lo = 0.0, hi = 0.0;
        for (double w : a.blocks[i].fc.w.a) {
            CHECK(std::abs(w) <= bound);
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        CHECK(hi > 0.5 * bound);   // the draw actually spans the range
        CHECK(lo < -0.5 * bound);
        CHECK(a.blocks[i].fc.w.a == b.blocks[i].fc.w.a);
        for (double bias : a.blocks[i].fc.b) CHECK(bias == 0.0);
    }
    auto c = build_generator();
    init_glorot(c, e3);
    CHECK(a.blocks[0].fc.w.a != c.blocks[0].fc.w.a);
}

TEST_CASE("zero-initialized critic scores exactly one half") {
    auto cr = build_critic(true);
    matrix x(3, 375);
    rng_engine eng = make_engine(1);
    for (double& v : x.a) v = uniform_range(eng, -1.0, 1.0);
    matrix y = forward(cr, x, run_mode::infer);
    for (int i = 0; i < 3; ++i) CHECK(y.at(i, 0) == 0.5);
}

TEST_CASE("forward and backward are bitwise deterministic") {
    auto net = build_mlp_baseline();
    rng_engine eng = make_engine(77);
    init_glorot(net, eng);
    matrix x = random_matrix(4, 72, eng);
    matrix g = random_matrix(4, 303, eng);

    forward_cache c1, c2;
    matrix y1 = forward(net, x, run_mode::train, &c1, false);
    matrix y2 = forward(net, x, run_mode::train, &c2, false);
    CHECK(y1.a == y2.a);
    auto g1 = backward(net, c1, g);
    auto g2 = backward(net, c2, g);
    for (std::size_t i = 0; i < g1.blocks.size(); ++i) {
        CHECK(g1.blocks[i].dw.a == g2.blocks[i].dw.a);
        CHECK(g1.blocks[i].db == g2.blocks[i].db);
    }
}

TEST_CASE("gradient accumulation adds elementwise") {
    auto net = make_network({2, 2}, {activation::identity}, {false});
    network_grads a, b;
    b.blocks.resize(1);
    b.blocks[0].dw.resize(2, 2);
    b.blocks[0].dw.at(0, 0) = 1.5;
    b.blocks[0].db.assign(2, 2.0);
    add_grads(a, b);
    add_grads(a, b);
    CHECK(a.blocks[0].dw.at(0, 0) == 3.0);
    CHECK(a.blocks[0].db[0] == 4.0);
}
