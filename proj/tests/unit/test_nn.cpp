#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/gradient_cases.hpp"
#include "scdc/nn/adam.hpp"
#include "scdc/nn/checkpoint.hpp"
#include "scdc/nn/ops.hpp"

using namespace scdc::nn;
using oracle::random_tensor;

namespace {

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// Direct nested-loop cross-correlation.
std::vector<double> conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                                std::size_t pad) {
    const auto B = x.dim(0), Cin = x.dim(1), L = x.dim(2), Cout = w.dim(0), K = w.dim(2);
    const auto Lout = (L + 2 * pad - K) / stride + 1;
    std::vector<double> out(B * Cout * Lout);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t o = 0; o < Cout; ++o)
            for (std::size_t t = 0; t < Lout; ++t) {
                double s = b[o];
                for (std::size_t c = 0; c < Cin; ++c)
                    for (std::size_t k = 0; k < K; ++k) {
                        const long pos = static_cast<long>(t * stride + k) - static_cast<long>(pad);
                        if (pos < 0 || pos >= static_cast<long>(L)) continue;
                        s += w[(o * Cin + c) * K + k] * x[(n * Cin + c) * L + static_cast<std::size_t>(pos)];
                    }
                out[(n * Cout + o) * Lout + t] = s;
            }
    return out;
}

}  // namespace

TEST_CASE("tensor basics") {
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
    Tensor p({3}, {1, 2, 3}, true);
    SUBCASE("sum gives ones") {
        sum(p).backward();
        CHECK(std::vector<double>(p.grad().begin(), p.grad().end()) == std::vector<double>{1, 1, 1});
    }
    SUBCASE("sum of squares gives 2v") {
        sum(mul(p, p)).backward();
        CHECK(std::vector<double>(p.grad().begin(), p.grad().end()) == std::vector<double>{2, 4, 6});
    }
    SUBCASE("repeated backward accumulates") {
        const Tensor l = sum(p);
        l.backward();
        l.backward();
        CHECK(p.grad()[0] == 2.0);
    }
    SUBCASE("non-scalar backward throws") { CHECK_THROWS_AS(mul(p, p).backward(), ShapeError); }
    SUBCASE("no-grad guard records nothing") {
        NoGradGuard guard;
        const Tensor y = mul(p, p);
        CHECK_FALSE(y.requires_grad());
    }
    CHECK_THROWS_AS(add(p, Tensor({2}, {1, 2})), ShapeError);
}

TEST_CASE("conv1d") {
    std::mt19937_64 g(1);
    SUBCASE("identity kernel") {
        const auto x = random_tensor(g, {2, 3, 6});
        std::vector<double> w(9, 0.0);
        for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;
        const auto y = conv1d(x, Tensor({3, 3, 1}, w), Tensor::zeros({3}));
        CHECK(vec(y) == vec(x));
    }
    SUBCASE("zero input gives bias") {
        const auto y = conv1d(Tensor::zeros({1, 2, 5}), random_tensor(g, {3, 2, 3}), Tensor({3}, {1, 2, 3}), 1, 1);
        for (std::size_t o = 0; o < 3; ++o)
            for (std::size_t t = 0; t < 5; ++t) CHECK(y[o * 5 + t] == double(o + 1));
    }
    SUBCASE("nested-loop oracle") {
        for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 1}, {1, 0}, {2, 1}, {3, 2}}) {
            const auto x = random_tensor(g, {2, 2, 8});
            const auto w = random_tensor(g, {3, 2, 3});
            const auto b = random_tensor(g, {3});
            const auto y = conv1d(x, w, b, stride, pad);
            const auto want = conv_oracle(x, w, b, stride, pad);
            REQUIRE(y.size() == want.size());
            CHECK(y.dim(2) == (8 + 2 * pad - 3) / stride + 1);
            for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(y[i] - want[i]) < 1e-10);
        }
    }
    CHECK_THROWS_AS(conv1d(Tensor::zeros({1, 2, 5}), Tensor::zeros({3, 1, 3}), Tensor::zeros({3})), ShapeError);
}

TEST_CASE("linear") {
    std::mt19937_64 g(2);
    const auto x = random_tensor(g, {3, 4});
    std::vector<double> eye(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) eye[i * 5] = 1;
    CHECK(vec(linear(x, Tensor({4, 4}, eye), Tensor::zeros({4}))) == vec(x));
    const auto rows = linear(x, Tensor::zeros({4, 2}), Tensor({2}, {0.5, -2}));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rows[i * 2] == 0.5);
        CHECK(rows[i * 2 + 1] == -2);
    }
    const auto w = random_tensor(g, {4, 2});
    const auto b = random_tensor(g, {2});
    const auto y = linear(x, w, b);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = b[j];
            for (std::size_t k = 0; k < 4; ++k) s += x[i * 4 + k] * w[k * 2 + j];
            CHECK(std::abs(y[i * 2 + j] - s) < 1e-12);
        }
}

TEST_CASE("softmax_rows") {
    auto y = softmax_rows(Tensor({1, 2}, {0, 0}));
    CHECK(vec(y) == std::vector<double>{0.5, 0.5});
    y = softmax_rows(Tensor({1, 2}, {1000, 0}));
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] >= 0.0);
    CHECK(y[1] < 1e-300);

    std::mt19937_64 g(3);
    const auto x = random_tensor(g, {4, 5}, -2, 2);
    y = softmax_rows(x);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 5; ++j) s += std::exp(x[i * 5 + j]);
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(y[i * 5 + j] - std::exp(x[i * 5 + j]) / s) < 1e-12);
    }
    const auto big = random_tensor(g, {6, 7}, -1e4, 1e4);
    y = softmax_rows(big);
    for (std::size_t i = 0; i < 6; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 7; ++j) {
            CHECK(y[i * 7 + j] >= 0.0);
            s += y[i * 7 + j];
        }
        CHECK(std::abs(s - 1) < 1e-9);
    }
}

TEST_CASE("batchnorm1d") {
    std::mt19937_64 g(4);
    std::vector<double> rm(3, 0.0), rv(3, 1.0);
    const auto x = random_tensor(g, {4, 3, 5}, -3, 5);
    const auto y = batchnorm1d(x, Tensor::filled({3}, 1.0), Tensor::zeros({3}), {rm, rv}, Mode::train);
    for (std::size_t c = 0; c < 3; ++c) {
        double m = 0, v = 0, xm = 0, xv = 0;
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 5; ++t) {
                m += y[(n * 3 + c) * 5 + t];
                xm += x[(n * 3 + c) * 5 + t];
            }
        m /= 20;
        xm /= 20;
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 5; ++t) {
                v += std::pow(y[(n * 3 + c) * 5 + t] - m, 2);
                xv += std::pow(x[(n * 3 + c) * 5 + t] - xm, 2);
            }
        CHECK(std::abs(m) < 1e-6);
        CHECK(std::abs(v / 20 - 1) < 1e-5);  // eps 1e-5 shrinks the variance slightly
        CHECK(rm[c] == doctest::Approx(0.1 * xm).epsilon(1e-12));
        CHECK(rv[c] == doctest::Approx(0.9 + 0.1 * xv / 19).epsilon(1e-12));
    }

    // Eval mode applies the running statistics.
    std::vector<double> em{1, 2, 3}, ev{4, 1, 0.25};
    const auto z = batchnorm1d(x, Tensor({3}, {1, 2, 3}), Tensor({3}, {0, 1, 0}), {em, ev}, Mode::eval);
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t t = 0; t < 5; ++t) {
                const auto i = (n * 3 + c) * 5 + t;
                const double want = (c + 1.0) * (x[i] - em[c]) / std::sqrt(ev[c] + 1e-5) + (c == 1 ? 1 : 0);
                CHECK(std::abs(z[i] - want) < 1e-12);
            }

    const auto flat = batchnorm1d(Tensor::filled({2, 1, 3}, 7.0), Tensor::filled({1}, 1.0), Tensor::zeros({1}),
                                  {std::span<double>(rm).first(1), std::span<double>(rv).first(1)}, Mode::train);
    for (double v : flat.values()) CHECK(v == 0.0);

    CHECK_THROWS(batchnorm1d(Tensor::zeros({1, 1, 1}), Tensor::filled({1}, 1.0), Tensor::zeros({1}),
                             {std::span<double>(rm).first(1), std::span<double>(rv).first(1)}, Mode::train));
}

TEST_CASE("maxpool1d") {
    const auto y = maxpool1d(Tensor({1, 1, 4}, {1, 3, 2, 4}), 2);
    CHECK(vec(y) == std::vector<double>{3, 4});
    Tensor c = Tensor::filled({1, 1, 6}, 2.0, true);
    sum(maxpool1d(c, 3)).backward();
    CHECK(std::vector<double>(c.grad().begin(), c.grad().end()) == std::vector<double>{1, 0, 0, 1, 0, 0});
    CHECK_THROWS_AS(maxpool1d(Tensor::zeros({1, 1, 2}), 3), ShapeError);
}

TEST_CASE("every layer passes finite-difference checks") {
    for (auto& c : oracle::layer_gradient_cases(7)) {
        const double err = oracle::gradient_error(c.f, c.inputs);
        INFO(c.name << " max relative error " << err);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("forward is bitwise deterministic") {
    std::mt19937_64 g(5);
    const auto x = random_tensor(g, {2, 2, 16});
    const auto w = random_tensor(g, {3, 2, 5});
    const auto b = random_tensor(g, {3});
    CHECK(vec(conv1d(x, w, b, 1, 2)) == vec(conv1d(x, w, b, 1, 2)));
}

TEST_CASE("adam") {
    SUBCASE("zero gradient leaves parameters and decays moments") {
        std::vector<Tensor> p{Tensor({2}, {1.0, -2.0}, true)};
        AdamState s;
        p[0].grad()[0] = 1.0;
        adam_step(p, s);
        const auto after_first = vec(p[0]);
        const auto m = s.first_moment[0][0];
        p[0].zero_grad();
        adam_step(p, s);
        CHECK(vec(p[0])[1] == after_first[1]);
        CHECK(s.first_moment[0][0] == doctest::Approx(0.9 * m).epsilon(1e-15));
        CHECK(s.step_count == 2);
    }
    SUBCASE("first step moves by lr in the gradient's sign") {
        std::vector<Tensor> p{Tensor({3}, {0.5, 0.5, 0.5}, true)};
        p[0].grad()[0] = 3.0;
        p[0].grad()[1] = -0.2;
        p[0].grad()[2] = 40.0;
        AdamState s;
        adam_step(p, s);
        CHECK(p[0][0] == doctest::Approx(0.5 - 1e-3).epsilon(1e-9));
        CHECK(p[0][1] == doctest::Approx(0.5 + 1e-3).epsilon(1e-9));
        CHECK(p[0][2] == doctest::Approx(0.5 - 1e-3).epsilon(1e-9));
    }
    SUBCASE("quadratic descent matches a scalar simulation") {
        std::vector<Tensor> p{Tensor({2}, {1.0, 1.0}, true)};
        AdamState s;
        s.lr = 0.01;
        double w = 1.0, m = 0, v = 0, prev = 2.0;
        for (int t = 1; t <= 100; ++t) {
            zero_grads(p);
            sum(mul(p[0], p[0])).backward();
            adam_step(p, s);
            const double grad = 2 * w;
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v + 0.001 * grad * grad;
            w -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
            CHECK(std::abs(p[0][0] - w) < 1e-12);
            const double norm = std::hypot(p[0][0], p[0][1]);
            if (t > 5) CHECK(norm < prev);
            prev = norm;
        }
    }
}

TEST_CASE("checkpoint container") {
    Checkpoint c;
    c.meta["note"] = "x";
    c.arrays.push_back({"a", {2, 2}, {1, 2, 3, 4.5}});
    c.arrays.push_back({"b.c", {3}, {-1e-300, 0, 1e300}});
    const auto bytes = serialize_checkpoint(c);
    CHECK(bytes.substr(0, 5) == "SCDC1");
    const auto back = deserialize_checkpoint(bytes);
    CHECK(back.meta == c.meta);
    CHECK(back.get("a").values == c.arrays[0].values);
    CHECK(back.get("b.c").shape == Shape{3});
    CHECK(back.get("b.c").values == c.arrays[1].values);
    CHECK(serialize_checkpoint(back) == bytes);
    CHECK_THROWS(back.get("missing"));
    CHECK_THROWS(deserialize_checkpoint("SCDC2" + bytes.substr(5)));
    CHECK_THROWS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 8)));
}
