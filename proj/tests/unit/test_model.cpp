#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "../support/gradient_cases.hpp"
#include "scdc/losses.hpp"
#include "scdc/model.hpp"
#include "scdc/nn/checkpoint.hpp"

using namespace scdc;
using nn::Tensor;

namespace {

Tensor random_batch(std::mt19937_64& g, std::size_t b, std::size_t l) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v(b * l);
    for (auto& x : v) x = u(g);
    return Tensor({b, l}, std::move(v));
}

}  // namespace

TEST_CASE("default architecture shapes") {
    ModelConfig cfg;
    cfg.class_count = 6;
    ScdcModel m(cfg, 1);
    CHECK(cfg.feature_dim() == 1024);
    std::mt19937_64 g(1);
    const auto h = m.encode(random_batch(g, 2, 1024), nn::Mode::train);
    CHECK(h.shape() == nn::Shape{2, 1024});
    CHECK(m.embed_head(h).shape() == nn::Shape{2, 128});
    CHECK(m.category_head(h).shape() == nn::Shape{2, 6});
    CHECK_THROWS_AS(m.encode(random_batch(g, 2, 1000), nn::Mode::eval), nn::ShapeError);
}

TEST_CASE("eval-mode forward") {
    const auto cfg = fixture::tiny_model();
    ScdcModel m(cfg, 2);
    const auto z = m.predict_proba(Tensor::zeros({3, 64}));
    for (double v : z.values()) CHECK(std::isfinite(v));

    std::mt19937_64 g(2);
    auto x = random_batch(g, 1, 64);
    std::vector<double> twice(x.values().begin(), x.values().end());
    twice.insert(twice.end(), x.values().begin(), x.values().end());
    const auto h = m.embed(Tensor({2, 64}, twice));
    for (std::size_t k = 0; k < 8; ++k) CHECK(h[k] == h[8 + k]);

    const auto batch = random_batch(g, 5, 64);
    const auto p = m.predict_proba(batch);
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0;
        for (std::size_t c = 0; c < 3; ++c) s += p[i * 3 + c];
        CHECK(std::abs(s - 1) < 1e-9);
    }
    const auto again = m.predict_proba(batch);
    CHECK(std::vector<double>(p.values().begin(), p.values().end()) ==
          std::vector<double>(again.values().begin(), again.values().end()));
}

TEST_CASE("category head") {
    const auto cfg = fixture::tiny_model();
    ScdcModel m(cfg, 3);
    std::mt19937_64 g(3);
    const auto h = oracle::random_tensor(g, {2, static_cast<std::size_t>(cfg.feature_dim())});
    const auto p = m.category_head(h);

    // Manual composition: linear, relu, linear, softmax.
    const auto& w1 = m.parameter("category.fc1.weight");
    const auto& b1 = m.parameter("category.fc1.bias");
    const auto& w2 = m.parameter("category.fc2.weight");
    const auto& b2 = m.parameter("category.fc2.bias");
    const auto d = static_cast<std::size_t>(cfg.feature_dim());
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<double> hid(16), logit(3);
        for (std::size_t j = 0; j < 16; ++j) {
            double s = b1[j];
            for (std::size_t k = 0; k < d; ++k) s += h[i * d + k] * w1[k * 16 + j];
            hid[j] = std::max(0.0, s);
        }
        double norm = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            double s = b2[c];
            for (std::size_t j = 0; j < 16; ++j) s += hid[j] * w2[j * 3 + c];
            logit[c] = s;
            norm += std::exp(s);
        }
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(p[i * 3 + c] - std::exp(logit[c]) / norm) < 1e-12);
    }

    auto w = m.parameter("category.fc2.weight").values();
    std::fill(w.begin(), w.end(), 0.0);
    auto b = m.parameter("category.fc2.bias").values();
    std::fill(b.begin(), b.end(), 0.0);
    const auto u = m.category_head(h);
    for (double v : u.values()) CHECK(v == doctest::Approx(1.0 / 3));
    const auto preds = m.predict_class(random_batch(g, 4, 64));
    for (const auto& pr : preds) {
        CHECK(pr.label == 0);
        CHECK(pr.confidence == doctest::Approx(1.0 / 3));
    }
}

TEST_CASE("argmax tie-break and monotone invariance") {
    CHECK(argmax(std::vector<double>{0.9, 0.05, 0.05}) == 0);
    CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);

    const auto cfg = fixture::tiny_model();
    ScdcModel m(cfg, 4);
    std::mt19937_64 g(4);
    const auto x = random_batch(g, 6, 64);
    Tensor logits;
    {
        nn::NoGradGuard guard;
        logits = m.category_logits(m.encode(x, nn::Mode::eval));
    }
    const auto preds = m.predict_class(x);
    for (std::size_t i = 0; i < 6; ++i) {
        std::vector<double> row(3), mapped(3);
        for (std::size_t c = 0; c < 3; ++c) {
            row[c] = logits[i * 3 + c];
            mapped[c] = std::exp(2 * row[c]) + 3;
        }
        CHECK(argmax(row) == preds[i].label);
        CHECK(argmax(mapped) == preds[i].label);
    }
}

TEST_CASE("checkpoint round trip preserves predictions bitwise") {
    const auto cfg = fixture::tiny_model();
    ScdcModel m(cfg, 5);
    std::mt19937_64 g(5);
    m.encode(random_batch(g, 4, 64), nn::Mode::train);  // moves the running statistics
    const auto bytes = nn::serialize_checkpoint(m.to_checkpoint());
    const auto ckpt = nn::deserialize_checkpoint(bytes);
    ScdcModel back(ScdcModel::config_from_checkpoint(ckpt), ckpt);
    const auto x = random_batch(g, 3, 64);
    const auto a = m.predict_proba(x), b = back.predict_proba(x);
    CHECK(std::vector<double>(a.values().begin(), a.values().end()) ==
          std::vector<double>(b.values().begin(), b.values().end()));
    CHECK(nn::serialize_checkpoint(back.to_checkpoint()) == bytes);

    ScdcModel same_seed(cfg, 5);
    ScdcModel other_seed(cfg, 6);
    CHECK(same_seed.parameters()[0][0] == ScdcModel(cfg, 5).parameters()[0][0]);
    CHECK(other_seed.parameters()[0][0] != same_seed.parameters()[0][0]);
}

TEST_CASE("full objective gradients on a four-sample batch") {
    auto cfg = fixture::tiny_model(16, 3);
    cfg.channels = {2, 2, 2};
    cfg.hidden_dim = 6;
    cfg.embed_dim = 4;
    ScdcModel m(cfg, 7);
    std::mt19937_64 g(7);
    const auto xs = random_batch(g, 4, 16), xw = random_batch(g, 4, 16), xl = random_batch(g, 4, 16);
    const std::vector<int> y{0, 1, 2, 1};
    loss::PseudoLabels pseudo = loss::PseudoLabels::none(4);
    pseudo.labels = {2, std::nullopt, 2, 0};  // held fixed: pseudo-labels carry no gradient

    auto objective = [&](const std::vector<Tensor>&) {
        const auto hs = m.encode(xs, nn::Mode::train);
        const auto hw = m.encode(xw, nn::Mode::train);
        const auto ys = m.category_head(hs), yw = m.category_head(hw);
        const auto l_cat = loss::category_contrast(ys, yw, 0.5).total;
        const auto l_emb = loss::calibrated_embedding_loss(m.embed_head(hs), m.embed_head(hw), pseudo, 0.5).value;
        const auto l_pse = loss::pseudo_supervision_loss(ys, pseudo);
        const auto l_sup = loss::supervised_loss(m.category_head(m.encode(xl, nn::Mode::train)), y);
        return loss::semi_objective(l_sup, nn::add(nn::add(l_cat, l_emb), l_pse));
    };
    const double err = oracle::gradient_error(objective, m.parameters(), 1e-4, 1e-6);
    INFO("max relative error " << err);
    CHECK(err < 1e-3);
}
