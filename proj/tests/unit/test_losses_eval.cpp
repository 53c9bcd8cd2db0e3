// Copyright 2026 The emopack Authors
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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "emopack/error.hpp"
#include "emopack/eval.hpp"
#include "emopack/losses.hpp"
#include "support/oracles.hpp"

using namespace emopack;

namespace {

std::vector<double>
random_vector(Rng &r, std::size_t n, double scale = 3.0)
{
    std::vector<double> v(n);
    for (double &x : v)
        x = scale * r.normal();
    return v;
}

double
rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

TEST_CASE("soft cross entropy reference values")
{
    const std::vector<double> z8(8, 0.0);
    std::vector<double> q(8, 0.0);
    q[3] = 1.0;
    CHECK(std::abs(soft_cross_entropy(z8, q) - 2.0794415416798357) <= 1e-9);
    CHECK(std::abs(soft_cross_entropy(std::vector<double>{1.0, 0.0}, std::vector<double>{0.7, 0.3}) -
                   0.6132616875182227) <= 1e-12);
    CHECK(std::abs(log_sum_exp(std::vector<double>{1000.0, 1000.0}) - (1000.0 + std::log(2.0))) <= 1e-9);
    CHECK_THROWS_AS(soft_cross_entropy(z8, std::vector<double>(8, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(soft_cross_entropy(z8, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("combined loss subtracts the weighted domain loss")
{
    const std::vector<double> ze(8, 0.0), zd(4, 0.0);
    std::vector<double> q(8, 0.0);
    q[0] = 1.0;
    const LossReport r = combined_loss(ze, q, zd, 2, 0.01);
    CHECK(std::abs(r.ce_emo - 2.0794415416798357) <= 1e-12);
    CHECK(std::abs(r.ce_dom - 1.3862943611198906) <= 1e-12);
    CHECK(std::abs(r.total - 2.0655785980686368) <= 1e-12);
    CHECK(std::abs(r.total - (r.ce_emo - 0.01 * r.ce_dom)) <= 1e-12);
}

TEST_CASE("analytic gradients match finite differences")
{
    Rng rng{17};
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> ze = random_vector(rng, 8), zd = random_vector(rng, 5);
        std::vector<double> q(8);
        for (double &v : q)
            v = rng.uniform();
        const std::size_t dom = rng.uniform_index(5);
        const double wd = rng.uniform(0.0, 0.5);
        const LossReport r = combined_loss(ze, q, zd, dom, wd);

        const auto ge = oracle::central_difference(
            [&](const std::vector<double> &z) { return combined_loss(z, q, zd, dom, wd).total; }, ze);
        const auto gd = oracle::central_difference(
            [&](const std::vector<double> &z) { return combined_loss(ze, q, z, dom, wd).total; }, zd);
        for (std::size_t j = 0; j < 8; ++j)
            REQUIRE(rel_err(r.grad_emo[j], ge[j]) <= 1e-5);
        for (std::size_t j = 0; j < 5; ++j)
            REQUIRE(rel_err(r.grad_dom[j], gd[j]) <= 1e-5);

        const auto gs = oracle::central_difference(
            [&](const std::vector<double> &z) { return sigmoid_mse(z, q); }, ze);
        const auto an = sigmoid_mse_grad(ze, q);
        for (std::size_t j = 0; j < 8; ++j)
            REQUIRE(rel_err(an[j], gs[j]) <= 1e-5);
    }
}

TEST_CASE("domain gradient is the reversed, scaled standard gradient")
{
    Rng rng{3};
    const std::vector<double> ze = random_vector(rng, 8), zd = random_vector(rng, 4);
    const std::vector<double> q(8, 0.125);
    const LossReport r = combined_loss(ze, q, zd, 1, 0.01);
    std::vector<double> onehot(4, 0.0);
    onehot[1] = 1.0;
    const auto plain = soft_cross_entropy_grad(zd, onehot);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(r.grad_dom[j] == doctest::Approx(-0.01 * plain[j]).epsilon(1e-14));
}

TEST_CASE("banned classes never win")
{
    Rng rng{4};
    const std::vector<std::uint8_t> mask{1, 0, 1, 0, 1, 1, 0, 1};
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> z = random_vector(rng, 8, 1e6);
        z[1] = 1e26;
        const auto banned = ban_labels(z, mask);
        REQUIRE(mask[argmax(banned)] == 1);
    }
    CHECK_THROWS_AS(ban_labels(std::vector<double>(8, 0.0), std::vector<std::uint8_t>(8, 0)),
                    std::invalid_argument);
}

TEST_CASE("logit adjustment")
{
    const auto adj = adjust_logits(std::vector<double>{0.0, 0.0}, std::vector<double>{0.9, 0.1}, 1.0);
    CHECK(adj[0] == doctest::Approx(0.10536051565782628).epsilon(1e-14));
    CHECK(adj[1] == doctest::Approx(2.3025850929940455).epsilon(1e-14));

    Rng rng{5};
    const std::vector<double> uniform(8, 0.125);
    for (int t = 0; t < 200; ++t) {
        const auto z = random_vector(rng, 8);
        CHECK(argmax(adjust_logits(z, uniform, rng.uniform(0.0, 2.0))) == argmax(z));
    }
}

TEST_CASE("masked frame loss ignores padding")
{
    std::vector<double> logits(3 * 8, 0.0);
    logits[0] = 2.0;
    logits[8 + 1] = 2.0;
    logits[16 + 4] = 50.0;
    std::vector<EmotionDistribution> targets(3);
    targets[0].scores[0] = 1.0;
    targets[1].scores[1] = 1.0;
    targets[2].scores[0] = 1.0;
    const std::vector<std::uint8_t> mask{1, 1, 0};
    const double per_frame = std::log(std::exp(2.0) + 7.0) - 2.0;
    CHECK(masked_frame_loss(logits, 8, targets, mask) == doctest::Approx(per_frame).epsilon(1e-12));
}

TEST_CASE("class priors are normalized label mass")
{
    std::vector<Sample> s(2);
    s[0].emotion[Emotion::anger] = 0.6;
    s[1].emotion[Emotion::anger] = 0.2;
    s[1].emotion[Emotion::fear] = 0.2;
    const auto p = class_priors(s);
    CHECK(p[index_of(Emotion::anger)] == doctest::Approx(0.8).epsilon(1e-9));
    double sum = 0.0;
    for (double v : p) {
        CHECK(v > 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("micro F1 equals accuracy and per-class F1 matches brute force")
{
    Rng rng{6};
    for (int t = 0; t < 200; ++t) {
        PredictionSet p;
        const std::size_t n = 1 + rng.uniform_index(60);
        for (std::size_t i = 0; i < n; ++i) {
            p.references.push_back(rng.uniform_index(8));
            p.predictions.push_back(rng.bernoulli(0.5) ? p.references.back() : rng.uniform_index(8));
        }
        CHECK(micro_f1(p) == doctest::Approx(accuracy(p)).epsilon(1e-15));
        const auto got = per_class_f1(p);
        const auto want = oracle::brute_force_f1(p.predictions, p.references, 8);
        for (std::size_t k = 0; k < 8; ++k) {
            REQUIRE(got[k].has_value() == want[k].has_value());
            if (want[k])
                CHECK(*got[k] == doctest::Approx(*want[k]).epsilon(1e-15));
        }
    }
}

TEST_CASE("confusion matrix and metric report")
{
    PredictionSet p{{0, 1, 1, 2}, {0, 1, 2, 2}, 3};
    const auto cm = confusion_matrix(p);
    CHECK(cm[2][1] == 1);
    CHECK(cm[1][1] == 1);
    const MetricReport r = evaluate(p);
    CHECK(r.micro_f1 == doctest::Approx(0.75));
    CHECK(r.n == 4);
    const nlohmann::json j = to_json(r);
    CHECK(j["micro_f1"].get<double>() == doctest::Approx(0.75));
    PredictionSet bad{{0, 5}, {0, 1}, 3};
    CHECK_THROWS(evaluate(bad));
}

TEST_CASE("classes never predicted and never true have no F1")
{
    PredictionSet p{{0, 0, 1}, {0, 0, 0}, 3};
    const auto f = per_class_f1(p);
    CHECK(*f[0] == doctest::Approx(0.8));
    CHECK(*f[1] == 0.0);
    CHECK_FALSE(f[2].has_value());
}

TEST_CASE("pearson matches the two-pass oracle and is affine invariant")
{
    Rng rng{7};
    Eigen::MatrixXd s(50, 3), t(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index k = 0; k < 3; ++k) {
            t(i, k) = rng.normal();
            s(i, k) = t(i, k) + 0.5 * rng.normal();
        }
    double mean = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) {
        std::vector<double> x(50), y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            x[static_cast<std::size_t>(i)] = s(i, k);
            y[static_cast<std::size_t>(i)] = t(i, k);
        }
        mean += oracle::two_pass_pearson(x, y) / 3.0;
    }
    const double r = mean_pearson(s, t);
    CHECK(r == doctest::Approx(mean).epsilon(1e-12));
    const Eigen::MatrixXd shifted = (3.5 * s).array() - 2.0;
    CHECK(std::abs(mean_pearson(shifted, t) - r) <= 1e-9);
    CHECK_THROWS_AS(mean_pearson(s, Eigen::MatrixXd::Ones(50, 3)), std::invalid_argument);
}

TEST_CASE("prediction applies banning before adjustment")
{
    LossConfig cfg;
    cfg.allowed_mask = {1, 1, 1, 1, 1, 0, 1, 1};
    cfg.priors.assign(8, 0.125);
    std::vector<double> z(8, 0.0);
    z[5] = 10.0;
    z[2] = 1.0;
    CHECK(predict_class(z, cfg) == 2);
}
