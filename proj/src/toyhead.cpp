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

#include "emopack/toyhead.hpp"

#include <cmath>
#include <stdexcept>

#include "emopack/losses.hpp"
#include "emopack/rng.hpp"

namespace emopack {
namespace {

std::vector<double>
row_vector(const Eigen::MatrixXd &m, Eigen::Index r)
{
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        v[static_cast<std::size_t>(c)] = m(r, c);
    return v;
}

std::vector<double>
one_hot(std::size_t cls, std::size_t n)
{
    std::vector<double> v(n, 0.0);
    v[cls] = 1.0;
    return v;
}

std::size_t
row_argmax(const Eigen::MatrixXd &m, Eigen::Index r)
{
    Eigen::Index best = 0;
    m.row(r).maxCoeff(&best);
    return static_cast<std::size_t>(best);
}

// Per-sample gradients of the combined objective w.r.t. both heads' logits.
struct LogitGradients {
    Eigen::MatrixXd emo;       // d total / d emotion logits
    Eigen::MatrixXd dom;       // d total / d domain logits (reversed, scaled)
    Eigen::MatrixXd dom_head;  // d CE_dom / d domain logits
    EpochStats stats;
};

LogitGradients
logit_gradients(const AdversarialModel &model, const SyntheticDataset &data, double w_d)
{
    const Eigen::MatrixXd h = model.embed(data.features);
    const Eigen::MatrixXd ze = model.emotion_head.logits(h);
    const Eigen::MatrixXd zd = model.domain_head.logits(h);
    const auto n = static_cast<Eigen::Index>(data.size());
    const std::size_t n_emo = data.spec.n_emotions;
    const std::size_t n_dom = data.spec.n_domains;

    LogitGradients g;
    g.emo.resize(n, ze.cols());
    g.dom.resize(n, zd.cols());
    g.dom_head.resize(n, zd.cols());

    std::size_t emo_hits = 0, dom_hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::vector<double> z_emo = row_vector(ze, i);
        const std::vector<double> z_dom = row_vector(zd, i);
        const std::vector<double> q_emo = one_hot(data.emotion[idx], n_emo);

        const LossReport r = combined_loss(z_emo, q_emo, z_dom, data.domain[idx], w_d);
        const std::vector<double> head = soft_cross_entropy_grad(z_dom, one_hot(data.domain[idx], n_dom));

        for (std::size_t j = 0; j < n_emo; ++j)
            g.emo(i, static_cast<Eigen::Index>(j)) = r.grad_emo[j];
        for (std::size_t j = 0; j < n_dom; ++j) {
            g.dom(i, static_cast<Eigen::Index>(j)) = r.grad_dom[j];
            g.dom_head(i, static_cast<Eigen::Index>(j)) = head[j];
        }

        g.stats.ce_emo += r.ce_emo;
        g.stats.ce_dom += r.ce_dom;
        g.stats.total += r.total;
        emo_hits += row_argmax(ze, i) == data.emotion[idx];
        dom_hits += row_argmax(zd, i) == data.domain[idx];
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    g.emo *= inv_n;
    g.dom *= inv_n;
    g.dom_head *= inv_n;
    g.stats.ce_emo *= inv_n;
    g.stats.ce_dom *= inv_n;
    g.stats.total *= inv_n;
    g.stats.emo_acc = static_cast<double>(emo_hits) * inv_n;
    g.stats.dom_acc = static_cast<double>(dom_hits) * inv_n;
    return g;
}

} // namespace

SyntheticDataset
make_synthetic_dataset(std::size_t n, std::uint64_t seed, const SyntheticSpec &spec)
{
    if (n < 100)
        throw std::invalid_argument{"synthetic dataset needs at least 100 samples"};
    if (spec.n_emotions < 2 || spec.n_domains < 2)
        throw std::invalid_argument{"synthetic dataset needs at least two classes per task"};

    SyntheticDataset d;
    d.spec = spec;
    const auto n_cols = static_cast<Eigen::Index>(spec.n_emotions + spec.n_domains + spec.nuisance_dims);
    d.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), n_cols);
    d.emotion.resize(n);
    d.domain.resize(n);

    Rng rng{derive_seed(seed, "toy-dataset")};
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        d.emotion[i] = static_cast<std::size_t>(rng.uniform_index(spec.n_emotions));
        d.domain[i] = static_cast<std::size_t>(rng.uniform_index(spec.n_domains));

        for (std::size_t j = 0; j < spec.n_emotions; ++j)
            d.features(r, static_cast<Eigen::Index>(j)) =
                (j == d.emotion[i] ? spec.emotion_separation : 0.0) + rng.uniform(-spec.jitter, spec.jitter);
        for (std::size_t j = 0; j < spec.n_domains; ++j)
            d.features(r, d.domain_offset() + static_cast<Eigen::Index>(j)) =
                (j == d.domain[i] ? spec.domain_separation : 0.0) + rng.uniform(-spec.jitter, spec.jitter);
        for (std::size_t j = 0; j < spec.nuisance_dims; ++j)
            d.features(r, d.nuisance_offset() + static_cast<Eigen::Index>(j)) = rng.normal();
    }
    return d;
}

AdversarialModel
init_model(const SyntheticDataset &data, const AdversarialConfig &cfg)
{
    const auto n_features = data.features.cols();
    const auto block = data.nuisance_offset();
    const auto shared = static_cast<Eigen::Index>(cfg.shared_dim == 0 ? static_cast<std::size_t>(block)
                                                                      : cfg.shared_dim);

    AdversarialModel m;
    m.trunk = Eigen::MatrixXd::Zero(shared, n_features);
    for (Eigen::Index i = 0; i < std::min(shared, block); ++i)
        m.trunk(i, i) = 1.0;

    Rng rng{derive_seed(cfg.seed, "toy-trunk")};
    const auto nuisance = n_features - block;
    if (nuisance > 0) {
        const double scale = cfg.nuisance_mix / std::sqrt(static_cast<double>(nuisance));
        for (Eigen::Index i = 0; i < shared; ++i)
            for (Eigen::Index j = block; j < n_features; ++j)
                m.trunk(i, j) = scale * rng.normal();
    }

    const auto n_emo = static_cast<Eigen::Index>(data.spec.n_emotions);
    const auto n_dom = static_cast<Eigen::Index>(data.spec.n_domains);
    m.emotion_head = {Eigen::MatrixXd::Zero(n_emo, shared), Eigen::VectorXd::Zero(n_emo)};
    m.domain_head = {Eigen::MatrixXd::Zero(n_dom, shared), Eigen::VectorXd::Zero(n_dom)};
    return m;
}

TrunkGradients
trunk_gradients(const AdversarialModel &model, const SyntheticDataset &data, double w_d)
{
    const LogitGradients g = logit_gradients(model, data, w_d);
    return {(g.emo * model.emotion_head.weights).transpose() * data.features,
            (g.dom * model.domain_head.weights).transpose() * data.features};
}

EpochStats
evaluate_model(const AdversarialModel &model, const SyntheticDataset &data, double w_d)
{
    return logit_gradients(model, data, w_d).stats;
}

TrainResult
train_adversarial(const SyntheticDataset &data, const AdversarialConfig &cfg)
{
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr))
        throw std::invalid_argument{"learning rate must be positive"};
    if (!(cfg.w_d >= 0.0))
        throw std::invalid_argument{"w_d must be non-negative"};

    TrainResult result{init_model(data, cfg), {}};
    AdversarialModel &m = result.model;
    result.trace.epochs.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Eigen::MatrixXd h = m.embed(data.features);
        LogitGradients g = logit_gradients(m, data, cfg.w_d);
        g.stats.epoch = epoch;
        if (!std::isfinite(g.stats.total) || !std::isfinite(g.stats.ce_dom))
            throw DivergenceError{epoch, "non-finite loss"};
        result.trace.epochs.push_back(g.stats);

        // d/dh of the combined objective, through both heads.
        const Eigen::MatrixXd grad_h = g.emo * m.emotion_head.weights + g.dom * m.domain_head.weights;
        const Eigen::MatrixXd grad_trunk = grad_h.transpose() * data.features;

        m.emotion_head.weights -= cfg.lr * g.emo.transpose() * h;
        m.emotion_head.bias -= cfg.lr * g.emo.colwise().sum().transpose();
        m.domain_head.weights -= cfg.lr * g.dom_head.transpose() * h;
        m.domain_head.bias -= cfg.lr * g.dom_head.colwise().sum().transpose();
        m.trunk -= cfg.lr * grad_trunk;
    }

    return result;
}

double
linear_probe_accuracy(const Eigen::MatrixXd &inputs, const std::vector<std::size_t> &labels,
                      std::size_t n_classes, std::size_t steps, double lr)
{
    const Eigen::Index n = inputs.rows();
    if (static_cast<std::size_t>(n) != labels.size() || n < 4)
        throw std::invalid_argument{"probe needs matching inputs and labels (at least 4 rows)"};

    const Eigen::Index n_fit = n / 2;
    const Eigen::MatrixXd fit = inputs.topRows(n_fit);
    const Eigen::RowVectorXd mean = fit.colwise().mean();
    Eigen::RowVectorXd sd = ((fit.rowwise() - mean).array().square().colwise().sum() /
                             static_cast<double>(n_fit))
                                .sqrt()
                                .matrix();
    for (Eigen::Index c = 0; c < sd.size(); ++c)
        if (!(sd(c) > 1e-12))
            sd(c) = 1.0;
    const Eigen::MatrixXd x = (inputs.rowwise() - mean).array().rowwise() / sd.array();

    const auto k = static_cast<Eigen::Index>(n_classes);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd grad(n_fit, k);

    for (std::size_t step = 0; step < steps; ++step) {
        const Eigen::MatrixXd z = (x.topRows(n_fit) * w.transpose()).rowwise() + b.transpose();
        for (Eigen::Index i = 0; i < n_fit; ++i) {
            const std::vector<double> p = softmax(row_vector(z, i));
            for (Eigen::Index c = 0; c < k; ++c)
                grad(i, c) = (p[static_cast<std::size_t>(c)] -
                              (labels[static_cast<std::size_t>(i)] == static_cast<std::size_t>(c) ? 1.0 : 0.0)) /
                             static_cast<double>(n_fit);
        }
        w -= lr * grad.transpose() * x.topRows(n_fit);
        b -= lr * grad.colwise().sum().transpose();
    }

    const Eigen::MatrixXd z = (x.bottomRows(n - n_fit) * w.transpose()).rowwise() + b.transpose();
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        hits += row_argmax(z, i) == labels[static_cast<std::size_t>(n_fit + i)];
    return static_cast<double>(hits) / static_cast<double>(z.rows());
}

void
TrainTrace::write_csv(std::ostream &out) const
{
    out << "epoch,emo_acc,dom_acc,ce_emo,ce_dom,total\n";
    out.precision(17);
    for (const EpochStats &e : epochs)
        out << e.epoch << ',' << e.emo_acc << ',' << e.dom_acc << ',' << e.ce_emo << ',' << e.ce_dom
            << ',' << e.total << '\n';
}

} // namespace emopack
