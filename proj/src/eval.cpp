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

#include "emopack/eval.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "emopack/error.hpp"

namespace emopack {

void
PredictionSet::validate() const
{
    if (predictions.size() != references.size())
        throw std::invalid_argument{"predictions and references differ in length"};
    if (n_classes == 0)
        throw std::invalid_argument{"prediction set needs at least one class"};
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] >= n_classes || references[i] >= n_classes)
            throw std::invalid_argument{"class index out of range at position " + std::to_string(i)};
}

std::vector<std::vector<std::size_t>>
confusion_matrix(const PredictionSet &p)
{
    p.validate();
    std::vector<std::vector<std::size_t>> cm(p.n_classes, std::vector<std::size_t>(p.n_classes, 0));
    for (std::size_t i = 0; i < p.predictions.size(); ++i)
        ++cm[p.references[i]][p.predictions[i]];
    return cm;
}

double
accuracy(const PredictionSet &p)
{
    p.validate();
    if (p.predictions.empty())
        throw std::invalid_argument{"accuracy of an empty prediction set"};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.predictions.size(); ++i)
        correct += p.predictions[i] == p.references[i];
    return static_cast<double>(correct) / static_cast<double>(p.predictions.size());
}

double
micro_f1(const PredictionSet &p)
{
    const auto cm = confusion_matrix(p);
    if (p.predictions.empty())
        throw std::invalid_argument{"micro F1 of an empty prediction set"};

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < p.n_classes; ++c)
        for (std::size_t k = 0; k < p.n_classes; ++k) {
            if (c == k)
                tp += cm[c][k];
            else {
                fn += cm[c][k]; // reference c missed
                fp += cm[c][k]; // predicted k wrongly
            }
        }

    const double f1 = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    if (std::abs(f1 - accuracy(p)) > 1e-12)
        throw InvariantError{"micro F1 differs from accuracy on single-label data"};
    return f1;
}

std::vector<std::optional<double>>
per_class_f1(const PredictionSet &p)
{
    const auto cm = confusion_matrix(p);
    std::vector<std::optional<double>> out(p.n_classes);
    for (std::size_t c = 0; c < p.n_classes; ++c) {
        std::size_t tp = cm[c][c], fp = 0, fn = 0;
        for (std::size_t k = 0; k < p.n_classes; ++k) {
            if (k == c)
                continue;
            fn += cm[c][k];
            fp += cm[k][c];
        }
        if (tp + fp + fn > 0)
            out[c] = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
    }
    return out;
}

double
mean_pearson(const Eigen::MatrixXd &scores, const Eigen::MatrixXd &targets)
{
    if (scores.rows() != targets.rows() || scores.cols() != targets.cols())
        throw std::invalid_argument{"mean_pearson: score and target shapes differ"};
    if (scores.rows() < 2)
        throw std::invalid_argument{"mean_pearson needs at least two samples"};
    if (scores.cols() == 0)
        throw std::invalid_argument{"mean_pearson needs at least one class"};

    double sum_r = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        const Eigen::VectorXd x = scores.col(c).array() - scores.col(c).mean();
        const Eigen::VectorXd y = targets.col(c).array() - targets.col(c).mean();
        const double sxx = x.squaredNorm();
        const double syy = y.squaredNorm();
        if (!(syy > 0.0))
            throw std::invalid_argument{"mean_pearson: target column " + std::to_string(c) +
                                        " has zero variance"};
        if (!(sxx > 0.0))
            throw std::invalid_argument{"mean_pearson: score column " + std::to_string(c) +
                                        " has zero variance"};
        sum_r += x.dot(y) / std::sqrt(sxx * syy);
    }
    return sum_r / static_cast<double>(scores.cols());
}

std::size_t
predict_class(std::span<const double> logits, const LossConfig &cfg)
{
    std::vector<double> z{logits.begin(), logits.end()};
    if (!cfg.allowed_mask.empty())
        z = ban_labels(z, cfg.allowed_mask);
    if (!cfg.priors.empty())
        z = adjust_logits(z, cfg.priors, cfg.tau);
    return argmax(z);
}

MetricReport
evaluate(const PredictionSet &p)
{
    return {micro_f1(p), per_class_f1(p), p.predictions.size()};
}

nlohmann::json
to_json(const MetricReport &r)
{
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const std::string name = r.per_class.size() == kNumEmotions ? std::string{kEmotionNames[c]}
                                                                    : std::to_string(c);
        per_class[name] = r.per_class[c] ? nlohmann::json(*r.per_class[c]) : nlohmann::json(nullptr);
    }
    return {{"micro_f1", r.micro_f1}, {"per_class", std::move(per_class)}, {"n", r.n}};
}

} // namespace emopack
