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

#include "emopack/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "emopack/error.hpp"

namespace emopack {
namespace {

using nlohmann::json;

double
positive_mass(std::span<const double> q)
{
    double mass = 0.0;
    for (double v : q) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument{"soft target entries must be finite and non-negative"};
        mass += v;
    }
    if (!(mass > 0.0))
        throw std::invalid_argument{"soft target has no positive mass"};
    return mass;
}

void
require_same_size(std::size_t a, std::size_t b, const char *what)
{
    if (a != b)
        throw std::invalid_argument{std::string{what} + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")"};
    if (a == 0)
        throw std::invalid_argument{std::string{what} + ": empty input"};
}

double
sigmoid(double x) noexcept
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

void
LossConfig::validate() const
{
    if (!(w_d >= 0.0) || !std::isfinite(w_d))
        throw ConfigError{"loss w_d must be non-negative"};
    if (!std::isfinite(tau))
        throw ConfigError{"loss tau must be finite"};
    if (!priors.empty()) {
        double sum = 0.0;
        for (double p : priors) {
            if (!(p > 0.0))
                throw ConfigError{"class priors must be positive"};
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError{"class priors must sum to 1 (got " + std::to_string(sum) + ")"};
    }
    if (!allowed_mask.empty() &&
        std::none_of(allowed_mask.begin(), allowed_mask.end(), [](std::uint8_t a) { return a != 0; }))
        throw ConfigError{"allowed mask bans every class"};
}

void
to_json(json &j, const LossConfig &c)
{
    j = {{"w_d", c.w_d}, {"tau", c.tau}};
    if (c.priors.size() == kNumEmotions) {
        json p = json::object();
        for (std::size_t i = 0; i < kNumEmotions; ++i)
            p[std::string{kEmotionNames[i]}] = c.priors[i];
        j["priors"] = std::move(p);
    }
    if (c.allowed_mask.size() == kNumEmotions) {
        json a = json::array();
        for (std::size_t i = 0; i < kNumEmotions; ++i)
            if (c.allowed_mask[i])
                a.push_back(kEmotionNames[i]);
        j["allowed"] = std::move(a);
    }
}

void
from_json(const json &j, LossConfig &c)
{
    if (!j.is_object())
        throw ConfigError{"loss config must be an object"};

    c.w_d = j.value("w_d", c.w_d);
    c.tau = j.value("tau", c.tau);

    if (auto it = j.find("priors"); it != j.end()) {
        if (!it->is_object())
            throw ConfigError{"priors must map canonical class names to probabilities"};
        c.priors.assign(kNumEmotions, 0.0);
        for (const auto &[name, value] : it->items()) {
            auto e = emotion_from_string(name);
            if (!e)
                throw ConfigError{"priors name unknown class '" + name + "'"};
            c.priors[index_of(*e)] = value.get<double>();
        }
    }

    if (auto it = j.find("allowed"); it != j.end()) {
        if (!it->is_array())
            throw ConfigError{"allowed must be an array of canonical class names"};
        c.allowed_mask.assign(kNumEmotions, 0);
        for (const auto &name : *it) {
            auto e = emotion_from_string(name.get<std::string>());
            if (!e)
                throw ConfigError{"allowed names unknown class '" + name.get<std::string>() + "'"};
            c.allowed_mask[index_of(*e)] = 1;
        }
    }
    c.validate();
}

double
log_sum_exp(std::span<const double> z)
{
    if (z.empty())
        throw std::invalid_argument{"log_sum_exp of an empty vector"};
    const double m = *std::max_element(z.begin(), z.end());
    double acc = 0.0;
    for (double v : z)
        acc += std::exp(v - m);
    return m + std::log(acc);
}

std::vector<double>
softmax(std::span<const double> z)
{
    const double lse = log_sum_exp(z);
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        p[i] = std::exp(z[i] - lse);
    return p;
}

double
soft_cross_entropy(std::span<const double> logits, std::span<const double> target)
{
    require_same_size(logits.size(), target.size(), "soft_cross_entropy");
    const double mass = positive_mass(target);
    const double lse = log_sum_exp(logits);

    double loss = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j)
        if (target[j] > 0.0)
            loss -= (target[j] / mass) * (logits[j] - lse);
    return loss;
}

std::vector<double>
soft_cross_entropy_grad(std::span<const double> logits, std::span<const double> target)
{
    require_same_size(logits.size(), target.size(), "soft_cross_entropy_grad");
    const double mass = positive_mass(target);
    std::vector<double> g = softmax(logits);
    for (std::size_t j = 0; j < g.size(); ++j)
        g[j] -= target[j] / mass;
    return g;
}

LossReport
combined_loss(std::span<const double> emo_logits, std::span<const double> emo_target,
              std::span<const double> dom_logits, std::size_t dom_id, double w_d)
{
    if (dom_id >= dom_logits.size())
        throw std::invalid_argument{"domain id " + std::to_string(dom_id) + " out of range for " +
                                    std::to_string(dom_logits.size()) + " domains"};
    if (!(w_d >= 0.0))
        throw std::invalid_argument{"w_d must be non-negative"};

    std::vector<double> dom_target(dom_logits.size(), 0.0);
    dom_target[dom_id] = 1.0;

    LossReport r;
    r.ce_emo = soft_cross_entropy(emo_logits, emo_target);
    r.ce_dom = soft_cross_entropy(dom_logits, dom_target);
    r.total = r.ce_emo - w_d * r.ce_dom;

    r.grad_emo = soft_cross_entropy_grad(emo_logits, emo_target);
    r.grad_dom = soft_cross_entropy_grad(dom_logits, dom_target);
    for (double &g : r.grad_dom)
        g *= -w_d;
    return r;
}

std::vector<double>
ban_labels(std::span<const double> logits, std::span<const std::uint8_t> allowed_mask)
{
    require_same_size(logits.size(), allowed_mask.size(), "ban_labels");
    if (std::none_of(allowed_mask.begin(), allowed_mask.end(), [](std::uint8_t a) { return a != 0; }))
        throw std::invalid_argument{"ban_labels: every class is banned"};

    std::vector<double> out{logits.begin(), logits.end()};
    for (std::size_t j = 0; j < out.size(); ++j)
        if (!allowed_mask[j])
            out[j] += kBanLogit;
    return out;
}

std::vector<double>
adjust_logits(std::span<const double> logits, std::span<const double> priors, double tau)
{
    require_same_size(logits.size(), priors.size(), "adjust_logits");
    std::vector<double> out{logits.begin(), logits.end()};
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (!(priors[j] > 0.0))
            throw std::invalid_argument{"adjust_logits: prior " + std::to_string(j) +
                                        " must be positive"};
        out[j] -= tau * std::log(priors[j]);
    }
    return out;
}

double
sigmoid_mse(std::span<const double> logits, std::span<const double> targets)
{
    require_same_size(logits.size(), targets.size(), "sigmoid_mse");
    double acc = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        const double d = sigmoid(logits[j]) - targets[j];
        acc += d * d;
    }
    return acc / static_cast<double>(logits.size());
}

std::vector<double>
sigmoid_mse_grad(std::span<const double> logits, std::span<const double> targets)
{
    require_same_size(logits.size(), targets.size(), "sigmoid_mse_grad");
    const double n = static_cast<double>(logits.size());
    std::vector<double> g(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        const double s = sigmoid(logits[j]);
        g[j] = 2.0 * (s - targets[j]) * s * (1.0 - s) / n;
    }
    return g;
}

double
masked_frame_loss(std::span<const double> frame_logits, std::size_t n_classes,
                  std::span<const EmotionDistribution> targets, std::span<const std::uint8_t> mask)
{
    if (n_classes != kNumEmotions)
        throw std::invalid_argument{"masked_frame_loss expects emotion logits"};
    const std::size_t n_frames = targets.size();
    if (frame_logits.size() != n_frames * n_classes || mask.size() != n_frames)
        throw std::invalid_argument{"masked_frame_loss: inconsistent frame counts"};

    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 0; t < n_frames; ++t) {
        if (!mask[t])
            continue;
        acc += soft_cross_entropy(frame_logits.subspan(t * n_classes, n_classes), targets[t].scores);
        ++used;
    }
    if (used == 0)
        throw std::invalid_argument{"masked_frame_loss: every frame is padding"};
    return acc / static_cast<double>(used);
}

std::vector<double>
class_priors(std::span<const Sample> samples)
{
    std::vector<double> mass(kNumEmotions, 0.0);
    for (const Sample &s : samples)
        for (std::size_t j = 0; j < kNumEmotions; ++j)
            mass[j] += s.emotion.scores[j];

    double total = 0.0;
    for (double m : mass)
        total += m;
    if (!(total > 0.0))
        throw DataError{"cannot estimate class priors: no label mass"};

    // Classes absent from the split still need a positive prior for the
    // log in adjust_logits; give them a vanishing share.
    constexpr double kFloor = 1e-12;
    double norm = 0.0;
    for (double &m : mass) {
        m = std::max(m / total, kFloor);
        norm += m;
    }
    for (double &m : mass)
        m /= norm;
    return mass;
}

} // namespace emopack
