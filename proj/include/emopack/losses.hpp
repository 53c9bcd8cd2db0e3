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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "emopack/corpus.hpp"
#include "emopack/emotion.hpp"

namespace emopack {

// Added to the logits of classes a test corpus does not contain.
inline constexpr double kBanLogit = -1e27;

inline constexpr double kDefaultDomainWeight = 0.01;

struct LossConfig {
    double w_d = kDefaultDomainWeight;
    double tau = 1.0;
    std::vector<double> priors;            // over the emotion classes, sums to 1
    std::vector<std::uint8_t> allowed_mask; // 1 = class may be predicted

    void
    validate() const;
};

void
to_json(nlohmann::json &j, const LossConfig &c);

// Keys priors and mask by canonical class name.
void
from_json(const nlohmann::json &j, LossConfig &c);

struct LossReport {
    double ce_emo = 0.0;
    double ce_dom = 0.0;
    double total = 0.0;
    std::vector<double> grad_emo; // d total / d emotion logits
    std::vector<double> grad_dom; // d total / d domain logits
};

double
log_sum_exp(std::span<const double> z);

std::vector<double>
softmax(std::span<const double> z);

// -sum_j qhat_j log softmax(z)_j with qhat = q / sum(q). Throws
// std::invalid_argument on a size mismatch or when q has no positive mass.
double
soft_cross_entropy(std::span<const double> logits, std::span<const double> target);

// softmax(z) - qhat
std::vector<double>
soft_cross_entropy_grad(std::span<const double> logits, std::span<const double> target);

// total = CE_emo - w_d * CE_dom, with analytic gradients. The domain
// gradient carries the minus sign: descending on `total` ascends on CE_dom.
LossReport
combined_loss(std::span<const double> emo_logits, std::span<const double> emo_target,
              std::span<const double> dom_logits, std::size_t dom_id, double w_d);

std::vector<double>
ban_labels(std::span<const double> logits, std::span<const std::uint8_t> allowed_mask);

// z_j - tau * ln(prior_j)
std::vector<double>
adjust_logits(std::span<const double> logits, std::span<const double> priors, double tau);

// Mean over classes of (sigmoid(z_j) - t_j)^2.
double
sigmoid_mse(std::span<const double> logits, std::span<const double> targets);

std::vector<double>
sigmoid_mse_grad(std::span<const double> logits, std::span<const double> targets);

// Soft cross-entropy averaged over supervised frames only.
// `frame_logits` is row-major [n_frames x n_classes].
double
masked_frame_loss(std::span<const double> frame_logits, std::size_t n_classes,
                  std::span<const EmotionDistribution> targets,
                  std::span<const std::uint8_t> mask);

// Normalized total canonical label mass of a split.
std::vector<double>
class_priors(std::span<const Sample> samples);

} // namespace emopack
