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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "emopack/emotion.hpp"
#include "emopack/losses.hpp"

namespace emopack {

struct PredictionSet {
    std::vector<std::size_t> predictions;
    std::vector<std::size_t> references;
    std::size_t n_classes = kNumEmotions;

    // Throws std::invalid_argument on length mismatch or out-of-range indices.
    void
    validate() const;
};

// Confusion counts, rows = reference, columns = prediction.
std::vector<std::vector<std::size_t>>
confusion_matrix(const PredictionSet &p);

// Pooled TP/FP/FN F1. For single-label multi-class data this is accuracy;
// the identity is checked and a mismatch raises InvariantError.
double
micro_f1(const PredictionSet &p);

double
accuracy(const PredictionSet &p);

// 2TP / (2TP + FP + FN) per class; nullopt when the class never occurs in
// either list.
std::vector<std::optional<double>>
per_class_f1(const PredictionSet &p);

// Pearson r per column, averaged over columns. Rows are samples. Throws
// std::invalid_argument with fewer than two rows or a constant target column.
double
mean_pearson(const Eigen::MatrixXd &scores, const Eigen::MatrixXd &targets);

// Class decision used at evaluation time: ban -> adjust -> argmax.
std::size_t
predict_class(std::span<const double> logits, const LossConfig &cfg);

struct MetricReport {
    double micro_f1 = 0.0;
    std::vector<std::optional<double>> per_class;
    std::size_t n = 0;
};

MetricReport
evaluate(const PredictionSet &p);

// {"micro_f1": .., "per_class": {"anger": .., "disgust": null, ..}, "n": ..}
nlohmann::json
to_json(const MetricReport &r);

} // namespace emopack
