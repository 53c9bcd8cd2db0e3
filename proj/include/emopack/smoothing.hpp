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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emopack/corpus.hpp"
#include "emopack/emotion.hpp"

namespace emopack {

inline constexpr double kAlphaCap = 0.45;

// Margin used when the primary-emotion guard has to pull neutral below the
// original primary class.
inline constexpr double kRetentionEpsilon = 1e-9;

struct SmoothingContext {
    double mean_intensity = 0.0;
    std::size_t n_classes = kNumEmotions;
    double alpha_cap = kAlphaCap;
};

// Sum of all class scores of one sample.
double
sample_intensity(const EmotionDistribution &e) noexcept;

// Mean intensity over a dataset, reduced with a fixed pairwise tree so the
// result does not depend on how the work is split.
double
mean_intensity(std::span<const Sample> samples);

double
mean_intensity(std::span<const double> intensities);

// alpha = min(|mean - E| / mean, cap) for E below the mean, 0 otherwise.
// Throws DataError when the context mean is not positive.
double
smoothing_factor(double intensity, const SmoothingContext &ctx);

// Blends every class toward alpha / M:
//   e'_j = e_j (1 - alpha) + (1 - e_j) alpha / M
// then enforces that the primary emotion of `e` is still primary in e'.
EmotionDistribution
smooth(const EmotionDistribution &e, const SmoothingContext &ctx);

// Restores argmax(smoothed) == argmax(original) by adjusting the neutral
// score. Returns true when an adjustment was made.
bool
retain_primary_emotion(const EmotionDistribution &original, EmotionDistribution &smoothed);

struct DatasetSmoothingStats {
    std::map<std::string, double> mean_intensity; // per `dataset`
    std::map<std::string, std::size_t> n_smoothed;
    std::size_t n_guard_adjustments = 0;
};

// Smooths every sample in place, using the mean intensity of the sample's
// own source dataset.
DatasetSmoothingStats
smooth_by_dataset(std::vector<Sample> &samples);

} // namespace emopack
