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

#include "emopack/smoothing.hpp"

#include <cmath>
#include <numeric>

#include "emopack/error.hpp"

namespace emopack {
namespace {

double
pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

EmotionDistribution
blend_toward_uniform(const EmotionDistribution &e, double alpha, std::size_t n_classes)
{
    const double spread = alpha / static_cast<double>(n_classes);
    EmotionDistribution out;
    for (std::size_t j = 0; j < kNumEmotions; ++j)
        out.scores[j] = e.scores[j] * (1.0 - alpha) + (1.0 - e.scores[j]) * spread;
    return out;
}

} // namespace

double
sample_intensity(const EmotionDistribution &e) noexcept
{
    double s = 0.0;
    for (double v : e.scores)
        s += v;
    return s;
}

double
mean_intensity(std::span<const double> intensities)
{
    if (intensities.empty())
        throw DataError{"mean intensity of an empty dataset"};
    return pairwise_sum(intensities) / static_cast<double>(intensities.size());
}

double
mean_intensity(std::span<const Sample> samples)
{
    std::vector<double> e;
    e.reserve(samples.size());
    for (const Sample &s : samples)
        e.push_back(sample_intensity(s.emotion));
    return mean_intensity(e);
}

double
smoothing_factor(double intensity, const SmoothingContext &ctx)
{
    if (!(ctx.mean_intensity > 0.0) || !std::isfinite(ctx.mean_intensity))
        throw DataError{"degenerate dataset: mean emotional intensity is " +
                        std::to_string(ctx.mean_intensity)};

    if (intensity >= ctx.mean_intensity)
        return 0.0;

    return std::min(std::abs(ctx.mean_intensity - intensity) / ctx.mean_intensity,
                    ctx.alpha_cap);
}

bool
retain_primary_emotion(const EmotionDistribution &original, EmotionDistribution &smoothed)
{
    const std::size_t primary = argmax(original.scores);
    if (argmax(smoothed.scores) == primary)
        return false;

    constexpr std::size_t neutral = index_of(Emotion::neutral);
    if (primary != neutral) {
        smoothed.scores[neutral] = std::max(0.0, smoothed.scores[primary] - kRetentionEpsilon);
    } else {
        double best_other = 0.0;
        for (std::size_t j = 0; j < kNumEmotions; ++j)
            if (j != neutral)
                best_other = std::max(best_other, smoothed.scores[j]);
        smoothed.scores[neutral] = best_other + kRetentionEpsilon;
    }

    if (argmax(smoothed.scores) != primary)
        throw InvariantError{"primary emotion '" + std::string{kEmotionNames[primary]} +
                             "' cannot be retained by adjusting neutral"};
    return true;
}

EmotionDistribution
smooth(const EmotionDistribution &e, const SmoothingContext &ctx)
{
    const double alpha = smoothing_factor(sample_intensity(e), ctx);
    if (alpha == 0.0)
        return e;

    EmotionDistribution out = blend_toward_uniform(e, alpha, ctx.n_classes);
    retain_primary_emotion(e, out);
    return out;
}

DatasetSmoothingStats
smooth_by_dataset(std::vector<Sample> &samples)
{
    // Each dataset's intensities keep input order, which fixes the reduction.
    std::map<std::string, std::vector<double>> intensities;
    for (const Sample &s : samples)
        intensities[s.dataset].push_back(sample_intensity(s.emotion));

    DatasetSmoothingStats stats;
    for (const auto &[dataset, values] : intensities) {
        stats.mean_intensity[dataset] = mean_intensity(values);
        stats.n_smoothed[dataset] = 0;
    }

    for (Sample &s : samples) {
        SmoothingContext ctx{.mean_intensity = stats.mean_intensity.at(s.dataset)};
        const double alpha = smoothing_factor(sample_intensity(s.emotion), ctx);
        if (alpha == 0.0)
            continue;

        EmotionDistribution out = blend_toward_uniform(s.emotion, alpha, ctx.n_classes);
        if (retain_primary_emotion(s.emotion, out))
            ++stats.n_guard_adjustments;

        s.emotion = out;
        ++stats.n_smoothed[s.dataset];
    }

    return stats;
}

} // namespace emopack
