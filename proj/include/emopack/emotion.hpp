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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace emopack {

// The canonical label space. The enumerator order is the vector index used
// by every score vector, file format and logit layout in the project.
enum class Emotion : std::uint8_t {
    happiness,
    sadness,
    disgust,
    fear,
    surprise,
    anger,
    other,
    neutral,
};

inline constexpr std::size_t kNumEmotions = 8;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames{
    "happiness", "sadness", "disgust", "fear", "surprise", "anger", "other", "neutral"};

constexpr std::size_t
index_of(Emotion e) noexcept
{
    return static_cast<std::size_t>(e);
}

constexpr std::string_view
to_string(Emotion e) noexcept
{
    return kEmotionNames[index_of(e)];
}

std::optional<Emotion>
emotion_from_string(std::string_view name) noexcept;

// Non-negative, unnormalized scores over the canonical classes.
struct EmotionDistribution {
    std::array<double, kNumEmotions> scores{};

    double &
    operator[](Emotion e) noexcept
    {
        return scores[index_of(e)];
    }

    double
    operator[](Emotion e) const noexcept
    {
        return scores[index_of(e)];
    }

    static EmotionDistribution
    one_hot(Emotion e, double mass = 1.0) noexcept
    {
        EmotionDistribution d;
        d[e] = mass;
        return d;
    }

    bool
    operator==(const EmotionDistribution &) const = default;
};

// Throws DataError unless every score is finite and non-negative and, when
// `require_mass` is set, at least one score is positive.
void
validate(const EmotionDistribution &d, bool require_mass = true);

// Index of the largest value; ties resolve to the lowest index.
std::size_t
argmax(std::span<const double> values);

inline Emotion
primary_emotion(const EmotionDistribution &d)
{
    return static_cast<Emotion>(argmax(d.scores));
}

} // namespace emopack
