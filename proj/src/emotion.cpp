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

#include "emopack/emotion.hpp"

#include <cmath>
#include <string>

#include "emopack/error.hpp"

namespace emopack {

std::optional<Emotion>
emotion_from_string(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kNumEmotions; ++i)
        if (kEmotionNames[i] == name)
            return static_cast<Emotion>(i);

    return std::nullopt;
}

void
validate(const EmotionDistribution &d, bool require_mass)
{
    bool any_positive = false;
    for (std::size_t i = 0; i < kNumEmotions; ++i) {
        double s = d.scores[i];
        if (!std::isfinite(s) || s < 0.0)
            throw DataError{"emotion score for '" + std::string{kEmotionNames[i]} +
                            "' must be finite and non-negative, got " + std::to_string(s)};
        any_positive = any_positive || s > 0.0;
    }

    if (require_mass && !any_positive)
        throw DataError{"emotion distribution has no positive score"};
}

std::size_t
argmax(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument{"argmax of an empty vector"};

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;

    return best;
}

} // namespace emopack
