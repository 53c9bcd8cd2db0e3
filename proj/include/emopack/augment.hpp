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
#include <limits>
#include <string_view>

#include <json.hpp>

#include "emopack/audio.hpp"
#include "emopack/rng.hpp"

namespace emopack {

// Waveform effects in their fixed application order.
enum class Effect : std::uint8_t {
    polarity,
    gain,
    reversal,
    noise,
    resample,
    equalization,
    echo,
};

inline constexpr std::size_t kNumEffects = 7;
inline constexpr std::array<std::string_view, kNumEffects> kEffectNames{
    "polarity", "gain", "reversal", "noise", "resample", "equalization", "echo"};

inline constexpr double kDefaultEffectProbability = 0.2;

// Sentinel SNR meaning "no noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct AugmentConfig {
    std::array<double, kNumEffects> probability{
        kDefaultEffectProbability, kDefaultEffectProbability, kDefaultEffectProbability,
        kDefaultEffectProbability, kDefaultEffectProbability, kDefaultEffectProbability,
        kDefaultEffectProbability};

    Range gain_db{-6.0, 6.0};
    Range noise_snr_db{5.0, 40.0};
    Range resample_factor{0.9, 1.1};
    Range eq_center_hz{100.0, 6000.0}; // drawn log-uniformly
    Range eq_gain_db{-12.0, 12.0};
    Range eq_q{0.5, 2.0};
    Range echo_delay_ms{50.0, 400.0};
    Range echo_decay{0.1, 0.5};

    double &
    p(Effect e) noexcept
    {
        return probability[static_cast<std::size_t>(e)];
    }

    double
    p(Effect e) const noexcept
    {
        return probability[static_cast<std::size_t>(e)];
    }

    // Throws ConfigError on probabilities outside [0, 1] or degenerate ranges.
    void
    validate() const;

    static AugmentConfig
    disabled() noexcept
    {
        AugmentConfig c;
        c.probability.fill(0.0);
        return c;
    }
};

void
to_json(nlohmann::json &j, const AugmentConfig &c);

void
from_json(const nlohmann::json &j, AugmentConfig &c);

Waveform
polarity_invert(const Waveform &w);

// Multiplies by 10^(g/20). No clipping.
Waveform
apply_gain_db(const Waveform &w, double gain_db);

Waveform
reverse_audio(const Waveform &w);

// Adds white Gaussian noise rescaled so the realized signal-to-noise power
// ratio equals snr_db. snr_db == kNoNoise returns the input unchanged.
Waveform
add_noise(const Waveform &w, double snr_db, Rng &rng);

// Pitch/tempo perturbation: the signal is resampled by `factor` but keeps its
// declared rate. Output length is round(N / factor). factor in [0.5, 2].
Waveform
resample(const Waveform &w, double factor);

// One peaking biquad (RBJ cookbook), zero initial state.
Waveform
equalize(const Waveform &w, double center_hz, double gain_db, double q);

// y[n] = x[n] + decay * x[n - d], d = round(delay_ms * rate / 1000), with the
// output extended by d samples.
Waveform
add_echo(const Waveform &w, double delay_ms, double decay);

struct AugmentResult {
    Waveform waveform;
    std::array<bool, kNumEffects> fired{};
};

// Evaluates each effect in order with its own probability. Every effect
// draws from an independent stream derived from (seed, effect index), so
// toggling one effect never shifts the randomness of another.
AugmentResult
augment_waveform(const Waveform &w, const AugmentConfig &cfg, std::uint64_t seed);

} // namespace emopack
