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

#include "emopack/audio.hpp"
#include "emopack/rng.hpp"

namespace emopack {

inline constexpr std::size_t kNumMels = 80;
inline constexpr std::size_t kFftSize = 400;
inline constexpr std::size_t kHopLength = 160;
inline constexpr double kFrameHopSeconds = 0.01;
inline constexpr double kContextSeconds = 30.0;
inline constexpr std::size_t kContextSamples = 480000;
inline constexpr std::size_t kContextFrames = 3000;

// Row-major [n_mels x n_frames] matrix of normalized log-mel values.
struct MelSpectrogram {
    std::size_t n_mels = kNumMels;
    std::size_t n_frames = 0;
    std::vector<float> values;

    float &
    at(std::size_t mel, std::size_t frame)
    {
        return values[mel * n_frames + frame];
    }

    float
    at(std::size_t mel, std::size_t frame) const
    {
        return values[mel * n_frames + frame];
    }

    bool
    operator==(const MelSpectrogram &) const = default;
};

// Slaney-scale, Slaney-normalized triangular filters, [n_mels x (n_fft/2+1)].
std::vector<double>
mel_filterbank(std::size_t n_mels = kNumMels, std::size_t n_fft = kFftSize,
               double sample_rate = kModelSampleRate);

// Whisper's log-mel front end: 400-point periodic-Hann STFT with 160-sample
// hop over a reflect-padded signal, power spectrum, 80 mel bands, log10
// clamped at 1e-10, floored at (max - 8), scaled by (x + 4) / 4. The last
// STFT frame is dropped, giving floor(N / 160) frames. Computation is in
// double precision. Throws std::invalid_argument unless the input is 16 kHz.
MelSpectrogram
log_mel_spectrogram(const Waveform &w);

struct PaddedWaveform {
    Waveform waveform;
    std::size_t original_samples = 0;
    std::size_t valid_frames = 0; // frames that carry audio, for loss masking
};

// Zero-pads the tail or truncates to exactly context_s seconds.
PaddedWaveform
pad_or_trim(const Waveform &w, double context_s = kContextSeconds);

// Circular shift: out[(i + shift) mod N] = in[i]. |shift| <= N.
Waveform
roll_waveform(const Waveform &w, std::ptrdiff_t shift);

enum class MaskFill { mean, zero };

struct SpecAugmentConfig {
    std::size_t n_freq_masks = 2;
    std::size_t max_freq_width = 27;
    std::size_t n_time_masks = 2;
    std::size_t max_time_width = 100;
    double noise_std = 0.05;
    double freq_mask_p = 0.2;
    double time_mask_p = 0.2;
    double noise_p = 0.2;
    // Waveform-level rolling, applied per packed member.
    double roll_p = 0.2;
    MaskFill fill = MaskFill::mean;

    void
    validate() const;

    static SpecAugmentConfig
    disabled() noexcept
    {
        SpecAugmentConfig c;
        c.freq_mask_p = c.time_mask_p = c.noise_p = c.roll_p = 0.0;
        return c;
    }
};

void
to_json(nlohmann::json &j, const SpecAugmentConfig &c);

void
from_json(const nlohmann::json &j, SpecAugmentConfig &c);

void
apply_freq_mask(MelSpectrogram &m, std::size_t first_bin, std::size_t width, float fill);

void
apply_time_mask(MelSpectrogram &m, std::size_t first_frame, std::size_t width, float fill);

struct SpecAugmentResult {
    MelSpectrogram mel;
    bool freq_masked = false;
    bool time_masked = false;
    bool noised = false;
    std::size_t masked_cells = 0;
};

// Masks plus Gaussian noise, each transform firing with its own
// probability. Mask widths are uniform on [0, max width] and masks
// are filled with the pre-augmentation mean (or zero).
SpecAugmentResult
spec_augment(const MelSpectrogram &m, const SpecAugmentConfig &cfg, std::uint64_t seed);

} // namespace emopack
