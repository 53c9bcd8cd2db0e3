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
#include <filesystem>
#include <span>
#include <vector>

namespace emopack {

inline constexpr std::uint32_t kModelSampleRate = 16000;

// Mono PCM audio as float amplitudes (nominally in [-1, 1]).
struct Waveform {
    std::vector<float> samples;
    std::uint32_t sample_rate_hz = kModelSampleRate;

    std::size_t
    size() const noexcept
    {
        return samples.size();
    }

    double
    duration_s() const noexcept
    {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
    }

    bool
    operator==(const Waveform &) const = default;
};

// Throws std::invalid_argument for a zero rate, an empty signal or
// non-finite samples.
void
validate(const Waveform &w);

double
mean_power(std::span<const float> x) noexcept;

// RIFF/WAVE reader for mono PCM 16/24/32-bit integer and 32/64-bit float.
// Multi-channel files are rejected. Throws DataError.
Waveform
read_wav(const std::filesystem::path &path);

enum class WavEncoding { pcm16, float32 };

void
write_wav(const std::filesystem::path &path, const Waveform &w,
          WavEncoding encoding = WavEncoding::float32);

// Band-limited interpolation: output[m] = sum_k x[k] h(m * step - k) with a
// 64-tap Kaiser-windowed sinc (beta 8.6). The cutoff drops to 1/step when
// step > 1 to suppress aliasing. Output length is round(N / step).
std::vector<float>
sinc_interpolate(std::span<const float> x, double step);

// Rate conversion that also updates the declared rate.
Waveform
convert_sample_rate(const Waveform &w, std::uint32_t target_rate_hz);

} // namespace emopack
