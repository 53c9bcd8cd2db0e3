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

#include "emopack/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "emopack/error.hpp"

namespace emopack {
namespace {

using nlohmann::json;

constexpr std::size_t kNumBins = kFftSize / 2 + 1;

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double
hz_to_mel(double hz)
{
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (hz >= min_log_hz)
        return min_log_mel + std::log(hz / min_log_hz) / logstep;
    return hz / f_sp;
}

double
mel_to_hz(double mel)
{
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (mel >= min_log_mel)
        return min_log_hz * std::exp(logstep * (mel - min_log_mel));
    return f_sp * mel;
}

// numpy-style "reflect" index (edge sample not repeated), valid for any
// offset even when the pad exceeds the signal length.
std::size_t
reflect_index(std::ptrdiff_t i, std::size_t n)
{
    if (n == 1)
        return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0)
        i += period;
    if (i >= static_cast<std::ptrdiff_t>(n))
        i = period - i;
    return static_cast<std::size_t>(i);
}

// Shared STFT state. The plan is created once; fftw_execute_dft_r2c on
// caller-owned buffers is reentrant.
class StftKernel {
public:
    StftKernel()
    {
        window_.resize(kFftSize);
        for (std::size_t n = 0; n < kFftSize; ++n)
            window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / kFftSize);

        filters_ = mel_filterbank();

        std::vector<double> in(kFftSize);
        std::vector<fftw_complex> out(kNumBins);
        std::lock_guard<std::mutex> lock{planner_mutex()};
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.data(), out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan_ == nullptr)
            throw std::runtime_error{"failed to create FFT plan"};
    }

    StftKernel(const StftKernel &) = delete;
    StftKernel &
    operator=(const StftKernel &) = delete;

    ~StftKernel()
    {
        std::lock_guard<std::mutex> lock{planner_mutex()};
        fftw_destroy_plan(plan_);
    }

    std::span<const double>
    window() const noexcept
    {
        return window_;
    }

    std::span<const double>
    filters() const noexcept
    {
        return filters_;
    }

    void
    execute(double *in, fftw_complex *out) const noexcept
    {
        fftw_execute_dft_r2c(plan_, in, out);
    }

    static std::mutex &
    planner_mutex()
    {
        static std::mutex m;
        return m;
    }

private:
    std::vector<double> window_;
    std::vector<double> filters_;
    fftw_plan plan_ = nullptr;
};

const StftKernel &
stft_kernel()
{
    static const StftKernel kernel;
    return kernel;
}

} // namespace

std::vector<double>
mel_filterbank(std::size_t n_mels, std::size_t n_fft, double sample_rate)
{
    const std::size_t n_bins = n_fft / 2 + 1;
    const double fmax = sample_rate / 2.0;

    std::vector<double> fft_freqs(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        fft_freqs[k] = fmax * static_cast<double>(k) / static_cast<double>(n_bins - 1);

    const double mel_min = hz_to_mel(0.0);
    const double mel_max = hz_to_mel(fmax);
    std::vector<double> hz_points(n_mels + 2);
    for (std::size_t i = 0; i < n_mels + 2; ++i)
        hz_points[i] = mel_to_hz(mel_min + (mel_max - mel_min) * static_cast<double>(i) /
                                               static_cast<double>(n_mels + 1));

    std::vector<double> weights(n_mels * n_bins, 0.0);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = hz_points[m], center = hz_points[m + 1], hi = hz_points[m + 2];
        const double enorm = 2.0 / (hi - lo);
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double lower = (fft_freqs[k] - lo) / (center - lo);
            const double upper = (hi - fft_freqs[k]) / (hi - center);
            weights[m * n_bins + k] = std::max(0.0, std::min(lower, upper)) * enorm;
        }
    }
    return weights;
}

MelSpectrogram
log_mel_spectrogram(const Waveform &w)
{
    if (w.sample_rate_hz != kModelSampleRate)
        throw std::invalid_argument{"log-mel features require 16000 Hz audio, got " +
                                    std::to_string(w.sample_rate_hz) + " Hz"};
    if (w.samples.empty())
        throw std::invalid_argument{"log-mel features of an empty waveform"};

    const StftKernel &kernel = stft_kernel();
    const std::size_t n = w.samples.size();
    const std::size_t n_frames = n / kHopLength;
    constexpr auto pad = static_cast<std::ptrdiff_t>(kFftSize / 2);

    MelSpectrogram out;
    out.n_frames = n_frames;
    if (n_frames == 0)
        return out;

    std::vector<double> logmel(kNumMels * n_frames);
    std::vector<double> frame(kFftSize);
    std::vector<fftw_complex> spectrum(kNumBins);
    std::vector<double> power(kNumBins);
    const std::span<const double> window = kernel.window();
    const std::span<const double> filters = kernel.filters();

    for (std::size_t t = 0; t < n_frames; ++t) {
        const auto start = static_cast<std::ptrdiff_t>(t * kHopLength) - pad;
        for (std::size_t i = 0; i < kFftSize; ++i) {
            const std::ptrdiff_t src = start + static_cast<std::ptrdiff_t>(i);
            const std::size_t idx =
                (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) ? static_cast<std::size_t>(src)
                                                                   : reflect_index(src, n);
            frame[i] = static_cast<double>(w.samples[idx]) * window[i];
        }

        kernel.execute(frame.data(), spectrum.data());
        for (std::size_t k = 0; k < kNumBins; ++k)
            power[k] = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];

        for (std::size_t m = 0; m < kNumMels; ++m) {
            const double *row = filters.data() + m * kNumBins;
            double acc = 0.0;
            for (std::size_t k = 0; k < kNumBins; ++k)
                acc += row[k] * power[k];
            logmel[m * n_frames + t] = std::log10(std::max(acc, 1e-10));
        }
    }

    const double floor = *std::max_element(logmel.begin(), logmel.end()) - 8.0;
    out.values.resize(logmel.size());
    for (std::size_t i = 0; i < logmel.size(); ++i)
        out.values[i] = static_cast<float>((std::max(logmel[i], floor) + 4.0) / 4.0);

    return out;
}

PaddedWaveform
pad_or_trim(const Waveform &w, double context_s)
{
    if (!(context_s > 0.0))
        throw std::invalid_argument{"context length must be positive"};

    const auto target = static_cast<std::size_t>(
        std::llround(context_s * static_cast<double>(w.sample_rate_hz)));

    PaddedWaveform out;
    out.original_samples = w.samples.size();
    out.waveform.sample_rate_hz = w.sample_rate_hz;
    out.waveform.samples.assign(target, 0.0F);
    const std::size_t keep = std::min(target, w.samples.size());
    std::copy_n(w.samples.begin(), keep, out.waveform.samples.begin());

    const std::size_t hop_samples = static_cast<std::size_t>(
        std::llround(kFrameHopSeconds * static_cast<double>(w.sample_rate_hz)));
    const std::size_t total_frames = target / hop_samples;
    out.valid_frames = std::min(total_frames, (keep + hop_samples - 1) / hop_samples);
    return out;
}

Waveform
roll_waveform(const Waveform &w, std::ptrdiff_t shift)
{
    const auto n = static_cast<std::ptrdiff_t>(w.samples.size());
    if (shift > n || shift < -n)
        throw std::invalid_argument{"roll shift " + std::to_string(shift) +
                                    " exceeds waveform length " + std::to_string(n)};

    Waveform out = w;
    if (n == 0)
        return out;
    std::ptrdiff_t s = shift % n;
    if (s < 0)
        s += n;
    std::rotate_copy(w.samples.begin(), w.samples.end() - s, w.samples.end(), out.samples.begin());
    return out;
}

void
SpecAugmentConfig::validate() const
{
    for (double p : {freq_mask_p, time_mask_p, noise_p, roll_p})
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError{"spec_augment probabilities must lie in [0, 1]"};
    if (max_freq_width > kNumMels)
        throw ConfigError{"spec_augment max_freq_width exceeds the number of mel bins"};
    if (max_time_width > kContextFrames)
        throw ConfigError{"spec_augment max_time_width exceeds the context frame count"};
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw ConfigError{"spec_augment noise_std must be non-negative"};
}

void
to_json(json &j, const SpecAugmentConfig &c)
{
    j = {{"n_freq_masks", c.n_freq_masks},
         {"max_freq_width", c.max_freq_width},
         {"n_time_masks", c.n_time_masks},
         {"max_time_width", c.max_time_width},
         {"noise_std", c.noise_std},
         {"freq_mask_p", c.freq_mask_p},
         {"time_mask_p", c.time_mask_p},
         {"noise_p", c.noise_p},
         {"roll_p", c.roll_p},
         {"fill", c.fill == MaskFill::mean ? "mean" : "zero"}};
}

void
from_json(const json &j, SpecAugmentConfig &c)
{
    if (!j.is_object())
        throw ConfigError{"spec_augment config must be an object"};

    c.n_freq_masks = j.value("n_freq_masks", c.n_freq_masks);
    c.max_freq_width = j.value("max_freq_width", c.max_freq_width);
    c.n_time_masks = j.value("n_time_masks", c.n_time_masks);
    c.max_time_width = j.value("max_time_width", c.max_time_width);
    c.noise_std = j.value("noise_std", c.noise_std);
    if (auto it = j.find("probability"); it != j.end())
        c.freq_mask_p = c.time_mask_p = c.noise_p = c.roll_p = it->get<double>();
    c.freq_mask_p = j.value("freq_mask_p", c.freq_mask_p);
    c.time_mask_p = j.value("time_mask_p", c.time_mask_p);
    c.noise_p = j.value("noise_p", c.noise_p);
    c.roll_p = j.value("roll_p", c.roll_p);
    if (auto it = j.find("fill"); it != j.end()) {
        auto fill = it->get<std::string>();
        if (fill == "mean")
            c.fill = MaskFill::mean;
        else if (fill == "zero")
            c.fill = MaskFill::zero;
        else
            throw ConfigError{"spec_augment fill must be 'mean' or 'zero'"};
    }
    c.validate();
}

void
apply_freq_mask(MelSpectrogram &m, std::size_t first_bin, std::size_t width, float fill)
{
    if (first_bin + width > m.n_mels)
        throw std::invalid_argument{"frequency mask exceeds the mel axis"};
    for (std::size_t b = first_bin; b < first_bin + width; ++b)
        std::fill_n(m.values.begin() + static_cast<std::ptrdiff_t>(b * m.n_frames), m.n_frames, fill);
}

void
apply_time_mask(MelSpectrogram &m, std::size_t first_frame, std::size_t width, float fill)
{
    if (first_frame + width > m.n_frames)
        throw std::invalid_argument{"time mask exceeds the frame axis"};
    for (std::size_t b = 0; b < m.n_mels; ++b)
        for (std::size_t t = first_frame; t < first_frame + width; ++t)
            m.at(b, t) = fill;
}

SpecAugmentResult
spec_augment(const MelSpectrogram &m, const SpecAugmentConfig &cfg, std::uint64_t seed)
{
    SpecAugmentResult r{m};
    if (m.values.empty())
        return r;

    double sum = 0.0;
    for (float v : m.values)
        sum += v;
    const auto fill = cfg.fill == MaskFill::mean
                          ? static_cast<float>(sum / static_cast<double>(m.values.size()))
                          : 0.0F;

    std::vector<std::uint8_t> touched(m.values.size(), 0);
    auto mask_axis = [&](Rng &rng, std::size_t count, std::size_t max_width, std::size_t axis,
                         bool freq) {
        const std::size_t cap = std::min(max_width, axis);
        for (std::size_t i = 0; i < count; ++i) {
            const auto width = static_cast<std::size_t>(rng.uniform_index(cap + 1));
            const auto first = static_cast<std::size_t>(rng.uniform_index(axis - width + 1));
            if (freq) {
                apply_freq_mask(r.mel, first, width, fill);
                std::fill_n(touched.begin() + static_cast<std::ptrdiff_t>(first * m.n_frames),
                            width * m.n_frames, std::uint8_t{1});
            } else {
                apply_time_mask(r.mel, first, width, fill);
                for (std::size_t b = 0; b < m.n_mels; ++b)
                    std::fill_n(touched.begin() + static_cast<std::ptrdiff_t>(b * m.n_frames + first),
                                width, std::uint8_t{1});
            }
        }
    };

    Rng freq_rng{derive_seed(seed, "spec_augment", 0)};
    if (freq_rng.bernoulli(cfg.freq_mask_p)) {
        mask_axis(freq_rng, cfg.n_freq_masks, cfg.max_freq_width, m.n_mels, true);
        r.freq_masked = true;
    }

    Rng time_rng{derive_seed(seed, "spec_augment", 1)};
    if (time_rng.bernoulli(cfg.time_mask_p)) {
        mask_axis(time_rng, cfg.n_time_masks, cfg.max_time_width, m.n_frames, false);
        r.time_masked = true;
    }

    Rng noise_rng{derive_seed(seed, "spec_augment", 2)};
    if (noise_rng.bernoulli(cfg.noise_p)) {
        for (float &v : r.mel.values)
            v = static_cast<float>(static_cast<double>(v) + cfg.noise_std * noise_rng.normal());
        r.noised = true;
    }

    r.masked_cells = static_cast<std::size_t>(std::count(touched.begin(), touched.end(), 1));
    return r;
}

} // namespace emopack
