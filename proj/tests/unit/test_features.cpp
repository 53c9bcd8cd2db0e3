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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "emopack/error.hpp"
#include "emopack/feature_file.hpp"
#include "emopack/features.hpp"
#include "emopack/golden.hpp"
#include "support/oracles.hpp"

using namespace emopack;

namespace {

Waveform
chirp(std::size_t n, std::uint64_t seed)
{
    Rng r{seed};
    Waveform w;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / 16000.0;
        w.samples[i] = static_cast<float>(0.4 * std::sin(2.0 * std::numbers::pi * (200.0 + 3000.0 * t) * t) +
                                          0.01 * r.normal());
    }
    return w;
}

MelSpectrogram
ramp(std::size_t mels, std::size_t frames)
{
    MelSpectrogram m{mels, frames, std::vector<float>(mels * frames)};
    for (std::size_t i = 0; i < m.values.size(); ++i)
        m.values[i] = static_cast<float>(i % 97) / 97.0F;
    return m;
}

} // namespace

TEST_CASE("log-mel agrees with a direct DFT oracle")
{
    for (std::size_t n : {401UL, 1777UL, 4800UL}) {
        const Waveform w = chirp(n, n);
        const MelSpectrogram m = log_mel_spectrogram(w);
        std::size_t frames = 0;
        const std::vector<double> want = oracle::naive_log_mel(w.samples, frames);
        REQUIRE(m.n_mels == 80);
        REQUIRE(m.n_frames == frames);
        REQUIRE(m.n_frames == n / 160);
        double err = 0.0;
        for (std::size_t i = 0; i < want.size(); ++i)
            err = std::max(err, std::abs(m.values[i] - want[i]));
        CHECK(err <= 1e-5);
    }
}

TEST_CASE("silence normalizes to -1.5 and 30 s yields 80x3000")
{
    const MelSpectrogram m = log_mel_spectrogram(Waveform{std::vector<float>(kContextSamples, 0.0F), 16000});
    CHECK(m.n_mels == 80);
    CHECK(m.n_frames == 3000);
    CHECK(std::all_of(m.values.begin(), m.values.end(), [](float v) { return v == -1.5F; }));
}

TEST_CASE("dynamic range is at most two")
{
    const MelSpectrogram m = log_mel_spectrogram(chirp(16000, 3));
    const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
    CHECK(*hi - *lo <= 2.0F);
}

TEST_CASE("featurizer rejects other sample rates and handles short input")
{
    CHECK_THROWS_AS(log_mel_spectrogram(Waveform{std::vector<float>(1000, 0.1F), 8000}), std::invalid_argument);
    CHECK(log_mel_spectrogram(Waveform{std::vector<float>(100, 0.1F), 16000}).n_frames == 0);
}

TEST_CASE("mel filterbank rows are non-negative triangles")
{
    const auto fb = mel_filterbank();
    REQUIRE(fb.size() == 80 * 201);
    for (std::size_t m = 0; m < 80; ++m) {
        double sum = 0.0;
        for (std::size_t b = 0; b < 201; ++b) {
            CHECK(fb[m * 201 + b] >= 0.0);
            sum += fb[m * 201 + b];
        }
        CHECK(sum > 0.0);
    }
}

TEST_CASE("pad_or_trim")
{
    const PaddedWaveform p = pad_or_trim(chirp(1000, 1), 1.0);
    CHECK(p.waveform.size() == 16000);
    CHECK(p.original_samples == 1000);
    CHECK(p.valid_frames == 7);
    CHECK(p.waveform.samples[999] != 0.0F);
    CHECK(p.waveform.samples[1000] == 0.0F);
    CHECK(pad_or_trim(chirp(20000, 1), 1.0).waveform.size() == 16000);
    CHECK(pad_or_trim(chirp(20000, 1), 1.0).valid_frames == 100);
}

TEST_CASE("rolling rotates and composes")
{
    const Waveform w = chirp(500, 2);
    const Waveform r = roll_waveform(w, 7);
    for (std::size_t i = 0; i < 500; ++i)
        CHECK(r.samples[(i + 7) % 500] == w.samples[i]);
    CHECK(roll_waveform(roll_waveform(w, 123), -123) == w);
    CHECK(roll_waveform(w, 500) == w);
    CHECK(roll_waveform(roll_waveform(w, 40), 60) == roll_waveform(w, 100));
}

TEST_CASE("frequency and time masks")
{
    MelSpectrogram m = ramp(10, 20);
    apply_freq_mask(m, 2, 3, -7.0F);
    for (std::size_t b = 0; b < 10; ++b)
        CHECK((m.at(b, 5) == -7.0F) == (b >= 2 && b < 5));
    apply_time_mask(m, 18, 2, 1.0F);
    CHECK(m.at(0, 19) == 1.0F);
    CHECK(m.at(0, 17) != 1.0F);
    CHECK_THROWS_AS(apply_time_mask(m, 18, 5, 1.0F), std::invalid_argument);
}

TEST_CASE("spec augment fills masks with the pre-mask mean")
{
    const MelSpectrogram m = ramp(80, 300);
    SpecAugmentConfig cfg = SpecAugmentConfig::disabled();
    cfg.freq_mask_p = 1.0;
    cfg.time_mask_p = 1.0;
    double mean = 0.0;
    for (float v : m.values)
        mean += v;
    mean /= static_cast<double>(m.values.size());

    bool any = false;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const SpecAugmentResult r = spec_augment(m, cfg, seed);
        CHECK(r.freq_masked);
        CHECK(r.time_masked);
        std::size_t changed = 0;
        for (std::size_t i = 0; i < m.values.size(); ++i)
            if (r.mel.values[i] != m.values[i]) {
                ++changed;
                CHECK(r.mel.values[i] == static_cast<float>(mean));
            }
        CHECK(changed <= r.masked_cells);
        CHECK(r.masked_cells <= 2 * 27 * 300 + 2 * 100 * 80);
        any = any || r.masked_cells > 0;
    }
    CHECK(any);
}

TEST_CASE("spec augment determinism and disabled identity")
{
    const MelSpectrogram m = ramp(80, 100);
    const SpecAugmentConfig cfg;
    CHECK(spec_augment(m, cfg, 5).mel.values == spec_augment(m, cfg, 5).mel.values);
    CHECK(spec_augment(m, SpecAugmentConfig::disabled(), 5).mel.values == m.values);
    SpecAugmentConfig zero = SpecAugmentConfig::disabled();
    zero.freq_mask_p = 1.0;
    zero.fill = MaskFill::zero;
    const SpecAugmentResult r = spec_augment(m, zero, 11);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (r.mel.values[i] != m.values[i])
            CHECK(r.mel.values[i] == 0.0F);
}

TEST_CASE("feature file layout is bit exact")
{
    FeatureFile f;
    f.mel = MelSpectrogram{2, 3, {1, 2, 3, 4, 5, 6}};
    f.total_duration_s = 1.5F;
    MemberRecord r;
    r.id = "ab";
    r.start_s = 0.25F;
    r.duration_s = 1.0F;
    r.emotion = {0.5F, 0, 0, 0, 0, 0, 0, 0.5F};
    r.domain_id = 3;
    f.members.push_back(r);

    const std::string bytes = encode_feature_file(f);
    REQUIRE(bytes.size() == 24 + 6 * 4 + 4 + 2 + 4 + 4 + 32 + 4);
    CHECK(bytes.substr(0, 4) == "EPK1");
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k)
            v = (v << 8) | static_cast<unsigned char>(bytes[off + static_cast<std::size_t>(k)]);
        return v;
    };
    auto f32 = [&](std::size_t off) {
        const std::uint32_t bits = u32(off);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    };
    CHECK(u32(4) == 1);
    CHECK(u32(8) == 2);
    CHECK(u32(12) == 3);
    CHECK(u32(16) == 1);
    CHECK(f32(20) == 1.5F);
    CHECK(f32(24) == 1.0F);
    CHECK(f32(44) == 6.0F);
    CHECK(u32(48) == 2);
    CHECK(bytes.substr(52, 2) == "ab");
    CHECK(f32(54) == 0.25F);
    CHECK(f32(58) == 1.0F);
    CHECK(f32(62) == 0.5F);
    CHECK(u32(94) == 3);

    const FeatureFile back = decode_feature_file(bytes);
    CHECK(back.mel.values == f.mel.values);
    CHECK(back.members.size() == 1);
    CHECK(back.members[0].id == "ab");
    CHECK(back.members[0].domain_id == 3);
    CHECK(encode_feature_file(back) == bytes);
}

TEST_CASE("corrupt feature files are data errors")
{
    FeatureFile f;
    f.mel = MelSpectrogram{1, 2, {1, 2}};
    const std::string bytes = encode_feature_file(f);
    CHECK_THROWS_AS(decode_feature_file(bytes.substr(0, bytes.size() - 1)), DataError);
    CHECK_THROWS_AS(decode_feature_file(bytes + "x"), DataError);
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_feature_file(bad), DataError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_feature_file(bad), DataError);
}

TEST_CASE("golden fixtures pass parity")
{
    const GoldenIndex index = load_golden_index(oracle::fixture_dir() / "golden");
    REQUIRE(index.fixtures.size() == 25);
    for (const FixtureComparison &c : check_goldens(index)) {
        INFO(c.name);
        CHECK(c.checksums_ok);
        CHECK(c.shape_ok);
        CHECK(c.max_abs_diff <= 1e-4);
    }
}

TEST_CASE("golden comparison detects perturbations")
{
    const GoldenIndex index = load_golden_index(oracle::fixture_dir() / "golden");
    const FeatureFile g = read_feature_file(index.directory / index.fixtures.front().golden);
    CHECK(compare_spectrograms(g.mel, g.mel).max_abs_diff == 0.0);
    MelSpectrogram off = g.mel;
    off.values[off.values.size() / 2] += 1e-3F;
    const FixtureComparison c = compare_spectrograms(off, g.mel);
    CHECK_FALSE(c.pass);
    CHECK(c.max_abs_diff == doctest::Approx(1e-3).epsilon(1e-2));
    MelSpectrogram wrong = g.mel;
    wrong.n_frames += 1;
    CHECK_FALSE(compare_spectrograms(wrong, g.mel).shape_ok);
    CHECK_THROWS_AS(load_golden_index(index.directory / "nope"), ConfigError);
}
