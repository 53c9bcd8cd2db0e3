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

#include "emopack/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "emopack/error.hpp"

namespace emopack {
namespace {

using nlohmann::json;

void
check_range(const Range &r, std::string_view name, double lo_bound, double hi_bound)
{
    if (!(r.min < r.max) || !std::isfinite(r.min) || !std::isfinite(r.max))
        throw ConfigError{"augment range '" + std::string{name} + "' must satisfy min < max"};
    if (r.min < lo_bound || r.max > hi_bound)
        throw ConfigError{"augment range '" + std::string{name} + "' must lie within [" +
                          std::to_string(lo_bound) + ", " + std::to_string(hi_bound) + "]"};
}

void
range_from_json(const json &j, const char *key, Range &r)
{
    if (auto it = j.find(key); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw ConfigError{std::string{"augment field '"} + key + "' must be [min, max]"};
        r = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

void
AugmentConfig::validate() const
{
    for (std::size_t i = 0; i < kNumEffects; ++i)
        if (!(probability[i] >= 0.0 && probability[i] <= 1.0))
            throw ConfigError{"augment probability for '" + std::string{kEffectNames[i]} +
                              "' must lie in [0, 1]"};

    check_range(gain_db, "gain_db", -kInf, kInf);
    check_range(noise_snr_db, "noise_snr_db", -kInf, kInf);
    check_range(resample_factor, "resample_factor", 0.5, 2.0);
    check_range(eq_center_hz, "eq_center_hz", 1e-3, kInf);
    check_range(eq_gain_db, "eq_gain_db", -kInf, kInf);
    check_range(eq_q, "eq_q", 1e-6, kInf);
    check_range(echo_delay_ms, "echo_delay_ms", 1e-6, kInf);
    check_range(echo_decay, "echo_decay", 0.0, 1.0 - 1e-12);
}

void
to_json(json &j, const AugmentConfig &c)
{
    json p = json::object();
    for (std::size_t i = 0; i < kNumEffects; ++i)
        p[std::string{kEffectNames[i]}] = c.probability[i];

    auto pair = [](const Range &r) { return json::array({r.min, r.max}); };
    j = {{"probability", std::move(p)},
         {"gain_db", pair(c.gain_db)},
         {"noise_snr_db", pair(c.noise_snr_db)},
         {"resample_factor", pair(c.resample_factor)},
         {"eq_center_hz", pair(c.eq_center_hz)},
         {"eq_gain_db", pair(c.eq_gain_db)},
         {"eq_q", pair(c.eq_q)},
         {"echo_delay_ms", pair(c.echo_delay_ms)},
         {"echo_decay", pair(c.echo_decay)}};
}

void
from_json(const json &j, AugmentConfig &c)
{
    if (!j.is_object())
        throw ConfigError{"augment config must be an object"};

    if (auto it = j.find("probability"); it != j.end()) {
        if (it->is_number()) {
            c.probability.fill(it->get<double>());
        } else if (it->is_object()) {
            for (const auto &[name, value] : it->items()) {
                auto pos = std::find(kEffectNames.begin(), kEffectNames.end(), name);
                if (pos == kEffectNames.end())
                    throw ConfigError{"unknown augment effect '" + name + "'"};
                c.probability[static_cast<std::size_t>(pos - kEffectNames.begin())] = value.get<double>();
            }
        } else {
            throw ConfigError{"augment 'probability' must be a number or an object"};
        }
    }

    range_from_json(j, "gain_db", c.gain_db);
    range_from_json(j, "noise_snr_db", c.noise_snr_db);
    range_from_json(j, "resample_factor", c.resample_factor);
    range_from_json(j, "eq_center_hz", c.eq_center_hz);
    range_from_json(j, "eq_gain_db", c.eq_gain_db);
    range_from_json(j, "eq_q", c.eq_q);
    range_from_json(j, "echo_delay_ms", c.echo_delay_ms);
    range_from_json(j, "echo_decay", c.echo_decay);
    c.validate();
}

Waveform
polarity_invert(const Waveform &w)
{
    Waveform out = w;
    for (float &v : out.samples)
        v = -v;
    return out;
}

Waveform
apply_gain_db(const Waveform &w, double gain_db)
{
    if (!std::isfinite(gain_db))
        throw std::invalid_argument{"gain must be finite"};

    const double scale = std::pow(10.0, gain_db / 20.0);
    Waveform out = w;
    for (float &v : out.samples)
        v = static_cast<float>(static_cast<double>(v) * scale);
    return out;
}

Waveform
reverse_audio(const Waveform &w)
{
    Waveform out = w;
    std::reverse(out.samples.begin(), out.samples.end());
    return out;
}

Waveform
add_noise(const Waveform &w, double snr_db, Rng &rng)
{
    if (snr_db == kNoNoise)
        return w;
    if (!std::isfinite(snr_db))
        throw std::invalid_argument{"SNR must be finite or the +inf sentinel"};

    const double signal_power = mean_power(w.samples);
    if (!(signal_power > 0.0))
        throw std::invalid_argument{"cannot add noise at a given SNR to a zero-energy signal"};

    std::vector<double> noise(w.samples.size());
    double noise_power = 0.0;
    for (double &n : noise) {
        n = rng.normal();
        noise_power += n * n;
    }
    noise_power /= static_cast<double>(noise.size());
    if (!(noise_power > 0.0))
        return w;

    const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
    const double scale = std::sqrt(target_power / noise_power);

    Waveform out = w;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = static_cast<float>(static_cast<double>(out.samples[i]) + scale * noise[i]);
    return out;
}

Waveform
resample(const Waveform &w, double factor)
{
    if (!(factor >= 0.5 && factor <= 2.0))
        throw std::invalid_argument{"resample factor must lie in [0.5, 2], got " +
                                    std::to_string(factor)};
    return {sinc_interpolate(w.samples, factor), w.sample_rate_hz};
}

Waveform
equalize(const Waveform &w, double center_hz, double gain_db, double q)
{
    const double nyquist = static_cast<double>(w.sample_rate_hz) / 2.0;
    if (!(center_hz > 0.0 && center_hz < nyquist))
        throw std::invalid_argument{"EQ center frequency must lie in (0, rate/2)"};
    if (!(q > 0.0) || !std::isfinite(q))
        throw std::invalid_argument{"EQ Q must be positive"};
    if (!std::isfinite(gain_db))
        throw std::invalid_argument{"EQ gain must be finite"};

    const double a = std::pow(10.0, gain_db / 40.0);
    const double w0 = 2.0 * std::numbers::pi * center_hz / static_cast<double>(w.sample_rate_hz);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cos_w0 = std::cos(w0);

    const double a0 = 1.0 + alpha / a;
    const double b0 = (1.0 + alpha * a) / a0;
    const double b1 = (-2.0 * cos_w0) / a0;
    const double b2 = (1.0 - alpha * a) / a0;
    const double a1 = (-2.0 * cos_w0) / a0;
    const double a2 = (1.0 - alpha / a) / a0;

    // Direct form I.
    Waveform out = w;
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (float &v : out.samples) {
        const double x0 = v;
        const double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x0;
        y2 = y1;
        y1 = y0;
        v = static_cast<float>(y0);
    }
    return out;
}

Waveform
add_echo(const Waveform &w, double delay_ms, double decay)
{
    if (!(delay_ms > 0.0) || !std::isfinite(delay_ms))
        throw std::invalid_argument{"echo delay must be positive"};
    if (!(decay >= 0.0 && decay < 1.0))
        throw std::invalid_argument{"echo decay must lie in [0, 1)"};

    const auto d = static_cast<std::size_t>(
        std::llround(delay_ms * static_cast<double>(w.sample_rate_hz) / 1000.0));
    const std::size_t n = w.samples.size();

    Waveform out;
    out.sample_rate_hz = w.sample_rate_hz;
    out.samples.assign(n + d, 0.0F);
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = w.samples[i];
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i + d] = static_cast<float>(static_cast<double>(out.samples[i + d]) +
                                                decay * static_cast<double>(w.samples[i]));
    return out;
}

AugmentResult
augment_waveform(const Waveform &w, const AugmentConfig &cfg, std::uint64_t seed)
{
    AugmentResult r{w, {}};
    Waveform &cur = r.waveform;

    for (std::size_t i = 0; i < kNumEffects; ++i) {
        Rng rng{derive_seed(seed, "augment", i)};
        if (!rng.bernoulli(cfg.probability[i]))
            continue;

        switch (static_cast<Effect>(i)) {
        case Effect::polarity:
            cur = polarity_invert(cur);
            break;
        case Effect::gain:
            cur = apply_gain_db(cur, rng.uniform(cfg.gain_db.min, cfg.gain_db.max));
            break;
        case Effect::reversal:
            cur = reverse_audio(cur);
            break;
        case Effect::noise: {
            // SNR is undefined for digital silence; the effect is skipped.
            if (!(mean_power(cur.samples) > 0.0))
                continue;
            double snr = rng.uniform(cfg.noise_snr_db.min, cfg.noise_snr_db.max);
            cur = add_noise(cur, snr, rng);
            break;
        }
        case Effect::resample:
            cur = resample(cur, rng.uniform(cfg.resample_factor.min, cfg.resample_factor.max));
            break;
        case Effect::equalization: {
            const double upper = std::min(cfg.eq_center_hz.max, 0.45 * cur.sample_rate_hz);
            const double lower = std::min(cfg.eq_center_hz.min, upper);
            const double f0 = std::exp(rng.uniform(std::log(lower), std::log(upper)));
            const double gain = rng.uniform(cfg.eq_gain_db.min, cfg.eq_gain_db.max);
            const double q = rng.uniform(cfg.eq_q.min, cfg.eq_q.max);
            cur = equalize(cur, f0, gain, q);
            break;
        }
        case Effect::echo: {
            const double delay = rng.uniform(cfg.echo_delay_ms.min, cfg.echo_delay_ms.max);
            const double decay = rng.uniform(cfg.echo_decay.min, cfg.echo_decay.max);
            cur = add_echo(cur, delay, decay);
            break;
        }
        }
        r.fired[i] = true;
    }

    return r;
}

} // namespace emopack
