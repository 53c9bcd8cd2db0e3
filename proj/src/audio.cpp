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

#include "emopack/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "emopack/error.hpp"

namespace emopack {
namespace {

constexpr int kSincHalfTaps = 32;
constexpr double kKaiserBeta = 8.6;

std::uint32_t
read_u32(const std::uint8_t *p) noexcept
{
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
           (std::uint32_t{p[3]} << 24);
}

std::uint16_t
read_u16(const std::uint8_t *p) noexcept
{
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void
put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void
put_u16(std::string &out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

constexpr std::size_t kKaiserTableSize = 8192;

// Kaiser window sampled on |t| in [0, 1]; linear interpolation between
// entries is accurate to ~1e-9, far below float resolution.
const std::vector<double> &
kaiser_table()
{
    static const std::vector<double> table = [] {
        std::vector<double> t(kKaiserTableSize + 2);
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        for (std::size_t i = 0; i <= kKaiserTableSize; ++i) {
            double u = static_cast<double>(i) / kKaiserTableSize;
            t[i] = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
        }
        t[kKaiserTableSize + 1] = t[kKaiserTableSize];
        return t;
    }();
    return table;
}

double
kaiser(double t) noexcept
{
    // t in [-1, 1]
    const double u = std::abs(t);
    if (u > 1.0)
        return 0.0;
    const std::vector<double> &table = kaiser_table();
    const double x = u * kKaiserTableSize;
    const auto i = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
}

double
sinc(double x) noexcept
{
    if (x == 0.0)
        return 1.0;
    double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

} // namespace

void
validate(const Waveform &w)
{
    if (w.sample_rate_hz == 0)
        throw std::invalid_argument{"waveform sample rate must be positive"};
    if (w.samples.empty())
        throw std::invalid_argument{"waveform must contain at least one sample"};
    for (float v : w.samples)
        if (!std::isfinite(v))
            throw std::invalid_argument{"waveform contains a non-finite sample"};
}

double
mean_power(std::span<const float> x) noexcept
{
    if (x.empty())
        return 0.0;
    double acc = 0.0;
    for (float v : x)
        acc += static_cast<double>(v) * static_cast<double>(v);
    return acc / static_cast<double>(x.size());
}

Waveform
read_wav(const std::filesystem::path &path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw DataError{"cannot open audio file " + path.string()};

    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>{in}, {}};
    auto fail = [&](const std::string &why) -> DataError {
        return DataError{path.string() + ": " + why};
    };

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw fail("not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const std::uint8_t *data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t *chunk = bytes.data() + pos;
        std::uint32_t size = read_u32(chunk + 4);
        std::size_t body = pos + 8;
        std::size_t avail = bytes.size() - body;

        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || avail < 16)
                throw fail("truncated fmt chunk");
            format = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            rate = read_u32(chunk + 12);
            bits = read_u16(chunk + 22);
            if (format == 0xFFFE && size >= 40 && avail >= 40)
                format = read_u16(chunk + 8 + 24); // WAVE_FORMAT_EXTENSIBLE subformat
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_size = std::min<std::size_t>(size, avail);
        }

        pos = body + size + (size & 1);
    }

    if (format == 0)
        throw fail("missing fmt chunk");
    if (data == nullptr)
        throw fail("missing data chunk");
    if (channels != 1)
        throw fail("expected mono audio, got " + std::to_string(channels) + " channels");
    if (rate == 0)
        throw fail("sample rate is zero");

    Waveform w;
    w.sample_rate_hz = rate;

    const std::size_t width = bits / 8;
    if (width == 0)
        throw fail("unsupported bit depth " + std::to_string(bits));
    const std::size_t n = data_size / width;
    w.samples.resize(n);

    if (format == 1 && bits == 16) {
        for (std::size_t i = 0; i < n; ++i)
            w.samples[i] = static_cast<float>(static_cast<std::int16_t>(read_u16(data + 2 * i)) / 32768.0);
    } else if (format == 1 && bits == 24) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t *p = data + 3 * i;
            std::int32_t v = static_cast<std::int32_t>((std::uint32_t{p[0]} << 8) | (std::uint32_t{p[1]} << 16) |
                                                       (std::uint32_t{p[2]} << 24)) >> 8;
            w.samples[i] = static_cast<float>(v / 8388608.0);
        }
    } else if (format == 1 && bits == 32) {
        for (std::size_t i = 0; i < n; ++i)
            w.samples[i] = static_cast<float>(static_cast<std::int32_t>(read_u32(data + 4 * i)) / 2147483648.0);
    } else if (format == 3 && bits == 32) {
        for (std::size_t i = 0; i < n; ++i)
            w.samples[i] = std::bit_cast<float>(read_u32(data + 4 * i));
    } else if (format == 3 && bits == 64) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t lo = read_u32(data + 8 * i), hi = read_u32(data + 8 * i + 4);
            w.samples[i] = static_cast<float>(std::bit_cast<double>(lo | (hi << 32)));
        }
    } else {
        throw fail("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                   std::to_string(bits) + " bits)");
    }

    if (w.samples.empty())
        throw fail("no audio samples");
    for (float v : w.samples)
        if (!std::isfinite(v))
            throw fail("non-finite sample value");

    return w;
}

void
write_wav(const std::filesystem::path &path, const Waveform &w, WavEncoding encoding)
{
    const bool is_float = encoding == WavEncoding::float32;
    const std::uint16_t bits = is_float ? 32 : 16;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));

    std::string out;
    out.reserve(44 + data_bytes);
    out.append("RIFF");
    put_u32(out, 36 + data_bytes);
    out.append("WAVEfmt ");
    put_u32(out, 16);
    put_u16(out, is_float ? 3 : 1);
    put_u16(out, 1);
    put_u32(out, w.sample_rate_hz);
    put_u32(out, w.sample_rate_hz * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    out.append("data");
    put_u32(out, data_bytes);

    for (float v : w.samples) {
        if (is_float) {
            put_u32(out, std::bit_cast<std::uint32_t>(v));
        } else {
            double scaled = std::clamp(static_cast<double>(v), -1.0, 1.0) * 32767.0;
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(scaled))));
        }
    }

    std::ofstream f{path, std::ios::binary};
    if (!f)
        throw DataError{"cannot write audio file " + path.string()};
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw DataError{"short write to " + path.string()};
}

std::vector<float>
sinc_interpolate(std::span<const float> x, double step)
{
    if (!(step > 0.0) || !std::isfinite(step))
        throw std::invalid_argument{"interpolation step must be positive"};

    const auto n_in = static_cast<std::ptrdiff_t>(x.size());
    const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) / step));
    const double cutoff = std::min(1.0, 1.0 / step);
    kaiser_table();

    std::vector<float> y(n_out);
    for (std::size_t m = 0; m < n_out; ++m) {
        const double pos = static_cast<double>(m) * step;
        const auto base = static_cast<std::ptrdiff_t>(std::floor(pos));

        double acc = 0.0;
        for (std::ptrdiff_t k = base - kSincHalfTaps + 1; k <= base + kSincHalfTaps; ++k) {
            if (k < 0 || k >= n_in)
                continue;
            const double t = pos - static_cast<double>(k);
            acc += static_cast<double>(x[static_cast<std::size_t>(k)]) * cutoff * sinc(cutoff * t) *
                   kaiser(t / kSincHalfTaps);
        }
        y[m] = static_cast<float>(acc);
    }

    return y;
}

Waveform
convert_sample_rate(const Waveform &w, std::uint32_t target_rate_hz)
{
    if (target_rate_hz == 0)
        throw std::invalid_argument{"target sample rate must be positive"};
    if (w.sample_rate_hz == target_rate_hz)
        return w;

    const double step = static_cast<double>(w.sample_rate_hz) / static_cast<double>(target_rate_hz);
    return {sinc_interpolate(w.samples, step), target_rate_hz};
}

} // namespace emopack
