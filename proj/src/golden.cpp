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

#include "emopack/golden.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>

#include <openssl/evp.h>

#include "emopack/audio.hpp"
#include "emopack/error.hpp"
#include "emopack/feature_file.hpp"

namespace emopack {

GoldenIndex
load_golden_index(const std::filesystem::path &directory)
{
    const std::filesystem::path path = directory / "index.json";
    std::ifstream in{path};
    if (!in)
        throw ConfigError{"cannot open golden index " + path.string()};

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &ex) {
        throw ConfigError{path.string() + ": " + ex.what()};
    }

    GoldenIndex index;
    index.directory = directory;
    try {
        index.reference = j.value("reference", std::string{});
        for (const auto &f : j.at("fixtures")) {
            GoldenFixture g;
            g.name = f.at("name").get<std::string>();
            g.recipe = f.value("recipe", nlohmann::json::object());
            g.wav = f.at("wav").get<std::string>();
            g.golden = f.at("golden").get<std::string>();
            g.wav_sha256 = f.value("wav_sha256", std::string{});
            g.golden_sha256 = f.value("golden_sha256", std::string{});
            index.fixtures.push_back(std::move(g));
        }
    } catch (const nlohmann::json::exception &ex) {
        throw ConfigError{path.string() + ": malformed fixture index: " + ex.what()};
    }
    return index;
}

std::string
sha256_file(const std::filesystem::path &path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw DataError{"cannot open " + path.string()};

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), EVP_MD_CTX_free};
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error{"SHA-256 initialization failed"};

    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);

    std::string hex;
    hex.reserve(2 * len);
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex.append(byte, 2);
    }
    return hex;
}

FixtureComparison
compare_spectrograms(const MelSpectrogram &actual, const MelSpectrogram &expected, double tolerance)
{
    FixtureComparison c;
    c.n_mels = actual.n_mels;
    c.n_frames = actual.n_frames;
    c.shape_ok = actual.n_mels == expected.n_mels && actual.n_frames == expected.n_frames &&
                 actual.values.size() == expected.values.size();
    if (!c.shape_ok) {
        c.max_abs_diff = std::numeric_limits<double>::infinity();
        return c;
    }

    for (std::size_t i = 0; i < actual.values.size(); ++i) {
        const double d = std::abs(static_cast<double>(actual.values[i]) - expected.values[i]);
        if (!(d <= c.max_abs_diff))
            c.max_abs_diff = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
    }
    c.pass = c.max_abs_diff <= tolerance;
    return c;
}

std::vector<FixtureComparison>
check_goldens(const GoldenIndex &index, double tolerance)
{
    std::vector<FixtureComparison> out;
    for (const GoldenFixture &g : index.fixtures) {
        const auto wav_path = index.directory / g.wav;
        const auto golden_path = index.directory / g.golden;

        const MelSpectrogram actual = log_mel_spectrogram(read_wav(wav_path));
        const FeatureFile expected = read_feature_file(golden_path);

        FixtureComparison c = compare_spectrograms(actual, expected.mel, tolerance);
        c.name = g.name;
        c.checksums_ok = (g.wav_sha256.empty() || sha256_file(wav_path) == g.wav_sha256) &&
                         (g.golden_sha256.empty() || sha256_file(golden_path) == g.golden_sha256);
        c.pass = c.pass && c.checksums_ok;
        out.push_back(std::move(c));
    }
    return out;
}

nlohmann::json
to_json(const FixtureComparison &c)
{
    return {{"name", c.name},
            {"checksums_ok", c.checksums_ok},
            {"shape_ok", c.shape_ok},
            {"n_mels", c.n_mels},
            {"n_frames", c.n_frames},
            {"max_abs_diff", std::isfinite(c.max_abs_diff) ? nlohmann::json(c.max_abs_diff)
                                                          : nlohmann::json(nullptr)},
            {"pass", c.pass}};
}

} // namespace emopack
