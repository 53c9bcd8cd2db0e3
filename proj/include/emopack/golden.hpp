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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emopack/features.hpp"

namespace emopack {

inline constexpr double kParityTolerance = 1e-4;

// One entry of a golden fixture index.json.
struct GoldenFixture {
    std::string name;
    nlohmann::json recipe;     // generator description (kind + parameters)
    std::string wav;           // input waveform, relative to the index
    std::string golden;        // reference features (EPK1, no members)
    std::string wav_sha256;
    std::string golden_sha256;
};

struct GoldenIndex {
    std::filesystem::path directory;
    std::string reference; // description of the reference extractor
    std::vector<GoldenFixture> fixtures;
};

// Throws ConfigError when the index is missing or malformed.
GoldenIndex
load_golden_index(const std::filesystem::path &directory);

std::string
sha256_file(const std::filesystem::path &path);

struct FixtureComparison {
    std::string name;
    bool checksums_ok = false;
    bool shape_ok = false;
    std::size_t n_mels = 0;
    std::size_t n_frames = 0;
    double max_abs_diff = 0.0;
    bool pass = false;
};

// Element-wise comparison of two spectrograms; shape mismatch yields
// shape_ok = false and an infinite difference.
FixtureComparison
compare_spectrograms(const MelSpectrogram &actual, const MelSpectrogram &expected,
                     double tolerance = kParityTolerance);

// Featurizes each fixture's waveform and compares it against its golden.
std::vector<FixtureComparison>
check_goldens(const GoldenIndex &index, double tolerance = kParityTolerance);

nlohmann::json
to_json(const FixtureComparison &c);

} // namespace emopack
