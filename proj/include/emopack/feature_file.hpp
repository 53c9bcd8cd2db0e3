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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "emopack/emotion.hpp"
#include "emopack/features.hpp"

namespace emopack {

inline constexpr std::array<char, 4> kFeatureMagic{'E', 'P', 'K', '1'};
inline constexpr std::uint32_t kFeatureVersion = 1;

struct MemberRecord {
    std::string id;
    float start_s = 0.0F;
    float duration_s = 0.0F;
    std::array<float, kNumEmotions> emotion{};
    std::uint32_t domain_id = 0;

    bool
    operator==(const MemberRecord &) const = default;
};

// One packed sequence on disk. Layout (little-endian):
//   "EPK1" u32 version u32 n_mels u32 n_frames u32 n_members f32 total_s
//   f32[n_mels * n_frames] (mel-bin major)
//   per member: u32 id_len, id bytes, f32 start_s, f32 dur_s,
//               f32[8] emotion, u32 domain_id
struct FeatureFile {
    MelSpectrogram mel;
    float total_duration_s = 0.0F;
    std::vector<MemberRecord> members;

    bool
    operator==(const FeatureFile &) const = default;
};

std::string
encode_feature_file(const FeatureFile &f);

// Throws DataError when the header or payload is malformed.
FeatureFile
decode_feature_file(std::string_view bytes);

void
write_feature_file(const std::filesystem::path &path, const FeatureFile &f);

FeatureFile
read_feature_file(const std::filesystem::path &path);

// One sidecar JSONL line describing a sequence file.
nlohmann::json
sidecar_record(const FeatureFile &f, std::size_t sequence_index, const std::string &relative_path);

} // namespace emopack
