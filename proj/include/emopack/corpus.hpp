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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emopack/emotion.hpp"

namespace emopack {

// One manifest line, before label harmonization.
struct RawSample {
    std::string id;
    std::string audio_path;
    std::string dataset;
    std::string speaker;
    std::string language;
    double duration_s = 0.0;
    std::map<std::string, double> raw_labels;
};

struct Sample : RawSample {
    EmotionDistribution emotion;
    std::uint32_t domain_id = 0;
};

// Reads a JSONL manifest. Relative audio paths are resolved against the
// manifest's directory. Throws DataError naming the offending line.
std::vector<RawSample>
load_manifest(const std::filesystem::path &path);

std::vector<RawSample>
parse_manifest(std::istream &in, const std::filesystem::path &base_dir = {});

struct MappingTarget {
    Emotion emotion;
    double weight;
};

// Raw dataset label -> weighted canonical targets.
class LabelMapping {
public:
    // Identity entries for the canonical names plus contempt -> 0.5 disgust.
    static LabelMapping
    defaults();

    // Parses {"raw": [["canonical", weight], ...], ...}. Entries extend (and
    // override) the defaults unless `extend_defaults` is false.
    static LabelMapping
    from_json(const nlohmann::json &j, bool extend_defaults = true);

    static LabelMapping
    load(const std::filesystem::path &path, bool extend_defaults = true);

    void
    set(const std::string &raw_label, std::vector<MappingTarget> targets);

    // Canonical names resolve to themselves even when absent from the table.
    std::optional<std::vector<MappingTarget>>
    lookup(const std::string &raw_label) const;

    const std::map<std::string, std::vector<MappingTarget>> &
    entries() const noexcept
    {
        return entries_;
    }

    nlohmann::json
    to_json() const;

private:
    std::map<std::string, std::vector<MappingTarget>> entries_;
};

// Weighted sum of raw scores into the canonical space. Throws DataError on
// unknown labels (all of them are listed) or an all-zero result.
EmotionDistribution
harmonize(const std::map<std::string, double> &raw_labels, const LabelMapping &mapping);

struct DomainKey {
    std::string dataset;
    std::string speaker;
    std::string language;

    auto operator<=>(const DomainKey &) const = default;
};

// Composite (dataset, speaker, language) domains, numbered by first
// appearance.
class DomainTable {
public:
    std::uint32_t
    intern(const DomainKey &key);

    std::optional<std::uint32_t>
    find(const DomainKey &key) const;

    const DomainKey &
    at(std::uint32_t id) const
    {
        return keys_.at(id);
    }

    std::size_t
    size() const noexcept
    {
        return keys_.size();
    }

    nlohmann::json
    to_json() const;

private:
    std::vector<DomainKey> keys_;
    std::map<DomainKey, std::uint32_t> index_;
};

inline DomainKey
domain_key(const RawSample &s)
{
    return {s.dataset, s.speaker, s.language};
}

std::pair<std::vector<Sample>, DomainTable>
assign_domains(std::vector<Sample> samples);

struct TrainValSplit {
    std::vector<Sample> train;
    std::vector<Sample> val;
};

// Seeded random partition with |train| = round(train_fraction * N). Both
// halves keep the input order.
TrainValSplit
split_train_val(std::span<const Sample> samples, double train_fraction, std::uint64_t seed);

// Manifest -> harmonized samples (domain ids not yet assigned).
std::vector<Sample>
harmonize_all(std::span<const RawSample> raw, const LabelMapping &mapping);

nlohmann::json
sample_to_json(const Sample &s);

} // namespace emopack
