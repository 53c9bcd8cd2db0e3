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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emopack/augment.hpp"
#include "emopack/corpus.hpp"
#include "emopack/features.hpp"
#include "emopack/losses.hpp"
#include "emopack/packer.hpp"
#include "emopack/smoothing.hpp"

namespace emopack {

struct PipelineConfig {
    std::vector<std::filesystem::path> manifests;
    std::optional<std::filesystem::path> label_mapping;
    bool smoothing = true;
    double train_fraction = 0.9;
    std::optional<std::uint64_t> split_seed; // falls back to `seed`
    double context_s = kContextSeconds;
    double fill_fraction = 0.8;
    std::size_t refresh_threshold = 1;
    std::size_t shard_size = 1000; // training samples per packing pool
    bool augment_enabled = true;
    AugmentConfig augment;
    SpecAugmentConfig spec_augment;
    LossConfig loss;
    std::filesystem::path output_dir = "out";
    std::size_t jobs = 1;
    std::uint64_t seed = 0;

    // Throws ConfigError on missing files or out-of-range values.
    void
    validate() const;

    PackerOptions
    packer_options() const
    {
        return {context_s, fill_fraction, refresh_threshold};
    }
};

// Relative paths are resolved against `base_dir`. Unknown keys are errors.
PipelineConfig
config_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {});

nlohmann::json
config_to_json(const PipelineConfig &c);

// `key=value` with a dotted key path. The value is parsed as JSON when it
// parses, otherwise taken as a string.
void
apply_override(nlohmann::json &j, const std::string &assignment);

// Reads the config file (if any), applies overrides in order, parses.
PipelineConfig
load_config(const std::optional<std::filesystem::path> &path,
            const std::vector<std::string> &overrides = {});

struct CorpusState {
    std::vector<Sample> samples; // harmonized, domain-tagged, smoothed
    DomainTable domains;
    DatasetSmoothingStats smoothing;
    TrainValSplit split;
};

// Load manifests, harmonize, assign domains, smooth, split.
CorpusState
prepare_corpus(const PipelineConfig &cfg);

// Packing shard boundaries over `n` samples: the trailing partial shard is
// folded into the previous one.
std::vector<std::pair<std::size_t, std::size_t>>
packing_shards(std::size_t n, std::size_t shard_size);

// One packing pass per shard: sequences are drawn until the shard's pool
// cannot start another sequence without a refresh.
std::vector<PackedSequence>
pack_training_set(std::span<const Sample> train, const PipelineConfig &cfg);

struct AugmentTally {
    std::array<std::size_t, kNumEffects> fired{};
    std::size_t waveforms = 0;
    std::size_t rolled = 0;
    std::size_t spectrograms = 0;
    std::size_t freq_masked = 0;
    std::size_t time_masked = 0;
    std::size_t noised = 0;

    AugmentTally &
    operator+=(const AugmentTally &o);
};

struct PipelineReport {
    std::size_t n_samples = 0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_domains = 0;
    std::size_t n_train_sequences = 0;
    std::size_t n_val_sequences = 0;
    std::size_t n_shards = 0;
    double input_duration_s = 0.0;
    double packed_duration_s = 0.0; // sum of packed sequence totals
    double min_sequence_s = 0.0;
    double max_sequence_s = 0.0;
    std::size_t pool_refreshes = 0;
    DatasetSmoothingStats smoothing;
    AugmentTally augmentation;
    std::vector<double> priors;

    nlohmann::json
    to_json() const;
};

// Full run from manifests to feature files under cfg.output_dir. Output bytes depend only on the
// config and seed, never on cfg.jobs.
PipelineReport
run_pipeline(const PipelineConfig &cfg);

} // namespace emopack
