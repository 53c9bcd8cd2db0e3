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

#include "emopack/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include "emopack/audio.hpp"
#include "emopack/error.hpp"
#include "emopack/feature_file.hpp"
#include "emopack/rng.hpp"

namespace emopack {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kConfigKeys{
    "manifests", "label_mapping", "smoothing", "split", "context_s", "packer",
    "augment", "spec_augment", "loss", "output_dir", "jobs", "seed"};

fs::path
resolve(const fs::path &p, const fs::path &base)
{
    return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
T
get_or(const json &j, const char *key, T fallback)
{
    const auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

// Re-throws the active exception with stage context, keeping its category.
[[noreturn]] void
rethrow_with_context(const std::string &stage, const std::string &sample_id)
{
    std::string where = "stage '" + stage + "'";
    if (!sample_id.empty())
        where += ", sample '" + sample_id + "'";
    try {
        throw;
    } catch (const ConfigError &e) {
        throw ConfigError{where + ": " + e.what()};
    } catch (const DataError &e) {
        throw DataError{where + ": " + e.what()};
    } catch (const InvariantError &e) {
        throw InvariantError{where + ": " + e.what()};
    } catch (const std::invalid_argument &e) {
        throw DataError{where + ": " + e.what()};
    } catch (const std::exception &e) {
        throw InvariantError{where + ": " + e.what()};
    }
}

template <typename F>
auto
in_stage(const std::string &stage, const std::string &sample_id, F &&fn)
{
    try {
        return fn();
    } catch (...) {
        rethrow_with_context(stage, sample_id);
    }
}

// Runs fn(i) for i in [0, n) on `jobs` threads. If several items fail, the
// lowest index wins so the reported error does not depend on scheduling.
void
parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)> &fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, n));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
    }

    for (const std::exception_ptr &e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::string
shard_relpath(const std::string &split, std::size_t index)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%03zu/seq_%06zu.epk", index / 1000, index);
    return split + "/features/" + buf;
}

Waveform
load_model_audio(const Sample &s)
{
    return convert_sample_rate(read_wav(s.audio_path), kModelSampleRate);
}

MemberRecord
member_record(const Sample &s, double start_s, double duration_s)
{
    MemberRecord m;
    m.id = s.id;
    m.start_s = static_cast<float>(start_s);
    m.duration_s = static_cast<float>(duration_s);
    for (std::size_t k = 0; k < kNumEmotions; ++k)
        m.emotion[k] = static_cast<float>(s.emotion.scores[k]);
    m.domain_id = s.domain_id;
    return m;
}

struct SequenceOutput {
    std::string relpath;
    json sidecar;
    AugmentTally tally;
};

// Concatenates members into one context window and featurizes it. Members
// are truncated at the window edge; members starting past it are dropped.
SequenceOutput
build_sequence(std::span<const Sample *const> members, std::size_t index, const std::string &split,
               bool augment, const PipelineConfig &cfg)
{
    SequenceOutput out;
    out.relpath = shard_relpath(split, index);

    const auto context_samples =
        static_cast<std::size_t>(std::llround(cfg.context_s * kModelSampleRate));
    Waveform joined{{}, kModelSampleRate};
    joined.samples.reserve(context_samples);
    FeatureFile file;

    for (const Sample *s : members) {
        if (joined.samples.size() >= context_samples)
            break;
        Waveform w = in_stage("load", s->id, [&] { return load_model_audio(*s); });

        if (augment) {
            const std::string key = "member:" + s->id;
            AugmentResult r = in_stage("augment", s->id, [&] {
                return augment_waveform(w, cfg.augment, derive_seed(cfg.seed, key, index));
            });
            w = std::move(r.waveform);
            ++out.tally.waveforms;
            for (std::size_t e = 0; e < kNumEffects; ++e)
                out.tally.fired[e] += r.fired[e];

            Rng roll{derive_seed(cfg.seed, "roll:" + s->id, index)};
            if (roll.bernoulli(cfg.spec_augment.roll_p) && !w.samples.empty()) {
                const auto shift = static_cast<std::ptrdiff_t>(roll.uniform_index(w.samples.size()));
                w = roll_waveform(w, shift);
                ++out.tally.rolled;
            }
        }

        const std::size_t start = joined.samples.size();
        const std::size_t take = std::min(w.samples.size(), context_samples - start);
        joined.samples.insert(joined.samples.end(), w.samples.begin(),
                              w.samples.begin() + static_cast<std::ptrdiff_t>(take));
        file.members.push_back(member_record(*s, static_cast<double>(start) / kModelSampleRate,
                                             static_cast<double>(take) / kModelSampleRate));
    }

    file.total_duration_s = static_cast<float>(static_cast<double>(joined.samples.size()) / kModelSampleRate);
    const std::string first_id = members.empty() ? std::string{} : members.front()->id;

    in_stage("featurize", first_id, [&] {
        const PaddedWaveform padded = pad_or_trim(joined, cfg.context_s);
        file.mel = log_mel_spectrogram(padded.waveform);
        if (augment) {
            SpecAugmentResult r = spec_augment(file.mel, cfg.spec_augment,
                                               derive_seed(cfg.seed, "spec_augment", index));
            file.mel = std::move(r.mel);
            ++out.tally.spectrograms;
            out.tally.freq_masked += r.freq_masked;
            out.tally.time_masked += r.time_masked;
            out.tally.noised += r.noised;
        }
        return 0;
    });

    in_stage("serialize", first_id, [&] {
        const fs::path path = cfg.output_dir / out.relpath;
        fs::create_directories(path.parent_path());
        write_feature_file(path, file);
        return 0;
    });
    out.sidecar = sidecar_record(file, index, out.relpath);
    return out;
}

void
write_text(const fs::path &path, const std::string &text)
{
    std::ofstream f{path, std::ios::binary | std::ios::trunc};
    if (!f)
        throw DataError{"cannot open '" + path.string() + "' for writing"};
    f << text;
    if (!f)
        throw DataError{"write to '" + path.string() + "' failed"};
}

} // namespace

void
PipelineConfig::validate() const
{
    if (manifests.empty())
        throw ConfigError{"no input: at least one manifest is required"};
    for (const fs::path &m : manifests)
        if (!fs::is_regular_file(m))
            throw ConfigError{"manifest not found: '" + m.string() + "'"};
    if (label_mapping && !fs::is_regular_file(*label_mapping))
        throw ConfigError{"label mapping not found: '" + label_mapping->string() + "'"};
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError{"split.train_fraction must lie in (0, 1)"};
    if (!(fill_fraction > 0.0 && fill_fraction < 1.0))
        throw ConfigError{"packer.fill_fraction must lie in (0, 1)"};
    if (!(context_s > 0.0) || !std::isfinite(context_s))
        throw ConfigError{"context_s must be positive"};
    if (refresh_threshold == 0)
        throw ConfigError{"packer.refresh_threshold must be at least 1"};
    if (shard_size == 0)
        throw ConfigError{"packer.shard_size must be at least 1"};
    if (jobs == 0)
        throw ConfigError{"jobs must be at least 1"};
    if (output_dir.empty())
        throw ConfigError{"output_dir must not be empty"};
    augment.validate();
    spec_augment.validate();
    try {
        loss.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError{std::string{"loss: "} + e.what()};
    }
}

PipelineConfig
config_from_json(const json &j, const fs::path &base_dir)
{
    if (!j.is_object())
        throw ConfigError{"config must be a JSON object"};
    for (const auto &[key, value] : j.items())
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            throw ConfigError{"unknown config key '" + key + "'"};

    PipelineConfig c;
    try {
        if (const auto it = j.find("manifests"); it != j.end()) {
            if (it->is_string())
                c.manifests.push_back(resolve(it->get<std::string>(), base_dir));
            else
                for (const json &m : *it)
                    c.manifests.push_back(resolve(m.get<std::string>(), base_dir));
        }
        if (const auto it = j.find("label_mapping"); it != j.end() && !it->is_null())
            c.label_mapping = resolve(it->get<std::string>(), base_dir);
        c.smoothing = get_or(j, "smoothing", c.smoothing);
        if (const auto it = j.find("split"); it != j.end()) {
            c.train_fraction = get_or(*it, "train_fraction", c.train_fraction);
            if (const auto s = it->find("seed"); s != it->end() && !s->is_null())
                c.split_seed = s->get<std::uint64_t>();
        }
        c.context_s = get_or(j, "context_s", c.context_s);
        if (const auto it = j.find("packer"); it != j.end()) {
            c.fill_fraction = get_or(*it, "fill_fraction", c.fill_fraction);
            c.refresh_threshold = get_or(*it, "refresh_threshold", c.refresh_threshold);
            c.shard_size = get_or(*it, "shard_size", c.shard_size);
        }
        if (const auto it = j.find("augment"); it != j.end()) {
            json a = *it;
            if (a.contains("enabled")) {
                c.augment_enabled = a["enabled"].get<bool>();
                a.erase("enabled");
            }
            c.augment = a.get<AugmentConfig>();
        }
        if (const auto it = j.find("spec_augment"); it != j.end())
            c.spec_augment = it->get<SpecAugmentConfig>();
        if (const auto it = j.find("loss"); it != j.end())
            c.loss = it->get<LossConfig>();
        if (const auto it = j.find("output_dir"); it != j.end())
            c.output_dir = resolve(it->get<std::string>(), base_dir);
        c.jobs = get_or(j, "jobs", c.jobs);
        c.seed = get_or(j, "seed", c.seed);
    } catch (const json::exception &e) {
        throw ConfigError{std::string{"config: "} + e.what()};
    } catch (const std::invalid_argument &e) {
        throw ConfigError{std::string{"config: "} + e.what()};
    }
    return c;
}

json
config_to_json(const PipelineConfig &c)
{
    json j;
    j["manifests"] = json::array();
    for (const fs::path &m : c.manifests)
        j["manifests"].push_back(m.string());
    j["label_mapping"] = c.label_mapping ? json(c.label_mapping->string()) : json(nullptr);
    j["smoothing"] = c.smoothing;
    j["split"] = {{"train_fraction", c.train_fraction},
                  {"seed", c.split_seed ? json(*c.split_seed) : json(nullptr)}};
    j["context_s"] = c.context_s;
    j["packer"] = {{"fill_fraction", c.fill_fraction},
                   {"refresh_threshold", c.refresh_threshold},
                   {"shard_size", c.shard_size}};
    j["augment"] = c.augment;
    j["augment"]["enabled"] = c.augment_enabled;
    j["spec_augment"] = c.spec_augment;
    j["loss"] = c.loss;
    j["output_dir"] = c.output_dir.string();
    j["jobs"] = c.jobs;
    j["seed"] = c.seed;
    return j;
}

void
apply_override(json &j, const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError{"override '" + assignment + "' is not of the form key=value"};
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;

    json *node = &j;
    std::size_t pos = 0;
    for (;;) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty())
            throw ConfigError{"override key '" + key + "' has an empty component"};
        if (node->is_null())
            *node = json::object();
        if (!node->is_object())
            throw ConfigError{"override key '" + key + "' descends into a non-object"};
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

PipelineConfig
load_config(const std::optional<fs::path> &path, const std::vector<std::string> &overrides)
{
    json j = json::object();
    fs::path base;
    if (path) {
        std::ifstream f{*path};
        if (!f)
            throw ConfigError{"cannot open config '" + path->string() + "'"};
        j = json::parse(f, nullptr, false);
        if (j.is_discarded())
            throw ConfigError{"config '" + path->string() + "' is not valid JSON"};
        base = path->parent_path();
    }
    for (const std::string &o : overrides)
        apply_override(j, o);
    return config_from_json(j, base);
}

CorpusState
prepare_corpus(const PipelineConfig &cfg)
{
    cfg.validate();

    std::vector<RawSample> raw;
    for (const fs::path &m : cfg.manifests) {
        std::vector<RawSample> part = in_stage("manifest", "", [&] { return load_manifest(m); });
        raw.insert(raw.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    if (raw.empty())
        throw DataError{"no input: manifests contain no samples"};
    {
        std::vector<std::string> ids;
        ids.reserve(raw.size());
        for (const RawSample &r : raw)
            ids.push_back(r.id);
        std::sort(ids.begin(), ids.end());
        if (const auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end())
            throw DataError{"stage 'manifest': duplicate sample id '" + *dup + "' across manifests"};
    }

    const LabelMapping mapping = in_stage("mapping", "", [&] {
        return cfg.label_mapping ? LabelMapping::load(*cfg.label_mapping) : LabelMapping::defaults();
    });

    CorpusState state;
    std::vector<Sample> samples = in_stage("harmonize", "", [&] { return harmonize_all(raw, mapping); });
    std::tie(state.samples, state.domains) = assign_domains(std::move(samples));
    if (cfg.smoothing)
        state.smoothing = in_stage("smooth", "", [&] { return smooth_by_dataset(state.samples); });
    state.split = in_stage("split", "", [&] {
        return split_train_val(state.samples, cfg.train_fraction, cfg.split_seed.value_or(cfg.seed));
    });
    return state;
}

std::vector<std::pair<std::size_t, std::size_t>>
packing_shards(std::size_t n, std::size_t shard_size)
{
    if (shard_size == 0)
        throw std::invalid_argument{"shard size must be positive"};
    std::vector<std::pair<std::size_t, std::size_t>> shards;
    if (n == 0)
        return shards;
    const std::size_t count = std::max<std::size_t>(1, n / shard_size);
    for (std::size_t k = 0; k < count; ++k)
        shards.emplace_back(k * shard_size, k + 1 == count ? n : (k + 1) * shard_size);
    return shards;
}

std::vector<PackedSequence>
pack_training_set(std::span<const Sample> train, const PipelineConfig &cfg)
{
    const PackerOptions opts = cfg.packer_options();
    const auto shards = packing_shards(train.size(), cfg.shard_size);

    std::vector<std::vector<PackedSequence>> per_shard(shards.size());
    parallel_for(shards.size(), cfg.jobs, [&](std::size_t k) {
        const auto [begin, end] = shards[k];
        in_stage("pack", train[begin].id, [&] {
            SortedPool pool = prepare_pool(train, begin, end);
            Rng rng{derive_seed(cfg.seed, "pack", k)};
            do {
                per_shard[k].push_back(retrieve_sequence(pool, opts, rng));
            } while (pool.refresh_count() == 0 &&
                     pool.alive_in_prefix(pool.fitting_prefix(opts.target_length_s)) >=
                         opts.refresh_threshold);
            return 0;
        });
    });

    std::vector<PackedSequence> all;
    for (auto &s : per_shard)
        all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return all;
}

AugmentTally &
AugmentTally::operator+=(const AugmentTally &o)
{
    for (std::size_t e = 0; e < kNumEffects; ++e)
        fired[e] += o.fired[e];
    waveforms += o.waveforms;
    rolled += o.rolled;
    spectrograms += o.spectrograms;
    freq_masked += o.freq_masked;
    time_masked += o.time_masked;
    noised += o.noised;
    return *this;
}

json
PipelineReport::to_json() const
{
    json j;
    j["samples"] = {{"total", n_samples}, {"train", n_train}, {"val", n_val}, {"domains", n_domains}};
    j["sequences"] = {{"train", n_train_sequences}, {"val", n_val_sequences}, {"shards", n_shards},
                      {"pool_refreshes", pool_refreshes}};
    j["durations_s"] = {{"input", input_duration_s},
                        {"packed", packed_duration_s},
                        {"min_sequence", min_sequence_s},
                        {"max_sequence", max_sequence_s}};

    json smooth;
    smooth["mean_intensity"] = smoothing.mean_intensity;
    smooth["n_smoothed"] = smoothing.n_smoothed;
    smooth["guard_adjustments"] = smoothing.n_guard_adjustments;
    j["smoothing"] = smooth;

    json waveform = json::object();
    for (std::size_t e = 0; e < kNumEffects; ++e) {
        const double rate = augmentation.waveforms == 0
                                ? 0.0
                                : static_cast<double>(augmentation.fired[e]) /
                                      static_cast<double>(augmentation.waveforms);
        waveform[std::string{kEffectNames[e]}] = {{"fired", augmentation.fired[e]}, {"rate", rate}};
    }
    j["augmentation"] = {{"waveforms", augmentation.waveforms},
                         {"effects", waveform},
                         {"rolled", augmentation.rolled},
                         {"spectrograms", augmentation.spectrograms},
                         {"freq_masked", augmentation.freq_masked},
                         {"time_masked", augmentation.time_masked},
                         {"noised", augmentation.noised}};

    json p = json::object();
    for (std::size_t k = 0; k < priors.size() && k < kNumEmotions; ++k)
        p[std::string{kEmotionNames[k]}] = priors[k];
    j["priors"] = p;
    return j;
}

PipelineReport
run_pipeline(const PipelineConfig &cfg)
{
    CorpusState state = prepare_corpus(cfg);
    const std::vector<Sample> &train = state.split.train;
    const std::vector<Sample> &val = state.split.val;
    if (train.empty())
        throw DataError{"stage 'split': training split is empty"};

    PipelineReport report;
    report.n_samples = state.samples.size();
    report.n_train = train.size();
    report.n_val = val.size();
    report.n_domains = state.domains.size();
    report.smoothing = state.smoothing;
    report.priors = class_priors(train);
    for (const Sample &s : state.samples)
        report.input_duration_s += s.duration_s;

    const std::vector<PackedSequence> packed = pack_training_set(train, cfg);
    report.n_shards = packing_shards(train.size(), cfg.shard_size).size();
    report.n_train_sequences = packed.size();
    report.n_val_sequences = val.size();
    report.min_sequence_s = packed.empty() ? 0.0 : packed.front().total_duration_s;
    for (const PackedSequence &p : packed) {
        report.packed_duration_s += p.total_duration_s;
        report.min_sequence_s = std::min(report.min_sequence_s, p.total_duration_s);
        report.max_sequence_s = std::max(report.max_sequence_s, p.total_duration_s);
        report.pool_refreshes += p.refreshes;
    }

    in_stage("serialize", "", [&] {
        fs::create_directories(cfg.output_dir / "train");
        fs::create_directories(cfg.output_dir / "val");
        return 0;
    });

    std::vector<SequenceOutput> train_out(packed.size());
    parallel_for(packed.size(), cfg.jobs, [&](std::size_t i) {
        std::vector<const Sample *> members;
        members.reserve(packed[i].source_indices.size());
        for (std::size_t idx : packed[i].source_indices)
            members.push_back(&train[idx]);
        train_out[i] = build_sequence(members, i, "train", cfg.augment_enabled, cfg);
    });

    std::vector<SequenceOutput> val_out(val.size());
    parallel_for(val.size(), cfg.jobs, [&](std::size_t i) {
        const Sample *member = &val[i];
        val_out[i] = build_sequence(std::span<const Sample *const>{&member, 1}, i, "val", false, cfg);
    });

    for (const SequenceOutput &o : train_out)
        report.augmentation += o.tally;

    in_stage("serialize", "", [&] {
        auto sidecar = [](const std::vector<SequenceOutput> &outs) {
            std::string text;
            for (const SequenceOutput &o : outs)
                text += o.sidecar.dump() + '\n';
            return text;
        };
        write_text(cfg.output_dir / "train" / "sequences.jsonl", sidecar(train_out));
        write_text(cfg.output_dir / "val" / "sequences.jsonl", sidecar(val_out));
        write_text(cfg.output_dir / "domains.json", state.domains.to_json().dump(2) + '\n');
        write_text(cfg.output_dir / "report.json", report.to_json().dump(2) + '\n');
        return 0;
    });
    return report;
}

} // namespace emopack
