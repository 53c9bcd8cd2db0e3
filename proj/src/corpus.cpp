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

#include "emopack/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "emopack/error.hpp"
#include "emopack/rng.hpp"

namespace emopack {
namespace {

using nlohmann::json;

const json &
require_field(const json &obj, const char *name, std::size_t line_no)
{
    auto it = obj.find(name);
    if (it == obj.end())
        throw DataError{"manifest line " + std::to_string(line_no) + ": missing field '" + name +
                        "'"};
    return *it;
}

std::string
require_string(const json &obj, const char *name, std::size_t line_no)
{
    const json &v = require_field(obj, name, line_no);
    if (!v.is_string())
        throw DataError{"manifest line " + std::to_string(line_no) + ": field '" + name +
                        "' must be a string"};
    return v.get<std::string>();
}

RawSample
parse_manifest_line(const std::string &text, std::size_t line_no,
                    const std::filesystem::path &base_dir)
{
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error &ex) {
        throw DataError{"manifest line " + std::to_string(line_no) + ": parse error: " +
                        ex.what()};
    }
    if (!obj.is_object())
        throw DataError{"manifest line " + std::to_string(line_no) + ": expected a JSON object"};

    RawSample s;
    s.id = require_string(obj, "id", line_no);
    s.audio_path = require_string(obj, "audio_path", line_no);
    s.dataset = require_string(obj, "dataset", line_no);
    s.speaker = require_string(obj, "speaker", line_no);
    s.language = require_string(obj, "language", line_no);

    const json &dur = require_field(obj, "duration_s", line_no);
    if (!dur.is_number())
        throw DataError{"manifest line " + std::to_string(line_no) +
                        ": field 'duration_s' must be a number"};
    s.duration_s = dur.get<double>();
    if (!std::isfinite(s.duration_s) || s.duration_s <= 0.0)
        throw DataError{"manifest line " + std::to_string(line_no) + ": non-positive duration (" +
                        dur.dump() + ") for sample '" + s.id + "'"};

    const json &labels = require_field(obj, "labels", line_no);
    if (!labels.is_object())
        throw DataError{"manifest line " + std::to_string(line_no) +
                        ": field 'labels' must be an object"};
    for (const auto &[key, value] : labels.items()) {
        if (!value.is_number())
            throw DataError{"manifest line " + std::to_string(line_no) + ": label '" + key +
                            "' must be numeric"};
        double score = value.get<double>();
        if (!std::isfinite(score) || score < 0.0)
            throw DataError{"manifest line " + std::to_string(line_no) + ": label '" + key +
                            "' must be finite and non-negative"};
        s.raw_labels[key] = score;
    }

    if (!base_dir.empty()) {
        std::filesystem::path audio{s.audio_path};
        if (audio.is_relative())
            s.audio_path = (base_dir / audio).lexically_normal().string();
    }

    return s;
}

} // namespace

std::vector<RawSample>
parse_manifest(std::istream &in, const std::filesystem::path &base_dir)
{
    std::vector<RawSample> out;
    std::set<std::string> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;

        RawSample s = parse_manifest_line(line, line_no, base_dir);
        if (!seen.insert(s.id).second)
            throw DataError{"manifest line " + std::to_string(line_no) + ": duplicate id '" +
                            s.id + "'"};
        out.push_back(std::move(s));
    }

    return out;
}

std::vector<RawSample>
load_manifest(const std::filesystem::path &path)
{
    std::ifstream in{path};
    if (!in)
        throw DataError{"cannot open manifest " + path.string()};

    try {
        return parse_manifest(in, path.parent_path());
    } catch (const DataError &ex) {
        throw DataError{path.string() + ": " + ex.what()};
    }
}

LabelMapping
LabelMapping::defaults()
{
    LabelMapping m;
    for (std::size_t i = 0; i < kNumEmotions; ++i)
        m.entries_[std::string{kEmotionNames[i]}] = {{static_cast<Emotion>(i), 1.0}};
    m.entries_["contempt"] = {{Emotion::disgust, 0.5}};
    return m;
}

void
LabelMapping::set(const std::string &raw_label, std::vector<MappingTarget> targets)
{
    if (targets.empty())
        throw ConfigError{"label mapping for '" + raw_label + "' has no targets"};
    for (const MappingTarget &t : targets)
        if (!(t.weight > 0.0 && t.weight <= 1.0))
            throw ConfigError{"label mapping for '" + raw_label + "' has weight " +
                              std::to_string(t.weight) + " outside (0, 1]"};

    entries_[raw_label] = std::move(targets);
}

LabelMapping
LabelMapping::from_json(const json &j, bool extend_defaults)
{
    if (!j.is_object())
        throw ConfigError{"label mapping must be a JSON object"};

    LabelMapping m = extend_defaults ? defaults() : LabelMapping{};
    for (const auto &[raw, targets] : j.items()) {
        if (!targets.is_array())
            throw ConfigError{"label mapping for '" + raw + "' must be an array of pairs"};

        std::vector<MappingTarget> parsed;
        for (const json &pair : targets) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
                !pair[1].is_number())
                throw ConfigError{"label mapping for '" + raw +
                                  "' must contain [canonical_name, weight] pairs"};

            auto name = pair[0].get<std::string>();
            auto emotion = emotion_from_string(name);
            if (!emotion)
                throw ConfigError{"label mapping for '" + raw + "' targets unknown emotion '" +
                                  name + "'"};
            parsed.push_back({*emotion, pair[1].get<double>()});
        }
        m.set(raw, std::move(parsed));
    }

    return m;
}

LabelMapping
LabelMapping::load(const std::filesystem::path &path, bool extend_defaults)
{
    std::ifstream in{path};
    if (!in)
        throw ConfigError{"cannot open label mapping " + path.string()};

    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error &ex) {
        throw ConfigError{path.string() + ": " + ex.what()};
    }
    return from_json(j, extend_defaults);
}

std::optional<std::vector<MappingTarget>>
LabelMapping::lookup(const std::string &raw_label) const
{
    if (auto it = entries_.find(raw_label); it != entries_.end())
        return it->second;

    if (auto emotion = emotion_from_string(raw_label))
        return std::vector<MappingTarget>{{*emotion, 1.0}};

    return std::nullopt;
}

json
LabelMapping::to_json() const
{
    json j = json::object();
    for (const auto &[raw, targets] : entries_) {
        json arr = json::array();
        for (const MappingTarget &t : targets)
            arr.push_back(json::array({std::string{to_string(t.emotion)}, t.weight}));
        j[raw] = std::move(arr);
    }
    return j;
}

EmotionDistribution
harmonize(const std::map<std::string, double> &raw_labels, const LabelMapping &mapping)
{
    EmotionDistribution out;
    std::vector<std::string> unknown;

    for (const auto &[raw, score] : raw_labels) {
        auto targets = mapping.lookup(raw);
        if (!targets) {
            unknown.push_back(raw);
            continue;
        }
        for (const MappingTarget &t : *targets)
            out[t.emotion] += score * t.weight;
    }

    if (!unknown.empty()) {
        std::string msg = "unknown raw label(s):";
        for (const std::string &u : unknown)
            msg += " '" + u + "'";
        throw DataError{msg};
    }

    validate(out, /*require_mass=*/false);
    if (std::all_of(out.scores.begin(), out.scores.end(), [](double v) { return v == 0.0; }))
        throw DataError{"harmonized emotion scores are all zero"};

    return out;
}

std::uint32_t
DomainTable::intern(const DomainKey &key)
{
    auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(keys_.size()));
    if (inserted)
        keys_.push_back(key);
    return it->second;
}

std::optional<std::uint32_t>
DomainTable::find(const DomainKey &key) const
{
    if (auto it = index_.find(key); it != index_.end())
        return it->second;
    return std::nullopt;
}

json
DomainTable::to_json() const
{
    json arr = json::array();
    for (std::size_t i = 0; i < keys_.size(); ++i)
        arr.push_back({{"domain_id", i},
                       {"dataset", keys_[i].dataset},
                       {"speaker", keys_[i].speaker},
                       {"language", keys_[i].language}});
    return arr;
}

std::pair<std::vector<Sample>, DomainTable>
assign_domains(std::vector<Sample> samples)
{
    DomainTable table;
    for (Sample &s : samples)
        s.domain_id = table.intern(domain_key(s));
    return {std::move(samples), std::move(table)};
}

TrainValSplit
split_train_val(std::span<const Sample> samples, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument{"train_fraction must lie in (0, 1), got " +
                                    std::to_string(train_fraction)};
    if (samples.empty())
        throw DataError{"cannot split an empty sample list"};

    const std::size_t n = samples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Fisher-Yates with the portable generator.
    Rng rng{derive_seed(seed, "split")};
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_index(i + 1)]);

    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::min(n_train, n);

    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i)
        in_train[order[i]] = true;

    TrainValSplit out;
    out.train.reserve(n_train);
    out.val.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i)
        (in_train[i] ? out.train : out.val).push_back(samples[i]);

    return out;
}

std::vector<Sample>
harmonize_all(std::span<const RawSample> raw, const LabelMapping &mapping)
{
    std::vector<Sample> out;
    out.reserve(raw.size());
    for (const RawSample &r : raw) {
        Sample s;
        static_cast<RawSample &>(s) = r;
        try {
            s.emotion = harmonize(r.raw_labels, mapping);
        } catch (const DataError &ex) {
            throw DataError{"sample '" + r.id + "': " + ex.what()};
        }
        out.push_back(std::move(s));
    }
    return out;
}

json
sample_to_json(const Sample &s)
{
    json emotion = json::object();
    for (std::size_t i = 0; i < kNumEmotions; ++i)
        emotion[std::string{kEmotionNames[i]}] = s.emotion.scores[i];

    return {{"id", s.id},
            {"audio_path", s.audio_path},
            {"dataset", s.dataset},
            {"speaker", s.speaker},
            {"language", s.language},
            {"duration_s", s.duration_s},
            {"labels", s.raw_labels},
            {"emotion", std::move(emotion)},
            {"domain_id", s.domain_id}};
}

} // namespace emopack
