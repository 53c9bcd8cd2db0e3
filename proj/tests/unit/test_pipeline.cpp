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

#include <filesystem>
#include <fstream>

#include "emopack/error.hpp"
#include "emopack/feature_file.hpp"
#include "emopack/pipeline.hpp"
#include "support/oracles.hpp"

using namespace emopack;
namespace fs = std::filesystem;

namespace {

PipelineConfig
corpus_config(const fs::path &root, std::size_t jobs)
{
    PipelineConfig cfg;
    cfg.manifests = {oracle::write_synthetic_corpus(root / "corpus")};
    cfg.output_dir = root / ("out" + std::to_string(jobs));
    cfg.train_fraction = 0.8;
    cfg.jobs = jobs;
    cfg.seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("dotted overrides")
{
    nlohmann::json j = nlohmann::json::object();
    apply_override(j, "seed=7");
    apply_override(j, "augment.probability.noise=0.5");
    apply_override(j, "output_dir=some/dir");
    apply_override(j, R"(manifests=["a.jsonl"])");
    CHECK(j["seed"] == 7);
    CHECK(j["augment"]["probability"]["noise"] == 0.5);
    CHECK(j["output_dir"] == "some/dir");
    CHECK(j["manifests"].size() == 1);
    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "seed.x=1"), ConfigError);
}

TEST_CASE("config parsing resolves paths and rejects unknown keys")
{
    const auto j = nlohmann::json::parse(
        R"({"manifests": ["m.jsonl"], "split": {"train_fraction": 0.7}, "packer": {"shard_size": 10}, "augment": {"enabled": false}})");
    const PipelineConfig c = config_from_json(j, "/base");
    CHECK(c.manifests.at(0) == fs::path{"/base/m.jsonl"});
    CHECK(c.train_fraction == 0.7);
    CHECK(c.shard_size == 10);
    CHECK_FALSE(c.augment_enabled);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"sed": 1})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);

    const PipelineConfig round = config_from_json(config_to_json(c));
    CHECK(round.manifests == c.manifests);
    CHECK(round.shard_size == 10);
}

TEST_CASE("config validation")
{
    PipelineConfig c;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("no input"), ConfigError);
    c.manifests = {"/definitely/missing.jsonl"};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    oracle::TempDir dir{"cfg"};
    c.manifests = {oracle::write_synthetic_corpus(dir.path())};
    CHECK_NOTHROW(c.validate());
    c.train_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("packing shards fold the remainder into the last shard")
{
    using P = std::vector<std::pair<std::size_t, std::size_t>>;
    CHECK(packing_shards(2500, 1000) == P{{0, 1000}, {1000, 2500}});
    CHECK(packing_shards(999, 1000) == P{{0, 999}});
    CHECK(packing_shards(3000, 1000).size() == 3);
    CHECK(packing_shards(0, 1000).empty());
}

TEST_CASE("pipeline output is independent of worker count")
{
    oracle::TempDir dir{"pipe"};
    const PipelineConfig one = corpus_config(dir.path(), 1);
    PipelineConfig four = one;
    four.jobs = 4;
    four.output_dir = dir.path() / "out4";

    const PipelineReport r1 = run_pipeline(one);
    const PipelineReport r4 = run_pipeline(four);
    CHECK(r1.to_json() == r4.to_json());
    const auto a = oracle::snapshot(one.output_dir);
    const auto b = oracle::snapshot(four.output_dir);
    CHECK(a.size() == b.size());
    CHECK(a == b);

    CHECK(r1.n_samples == 10);
    CHECK(r1.n_train == 8);
    CHECK(r1.n_val == 2);
    CHECK(r1.n_train_sequences >= 1);
    CHECK(r1.min_sequence_s >= 24.0);
    CHECK(r1.max_sequence_s <= 30.0);
    CHECK(a.count("report.json") == 1);
    CHECK(a.count("train/sequences.jsonl") == 1);
    CHECK(a.count("train/features/000/seq_000000.epk") == 1);

    const FeatureFile f = read_feature_file(one.output_dir / "train/features/000/seq_000000.epk");
    CHECK(f.mel.n_mels == 80);
    CHECK(f.mel.n_frames == 3000);
    CHECK_FALSE(f.members.empty());
    CHECK(f.total_duration_s <= 30.0F);
    const FeatureFile v = read_feature_file(one.output_dir / "val/features/000/seq_000000.epk");
    CHECK(v.members.size() == 1);
}

TEST_CASE("report total equals the sum of sequence totals")
{
    oracle::TempDir dir{"report"};
    PipelineConfig cfg = corpus_config(dir.path(), 2);
    const CorpusState state = prepare_corpus(cfg);
    const auto packed = pack_training_set(state.split.train, cfg);
    double sum = 0.0;
    for (const auto &p : packed) {
        CHECK(p.total_duration_s >= 0.8 * cfg.context_s);
        CHECK(p.total_duration_s <= cfg.context_s);
        sum += p.total_duration_s;
    }
    const PipelineReport r = run_pipeline(cfg);
    CHECK(r.packed_duration_s == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("stage errors carry stage and sample")
{
    oracle::TempDir dir{"stage"};
    PipelineConfig cfg = corpus_config(dir.path(), 1);
    fs::remove(dir.path() / "corpus/audio/utt3.wav");
    try {
        run_pipeline(cfg);
        FAIL("expected a data error");
    } catch (const DataError &e) {
        const std::string what = e.what();
        CHECK(what.find("stage 'load'") != std::string::npos);
        CHECK(what.find("sample 's3'") != std::string::npos);
    }
}

TEST_CASE("empty manifest is reported as no input")
{
    oracle::TempDir dir{"empty"};
    std::ofstream{dir.path() / "m.jsonl"};
    PipelineConfig cfg;
    cfg.manifests = {dir.path() / "m.jsonl"};
    cfg.output_dir = dir.path() / "out";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("no input"), DataError);
}
