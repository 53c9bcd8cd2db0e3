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

#include <fstream>

#include "support/oracles.hpp"

namespace fs = std::filesystem;

TEST_CASE("cli exit codes")
{
    oracle::TempDir dir{"cli"};
    const fs::path manifest = oracle::write_synthetic_corpus(dir.path() / "corpus");
    const fs::path log = dir.path() / "log.txt";
    const std::string m = "--set 'manifests=[\"" + manifest.string() + "\"]'";

    CHECK(oracle::run_cli("--help", log) == 0);
    CHECK(oracle::run_cli("frobnicate", log) == 2);
    CHECK(oracle::run_cli("run", log) == 2);
    CHECK(oracle::run_cli("run --config " + (dir.path() / "nope.json").string(), log) == 2);
    CHECK(oracle::run_cli("run " + m + " --set split.train_fraction=2", log) == 2);
    CHECK(oracle::run_cli("harmonize " + m + " --out " + (dir.path() / "h").string(), log) == 0);
    CHECK(fs::exists(dir.path() / "h/harmonized.jsonl"));
    CHECK(oracle::run_cli("pack " + m + " --seed 3", log) == 0);

    std::ofstream{dir.path() / "corpus/manifest.jsonl", std::ios::app}
        << R"({"id":"x","audio_path":"audio/missing.wav","dataset":"alpha","speaker":"z","language":"en","duration_s":3,"labels":{"anger":1}})"
        << '\n';
    CHECK(oracle::run_cli("run " + m + " --set split.train_fraction=0.99 --out " + (dir.path() / "o").string(),
                          log) == 3);
    CHECK(oracle::read_bytes(log).find("sample 'x'") != std::string::npos);
}

TEST_CASE("cli featurize, augment, eval and toy-train")
{
    oracle::TempDir dir{"cli2"};
    const fs::path manifest = oracle::write_synthetic_corpus(dir.path() / "corpus", {2, 1});
    const fs::path wav = dir.path() / "corpus/audio/utt0.wav";
    const fs::path log = dir.path() / "log.txt";

    CHECK(oracle::run_cli("featurize " + wav.string() + " " + (dir.path() / "f.epk").string(), log) == 0);
    CHECK(oracle::read_bytes(log).find("\"n_frames\":3000") != std::string::npos);
    CHECK(oracle::run_cli("augment --seed 5 " + wav.string() + " " + (dir.path() / "a.wav").string(), log) == 0);
    CHECK(fs::exists(dir.path() / "a.wav"));

    std::ofstream{dir.path() / "pred.jsonl"} << R"({"logits":[5,0,0,0,0,0,0,0],"label":"happiness"})" << '\n'
                                             << R"({"logits":[0,5,0,0,0,0,0,0],"label":"anger"})" << '\n';
    CHECK(oracle::run_cli("eval " + (dir.path() / "pred.jsonl").string(), log) == 0);
    CHECK(oracle::read_bytes(log).find("\"micro_f1\": 0.5") != std::string::npos);
    std::ofstream{dir.path() / "bad.jsonl"} << R"({"logits":[1,2],"label":"anger"})" << '\n';
    CHECK(oracle::run_cli("eval " + (dir.path() / "bad.jsonl").string(), log) == 3);

    CHECK(oracle::run_cli("toy-train --epochs 5 --n 120 --trace " + (dir.path() / "t.csv").string(), log) == 0);
    CHECK(fs::exists(dir.path() / "t.csv"));
    CHECK(oracle::run_cli("golden-check --dir " + (oracle::fixture_dir() / "golden").string(), log) == 0);
}
