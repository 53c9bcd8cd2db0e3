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

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emopack/audio.hpp"
#include "emopack/augment.hpp"
#include "emopack/error.hpp"
#include "emopack/eval.hpp"
#include "emopack/feature_file.hpp"
#include "emopack/features.hpp"
#include "emopack/golden.hpp"
#include "emopack/pipeline.hpp"
#include "emopack/toyhead.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace emopack;

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kInvariant = 4 };

struct CommonOptions {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> out;
    std::vector<std::string> sets;

    void
    attach(CLI::App *app)
    {
        app->add_option("--config", config, "JSON pipeline config");
        app->add_option("--seed", seed, "Global seed");
        app->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Output directory");
        app->add_option("--set", sets, "Override a config field (dotted.key=value)");
    }

    PipelineConfig
    resolve() const
    {
        std::vector<std::string> overrides = sets;
        if (seed)
            overrides.push_back("seed=" + std::to_string(*seed));
        if (jobs)
            overrides.push_back("jobs=" + std::to_string(*jobs));
        if (out)
            overrides.push_back("output_dir=" + json(*out).dump());
        std::optional<fs::path> path;
        if (config)
            path = *config;
        return load_config(path, overrides);
    }
};

// Writes to <out>/<name> when --out was given, stdout otherwise.
void
emit(const CommonOptions &opts, const PipelineConfig &cfg, const std::string &name, const std::string &text)
{
    if (!opts.out) {
        std::cout << text;
        return;
    }
    fs::create_directories(cfg.output_dir);
    std::ofstream f{cfg.output_dir / name, std::ios::binary | std::ios::trunc};
    if (!f)
        throw DataError{"cannot write '" + (cfg.output_dir / name).string() + "'"};
    f << text;
}

std::string
samples_jsonl(const std::vector<Sample> &samples)
{
    std::string text;
    for (const Sample &s : samples)
        text += sample_to_json(s).dump() + '\n';
    return text;
}

int
cmd_harmonize(const CommonOptions &opts)
{
    PipelineConfig cfg = opts.resolve();
    cfg.smoothing = false;
    const CorpusState state = prepare_corpus(cfg);
    emit(opts, cfg, "harmonized.jsonl", samples_jsonl(state.samples));
    return kOk;
}

int
cmd_smooth(const CommonOptions &opts)
{
    PipelineConfig cfg = opts.resolve();
    cfg.smoothing = true;
    const CorpusState state = prepare_corpus(cfg);
    emit(opts, cfg, "smoothed.jsonl", samples_jsonl(state.samples));
    std::cerr << "mean intensity per dataset: " << json(state.smoothing.mean_intensity).dump()
              << ", guard adjustments: " << state.smoothing.n_guard_adjustments << '\n';
    return kOk;
}

int
cmd_pack(const CommonOptions &opts)
{
    const PipelineConfig cfg = opts.resolve();
    const CorpusState state = prepare_corpus(cfg);
    const std::vector<PackedSequence> packed = pack_training_set(state.split.train, cfg);
    std::string text;
    for (std::size_t i = 0; i < packed.size(); ++i) {
        const PackedSequence &p = packed[i];
        text += json{{"sequence", i},
                     {"ids", p.sample_ids},
                     {"durations_s", p.durations_s},
                     {"total_duration_s", p.total_duration_s},
                     {"refreshes", p.refreshes}}
                    .dump() +
                '\n';
    }
    emit(opts, cfg, "packed.jsonl", text);
    return kOk;
}

int
cmd_augment(const CommonOptions &opts, const std::string &input, const std::string &output)
{
    const PipelineConfig cfg = opts.resolve();
    const Waveform w = convert_sample_rate(read_wav(input), kModelSampleRate);
    const AugmentResult r = augment_waveform(w, cfg.augment, derive_seed(cfg.seed, "augment-cli"));
    write_wav(output, r.waveform);
    json fired = json::array();
    for (std::size_t e = 0; e < kNumEffects; ++e)
        if (r.fired[e])
            fired.push_back(std::string{kEffectNames[e]});
    std::cout << json{{"fired", fired}, {"samples", r.waveform.size()}}.dump() << '\n';
    return kOk;
}

int
cmd_featurize(const CommonOptions &opts, const std::string &input, const std::string &output, bool pad)
{
    const PipelineConfig cfg = opts.resolve();
    Waveform w = convert_sample_rate(read_wav(input), kModelSampleRate);
    if (pad)
        w = pad_or_trim(w, cfg.context_s).waveform;
    FeatureFile f;
    f.mel = log_mel_spectrogram(w);
    f.total_duration_s = static_cast<float>(w.duration_s());
    write_feature_file(output, f);
    std::cout << json{{"n_mels", f.mel.n_mels}, {"n_frames", f.mel.n_frames}}.dump() << '\n';
    return kOk;
}

int
cmd_run(const CommonOptions &opts)
{
    const PipelineConfig cfg = opts.resolve();
    const PipelineReport report = run_pipeline(cfg);
    std::cout << report.to_json().dump(2) << '\n';
    return kOk;
}

// Predictions: JSONL lines {"logits": [...], "label": "<emotion>"} with an
// optional "target" score vector for correlation.
int
cmd_eval(const CommonOptions &opts, const std::string &input)
{
    const PipelineConfig cfg = opts.resolve();
    std::ifstream in{input};
    if (!in)
        throw DataError{"cannot open predictions '" + input + "'"};

    PredictionSet set;
    std::vector<std::vector<double>> logits, targets;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("logits") || !j.contains("label"))
            throw DataError{"predictions line " + std::to_string(line_no) + ": expected logits and label"};
        const auto z = j["logits"].get<std::vector<double>>();
        if (z.size() != kNumEmotions)
            throw DataError{"predictions line " + std::to_string(line_no) + ": expected 8 logits"};
        const auto label = emotion_from_string(j["label"].get<std::string>());
        if (!label)
            throw DataError{"predictions line " + std::to_string(line_no) + ": unknown label"};
        set.predictions.push_back(predict_class(z, cfg.loss));
        set.references.push_back(index_of(*label));
        logits.push_back(z);
        if (j.contains("target"))
            targets.push_back(j["target"].get<std::vector<double>>());
    }
    if (set.predictions.empty())
        throw DataError{"no input: predictions file is empty"};

    json out = to_json(evaluate(set));
    if (!targets.empty()) {
        if (targets.size() != logits.size())
            throw DataError{"either every line or no line must carry a target"};
        Eigen::MatrixXd s(static_cast<Eigen::Index>(logits.size()), kNumEmotions);
        Eigen::MatrixXd t(s.rows(), s.cols());
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            for (Eigen::Index k = 0; k < s.cols(); ++k) {
                s(i, k) = logits[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
                t(i, k) = targets[static_cast<std::size_t>(i)].at(static_cast<std::size_t>(k));
            }
        out["mean_pearson"] = mean_pearson(s, t);
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

struct ToyOptions {
    double w_d = kDefaultDomainWeight;
    double lr = 0.1;
    std::size_t epochs = 500;
    std::size_t n = 800;
    std::uint64_t seed = 0;
    std::optional<std::string> trace;
};

int
cmd_toy_train(const ToyOptions &o)
{
    const SyntheticDataset data = make_synthetic_dataset(o.n, o.seed);
    AdversarialConfig cfg;
    cfg.w_d = o.w_d;
    cfg.lr = o.lr;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    const TrainResult r = train_adversarial(data, cfg);
    if (o.trace) {
        std::ofstream f{*o.trace};
        if (!f)
            throw DataError{"cannot write trace '" + *o.trace + "'"};
        r.trace.write_csv(f);
    }
    const EpochStats final_stats = evaluate_model(r.model, data, cfg.w_d);
    const double probe = linear_probe_accuracy(r.model.embed(data.features), data.domain, data.spec.n_domains);
    std::cout << json{{"emotion_accuracy", final_stats.emo_acc},
                      {"domain_head_accuracy", final_stats.dom_acc},
                      {"ce_emo", final_stats.ce_emo},
                      {"ce_dom", final_stats.ce_dom},
                      {"domain_probe_accuracy", probe},
                      {"chance", 1.0 / static_cast<double>(data.spec.n_domains)}}
                     .dump(2)
              << '\n';
    return kOk;
}

int
cmd_golden_check(const std::string &dir, double tolerance)
{
    const GoldenIndex index = load_golden_index(dir);
    const std::vector<FixtureComparison> results = check_goldens(index, tolerance);
    json out = json::array();
    bool all_pass = !results.empty();
    for (const FixtureComparison &c : results) {
        out.push_back(to_json(c));
        all_pass = all_pass && c.pass;
    }
    std::cout << out.dump(2) << '\n';
    return all_pass ? kOk : kData;
}

} // namespace

int
main(int argc, char **argv)
{
    CLI::App app{"emopack: speech emotion corpus-to-feature pipeline"};
    app.require_subcommand(1);
    CommonOptions opts;

    CLI::App *harmonize = app.add_subcommand("harmonize", "Map raw labels onto the canonical emotions");
    CLI::App *smooth = app.add_subcommand("smooth", "Harmonize and apply neutral smoothing");
    CLI::App *pack = app.add_subcommand("pack", "Pack the training split into sequences");
    CLI::App *run = app.add_subcommand("run", "Run the full pipeline");
    for (CLI::App *sub : {harmonize, smooth, pack, run})
        opts.attach(sub);

    std::string input, output;
    CLI::App *augment = app.add_subcommand("augment", "Augment one WAV file");
    opts.attach(augment);
    augment->add_option("input", input, "Input WAV")->required()->check(CLI::ExistingFile);
    augment->add_option("output", output, "Output WAV")->required();

    bool no_pad = false;
    CLI::App *featurize = app.add_subcommand("featurize", "Log-mel features for one WAV file");
    opts.attach(featurize);
    featurize->add_option("input", input, "Input WAV")->required()->check(CLI::ExistingFile);
    featurize->add_option("output", output, "Output feature file")->required();
    featurize->add_flag("--no-pad", no_pad, "Do not pad or trim to the context length");

    CLI::App *eval = app.add_subcommand("eval", "Score predictions");
    opts.attach(eval);
    eval->add_option("predictions", input, "Predictions JSONL")->required()->check(CLI::ExistingFile);

    ToyOptions toy;
    CLI::App *toy_train = app.add_subcommand("toy-train", "Train the synthetic adversarial heads");
    toy_train->add_option("--w-d", toy.w_d, "Domain loss weight");
    toy_train->add_option("--lr", toy.lr, "Learning rate");
    toy_train->add_option("--epochs", toy.epochs, "Epochs");
    toy_train->add_option("--n", toy.n, "Synthetic samples")->check(CLI::Range(100, 10000000));
    toy_train->add_option("--seed", toy.seed, "Seed");
    toy_train->add_option("--trace", toy.trace, "Write the per-epoch trace as CSV");

    std::string golden_dir = "tests/fixtures/golden";
    double tolerance = kParityTolerance;
    CLI::App *golden = app.add_subcommand("golden-check", "Compare the featurizer against golden fixtures");
    golden->add_option("--dir", golden_dir, "Fixture directory");
    golden->add_option("--tolerance", tolerance, "Max abs difference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*harmonize)
            return cmd_harmonize(opts);
        if (*smooth)
            return cmd_smooth(opts);
        if (*pack)
            return cmd_pack(opts);
        if (*run)
            return cmd_run(opts);
        if (*augment)
            return cmd_augment(opts, input, output);
        if (*featurize)
            return cmd_featurize(opts, input, output, !no_pad);
        if (*eval)
            return cmd_eval(opts, input);
        if (*toy_train)
            return cmd_toy_train(toy);
        if (*golden)
            return cmd_golden_check(golden_dir, tolerance);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const InvariantError &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInvariant;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInvariant;
    }
    return kConfig;
}
