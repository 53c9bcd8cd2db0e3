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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace oracle {
namespace fs = std::filesystem;

TempDir::TempDir(const std::string &tag)
{
    std::string pattern = (fs::temp_directory_path() / ("emopack-" + tag + "-XXXXXX")).string();
    if (!::mkdtemp(pattern.data()))
        throw std::runtime_error{"mkdtemp failed"};
    path_ = pattern;
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::array<double, 8>
smooth_formula(const std::array<double, 8> &e, double mean_intensity, double cap)
{
    double intensity = 0.0;
    for (double v : e)
        intensity += v;
    double alpha = 0.0;
    if (intensity < mean_intensity)
        alpha = std::min(std::abs(mean_intensity - intensity) / mean_intensity, cap);
    std::array<double, 8> out{};
    for (std::size_t j = 0; j < 8; ++j)
        out[j] = e[j] * (1.0 - alpha) + (1.0 - e[j]) * alpha / 8.0;
    return out;
}

NaivePacker::NaivePacker(std::vector<double> durations)
    : durations_(std::move(durations)), alive_(durations_.size(), true)
{
    order_.resize(durations_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return durations_[a] < durations_[b]; });
}

NaivePacked
NaivePacker::retrieve(double length, double fill_fraction, std::size_t threshold, emopack::Rng &rng)
{
    NaivePacked out;
    bool just_refreshed = false;
    while (out.total < fill_fraction * length) {
        const double remaining = length - out.total;
        std::vector<std::size_t> candidates;
        for (std::size_t pos : order_)
            if (durations_[pos] <= remaining && alive_[pos])
                candidates.push_back(pos);
        if (candidates.size() < threshold && !(just_refreshed && !candidates.empty())) {
            if (just_refreshed)
                throw std::runtime_error{"unsatisfiable"};
            std::fill(alive_.begin(), alive_.end(), true);
            ++out.refreshes;
            just_refreshed = true;
            continue;
        }
        just_refreshed = false;
        const std::size_t pick = candidates[rng.uniform_index(candidates.size())];
        alive_[pick] = false;
        out.picks.push_back(pick);
        out.total += durations_[pick];
    }
    return out;
}

std::vector<ClassCounts>
count_by_class(const std::vector<std::size_t> &pred, const std::vector<std::size_t> &ref, std::size_t k)
{
    std::vector<ClassCounts> c(k);
    for (std::size_t cls = 0; cls < k; ++cls)
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const bool p = pred[i] == cls, r = ref[i] == cls;
            c[cls].tp += p && r;
            c[cls].fp += p && !r;
            c[cls].fn += !p && r;
        }
    return c;
}

std::vector<std::optional<double>>
brute_force_f1(const std::vector<std::size_t> &pred, const std::vector<std::size_t> &ref, std::size_t k)
{
    std::vector<std::optional<double>> out(k);
    const auto counts = count_by_class(pred, ref, k);
    for (std::size_t cls = 0; cls < k; ++cls) {
        const ClassCounts &c = counts[cls];
        if (c.tp + c.fp + c.fn == 0)
            continue;
        out[cls] = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    }
    return out;
}

double
two_pass_pearson(const std::vector<double> &x, const std::vector<double> &y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double>
central_difference(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x,
                   double h)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        auto at = [&](double offset) {
            x[i] = keep + offset;
            return f(x);
        };
        g[i] = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        x[i] = keep;
    }
    return g;
}

namespace {

double
hz_to_mel(double hz)
{
    const double f_sp = 200.0 / 3.0, min_log_hz = 1000.0, logstep = std::log(6.4) / 27.0;
    const double min_log_mel = min_log_hz / f_sp;
    return hz < min_log_hz ? hz / f_sp : min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double
mel_to_hz(double mel)
{
    const double f_sp = 200.0 / 3.0, min_log_hz = 1000.0, logstep = std::log(6.4) / 27.0;
    const double min_log_mel = min_log_hz / f_sp;
    return mel < min_log_mel ? mel * f_sp : min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

} // namespace

std::vector<double>
naive_log_mel(const std::vector<float> &x, std::size_t &n_frames)
{
    constexpr std::size_t n_fft = 400, hop = 160, n_mels = 80, n_bins = n_fft / 2 + 1;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t pad = n_fft / 2;
    auto sample = [&](std::ptrdiff_t i) {
        if (i < 0)
            i = -i;
        if (i >= n)
            i = 2 * (n - 1) - i;
        return static_cast<double>(x[static_cast<std::size_t>(i)]);
    };

    // Triangles between consecutive mel points, areas normalized (Slaney).
    std::vector<double> points(n_mels + 2);
    const double lo = hz_to_mel(0.0), hi = hz_to_mel(8000.0);
    for (std::size_t m = 0; m < points.size(); ++m)
        points[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(n_mels + 1));
    std::vector<double> fb(n_mels * n_bins, 0.0);
    for (std::size_t m = 0; m < n_mels; ++m)
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double f = 8000.0 * static_cast<double>(b) / static_cast<double>(n_bins - 1);
            const double rise = (f - points[m]) / (points[m + 1] - points[m]);
            const double fall = (points[m + 2] - f) / (points[m + 2] - points[m + 1]);
            fb[m * n_bins + b] = std::max(0.0, std::min(rise, fall)) * 2.0 / (points[m + 2] - points[m]);
        }

    const std::size_t total_frames = 1 + static_cast<std::size_t>((n + 2 * pad - static_cast<std::ptrdiff_t>(n_fft)) /
                                                                  static_cast<std::ptrdiff_t>(hop));
    n_frames = total_frames - 1;
    std::vector<double> out(n_mels * n_frames);
    std::vector<double> power(n_bins);
    for (std::size_t t = 0; t < n_frames; ++t) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t k = 0; k < n_fft; ++k) {
                const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / n_fft);
                const double v = w * sample(static_cast<std::ptrdiff_t>(t * hop + k) - pad);
                acc += v * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(b * k % n_fft) / n_fft);
            }
            power[b] = std::norm(acc);
        }
        for (std::size_t m = 0; m < n_mels; ++m) {
            double e = 0.0;
            for (std::size_t b = 0; b < n_bins; ++b)
                e += fb[m * n_bins + b] * power[b];
            out[m * n_frames + t] = std::log10(std::max(e, 1e-10));
        }
    }
    const double peak = *std::max_element(out.begin(), out.end());
    for (double &v : out)
        v = (std::max(v, peak - 8.0) + 4.0) / 4.0;
    return out;
}

std::array<double, 5>
rbj_peaking(double f0, double gain_db, double q, double fs)
{
    const double a = std::pow(10.0, gain_db / 40.0);
    const double w0 = 2.0 * std::numbers::pi * f0 / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha / a;
    return {(1.0 + alpha * a) / a0, -2.0 * std::cos(w0) / a0, (1.0 - alpha * a) / a0, -2.0 * std::cos(w0) / a0,
            (1.0 - alpha / a) / a0};
}

std::vector<double>
biquad_filter(const std::array<double, 5> &c, const std::vector<float> &x)
{
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x1 = i >= 1 ? x[i - 1] : 0.0, x2 = i >= 2 ? x[i - 2] : 0.0;
        const double y1 = i >= 1 ? y[i - 1] : 0.0, y2 = i >= 2 ? y[i - 2] : 0.0;
        y[i] = c[0] * x[i] + c[1] * x1 + c[2] * x2 - c[3] * y1 - c[4] * y2;
    }
    return y;
}

fs::path
write_synthetic_corpus(const fs::path &dir, const CorpusSpec &spec)
{
    fs::create_directories(dir / "audio");
    emopack::Rng rng{spec.seed};
    const std::array<std::uint32_t, 3> rates{16000, 22050, 8000};
    const std::array<const char *, 6> labels{"happiness", "sadness", "anger", "contempt", "fear", "neutral"};
    std::ofstream manifest{dir / "manifest.jsonl"};
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::uint32_t rate = rates[i % rates.size()];
        const double seconds = rng.uniform(2.0, 9.0);
        emopack::Waveform w;
        w.sample_rate_hz = rate;
        w.samples.resize(static_cast<std::size_t>(seconds * rate));
        const double f = rng.uniform(120.0, 900.0);
        for (std::size_t k = 0; k < w.samples.size(); ++k)
            w.samples[k] = static_cast<float>(0.3 * std::sin(2.0 * std::numbers::pi * f * k / rate) +
                                              0.02 * rng.normal());
        const std::string name = "utt" + std::to_string(i) + ".wav";
        emopack::write_wav(dir / "audio" / name, w,
                           i % 2 == 0 ? emopack::WavEncoding::pcm16 : emopack::WavEncoding::float32);

        nlohmann::json lab = nlohmann::json::object();
        lab[labels[i % labels.size()]] = rng.uniform(0.2, 1.0);
        if (i % 3 == 0)
            lab[labels[(i + 1) % labels.size()]] = rng.uniform(0.0, 0.3);
        const nlohmann::json line{{"id", "s" + std::to_string(i)},
                                  {"audio_path", "audio/" + name},
                                  {"dataset", i < spec.n / 2 ? "alpha" : "beta"},
                                  {"speaker", "spk" + std::to_string(i % 4)},
                                  {"language", i % 2 == 0 ? "en" : "de"},
                                  {"duration_s", w.duration_s()},
                                  {"labels", lab}};
        manifest << line.dump() << '\n';
    }
    return dir / "manifest.jsonl";
}

std::string
read_bytes(const fs::path &path)
{
    std::ifstream f{path, std::ios::binary};
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::map<std::string, std::string>
snapshot(const fs::path &dir)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            out[fs::relative(e.path(), dir).string()] = read_bytes(e.path());
    return out;
}

int
run_cli(const std::string &args, const fs::path &log)
{
    const std::string cmd = std::string{EMOPACK_CLI_PATH} + " " + args + " >'" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path
fixture_dir()
{
    return EMOPACK_FIXTURE_DIR;
}

} // namespace oracle
