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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace emopack {

// Random source with platform-independent output. The engine is the
// standard-specified mt19937_64; the distributions are written out here
// because the <random> distribution algorithms are implementation defined
// and we need identical streams on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : engine_{seed} {}

    std::uint64_t
    next_u64() noexcept
    {
        return engine_();
    }

    // Uniform on [0, 1).
    double
    uniform() noexcept
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double
    uniform(double lo, double hi) noexcept
    {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t
    uniform_index(std::uint64_t n) noexcept
    {
        // Lemire-style rejection keeps the draw unbiased.
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold)
                return r % n;
        }
    }

    bool
    bernoulli(double p) noexcept
    {
        return uniform() < p;
    }

    // Standard normal via Box-Muller; one draw consumes two engine outputs.
    double
    normal() noexcept
    {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t
splitmix64(std::uint64_t x) noexcept;

// Stable stream key: mixes a global seed with a string key (usually a sample
// or sequence id) and a small integer tag (usually an effect index). Never
// depends on thread identity.
std::uint64_t
derive_seed(std::uint64_t global_seed, std::string_view key, std::uint64_t tag = 0) noexcept;

} // namespace emopack
