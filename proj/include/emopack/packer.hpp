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
#include <span>
#include <string>
#include <vector>

#include "emopack/corpus.hpp"
#include "emopack/rng.hpp"

namespace emopack {

struct PoolEntry {
    std::string id;
    double duration_s = 0.0;
    std::size_t source_index = 0; // index into the list the pool was built from
};

// Samples sorted by duration with per-sample availability. Alive counts over
// duration prefixes are answered by a Fenwick tree, so a draw costs
// O(log n) instead of a scan of the pool.
class SortedPool {
public:
    SortedPool() = default;

    explicit SortedPool(std::vector<PoolEntry> entries);

    std::size_t
    size() const noexcept
    {
        return entries_.size();
    }

    std::size_t
    alive_count() const noexcept
    {
        return alive_count_;
    }

    bool
    is_alive(std::size_t i) const
    {
        return alive_.at(i) != 0;
    }

    const PoolEntry &
    entry(std::size_t i) const
    {
        return entries_.at(i);
    }

    std::span<const double>
    durations() const noexcept
    {
        return durations_;
    }

    // Number of leading entries with duration <= limit (upper bound).
    std::size_t
    fitting_prefix(double limit) const noexcept;

    // Alive entries among the first `prefix` sorted positions.
    std::size_t
    alive_in_prefix(std::size_t prefix) const noexcept;

    // Position of the k-th (0-based) alive entry in sorted order.
    std::size_t
    kth_alive(std::size_t k) const;

    void
    kill(std::size_t i);

    // Marks every entry alive again.
    void
    refresh();

    std::size_t
    refresh_count() const noexcept
    {
        return refresh_count_;
    }

private:
    void
    fenwick_add(std::size_t i, int delta) noexcept;

    std::vector<PoolEntry> entries_;
    std::vector<double> durations_;
    std::vector<std::uint8_t> alive_;
    std::vector<int> tree_;
    std::size_t alive_count_ = 0;
    std::size_t refresh_count_ = 0;
    std::size_t top_bit_ = 0;
};

// Sorts samples[start, end) by duration (stable, so equal durations keep
// input order). Throws std::invalid_argument on an empty or invalid range.
SortedPool
prepare_pool(std::span<const Sample> samples, std::size_t start, std::size_t end);

struct PackerOptions {
    double target_length_s = 30.0;
    double fill_fraction = 0.8;
    // Refresh the pool when fewer than this many alive samples fit the
    // remaining duration at the start of a draw.
    std::size_t refresh_threshold = 1;
};

struct PackedSequence {
    std::vector<std::string> sample_ids;
    std::vector<std::size_t> source_indices;
    std::vector<double> durations_s;
    double total_duration_s = 0.0;
    double target_length_s = 0.0;
    std::size_t refreshes = 0; // pool refreshes that happened while building
};

// Draws samples uniformly among the alive ones that fit the remaining
// duration until the sequence is at least fill_fraction * L long. Throws
// DataError("unsatisfiable") when nothing fits even after a refresh.
PackedSequence
retrieve_sequence(SortedPool &pool, const PackerOptions &opts, Rng &rng);

// Frame-level soft targets for a packed sequence: each member's distribution
// is repeated over its own frames; frames past the last member are padding
// (all-zero target, mask 0).
struct MemberSpan {
    double start_s = 0.0;
    double duration_s = 0.0;
    EmotionDistribution emotion;
};

struct FrameTargets {
    std::vector<EmotionDistribution> targets; // one per frame
    std::vector<std::uint8_t> mask;           // 1 = supervised frame
};

FrameTargets
frame_targets(std::span<const MemberSpan> members, std::size_t n_frames, double frame_hop_s = 0.01);

} // namespace emopack
