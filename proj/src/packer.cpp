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

#include "emopack/packer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "emopack/error.hpp"

namespace emopack {

SortedPool::SortedPool(std::vector<PoolEntry> entries) : entries_{std::move(entries)}
{
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const PoolEntry &a, const PoolEntry &b) { return a.duration_s < b.duration_s; });

    durations_.reserve(entries_.size());
    for (const PoolEntry &e : entries_)
        durations_.push_back(e.duration_s);

    top_bit_ = entries_.empty() ? 0 : std::bit_floor(entries_.size());
    alive_.assign(entries_.size(), 0);
    tree_.assign(entries_.size() + 1, 0);
    refresh();
    refresh_count_ = 0;
}

void
SortedPool::fenwick_add(std::size_t i, int delta) noexcept
{
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1))
        tree_[k] += delta;
}

std::size_t
SortedPool::fitting_prefix(double limit) const noexcept
{
    return static_cast<std::size_t>(std::upper_bound(durations_.begin(), durations_.end(), limit) -
                                    durations_.begin());
}

std::size_t
SortedPool::alive_in_prefix(std::size_t prefix) const noexcept
{
    long sum = 0;
    for (std::size_t k = std::min(prefix, entries_.size()); k > 0; k -= k & (~k + 1))
        sum += tree_[k];
    return static_cast<std::size_t>(sum);
}

std::size_t
SortedPool::kth_alive(std::size_t k) const
{
    if (k >= alive_count_)
        throw std::out_of_range{"kth_alive: rank beyond alive count"};

    // Fenwick descent: find the smallest position whose prefix count is k+1.
    std::size_t pos = 0;
    long remaining = static_cast<long>(k) + 1;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
        std::size_t next = pos + step;
        if (next < tree_.size() && tree_[next] < remaining) {
            pos = next;
            remaining -= tree_[next];
        }
    }
    return pos; // 1-based pos+1 holds the entry, i.e. 0-based index pos
}

void
SortedPool::kill(std::size_t i)
{
    if (alive_.at(i) == 0)
        throw InvariantError{"pool entry " + std::to_string(i) + " is already consumed"};
    alive_[i] = 0;
    --alive_count_;
    fenwick_add(i, -1);
}

void
SortedPool::refresh()
{
    std::fill(alive_.begin(), alive_.end(), std::uint8_t{1});
    // Linear-time Fenwick construction over an all-ones array.
    std::fill(tree_.begin(), tree_.end(), 0);
    for (std::size_t k = 1; k < tree_.size(); ++k) {
        tree_[k] += 1;
        std::size_t parent = k + (k & (~k + 1));
        if (parent < tree_.size())
            tree_[parent] += tree_[k];
    }
    alive_count_ = entries_.size();
    ++refresh_count_;
}

SortedPool
prepare_pool(std::span<const Sample> samples, std::size_t start, std::size_t end)
{
    if (start >= end || end > samples.size())
        throw std::invalid_argument{"prepare_pool: empty or invalid range [" +
                                    std::to_string(start) + ", " + std::to_string(end) +
                                    ") over " + std::to_string(samples.size()) + " samples"};

    std::vector<PoolEntry> entries;
    entries.reserve(end - start);
    for (std::size_t i = start; i < end; ++i)
        entries.push_back({samples[i].id, samples[i].duration_s, i});

    return SortedPool{std::move(entries)};
}

PackedSequence
retrieve_sequence(SortedPool &pool, const PackerOptions &opts, Rng &rng)
{
    const double length = opts.target_length_s;
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument{"target length must be positive"};
    if (!(opts.fill_fraction > 0.0 && opts.fill_fraction <= 1.0))
        throw std::invalid_argument{"fill fraction must lie in (0, 1]"};
    if (opts.refresh_threshold == 0)
        throw std::invalid_argument{"refresh threshold must be at least 1"};
    if (pool.size() == 0)
        throw DataError{"unsatisfiable: the sample pool is empty"};

    PackedSequence seq;
    seq.target_length_s = length;

    const double fill = opts.fill_fraction * length;
    double cumulative = 0.0;
    bool just_refreshed = false;

    while (cumulative < fill) {
        const double remaining = length - cumulative;
        const std::size_t prefix = pool.fitting_prefix(remaining);
        const std::size_t candidates = pool.alive_in_prefix(prefix);

        if (candidates < opts.refresh_threshold && !(just_refreshed && candidates > 0)) {
            if (just_refreshed)
                throw DataError{"unsatisfiable: no sample fits the remaining " +
                                std::to_string(remaining) + " s of a " + std::to_string(length) +
                                " s sequence even after refreshing the pool"};
            pool.refresh();
            ++seq.refreshes;
            just_refreshed = true;
            continue;
        }
        just_refreshed = false;

        const std::size_t pos = pool.kth_alive(static_cast<std::size_t>(rng.uniform_index(candidates)));
        const PoolEntry &picked = pool.entry(pos);
        pool.kill(pos);

        cumulative += picked.duration_s;
        seq.sample_ids.push_back(picked.id);
        seq.source_indices.push_back(picked.source_index);
        seq.durations_s.push_back(picked.duration_s);
    }

    seq.total_duration_s = cumulative;
    return seq;
}

FrameTargets
frame_targets(std::span<const MemberSpan> members, std::size_t n_frames, double frame_hop_s)
{
    FrameTargets out;
    out.targets.assign(n_frames, EmotionDistribution{});
    out.mask.assign(n_frames, 0);

    for (const MemberSpan &m : members) {
        auto first = static_cast<std::size_t>(std::llround(m.start_s / frame_hop_s));
        auto last = static_cast<std::size_t>(std::llround((m.start_s + m.duration_s) / frame_hop_s));
        last = std::min(last, n_frames);
        for (std::size_t t = first; t < last; ++t) {
            out.targets[t] = m.emotion;
            out.mask[t] = 1;
        }
    }

    return out;
}

} // namespace emopack
