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
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "emopack/error.hpp"

namespace emopack {

// Synthetic stand-in for encoder features: an emotion block, a domain block
// and isotropic nuisance dimensions. The emotion and domain blocks are
// one-hot class centroids with bounded uniform jitter, so each block is
// linearly separable on its own.
struct SyntheticSpec {
    std::size_t n_emotions = 4;
    std::size_t n_domains = 4;
    std::size_t nuisance_dims = 4;
    double emotion_separation = 1.0;
    double domain_separation = 1.0;
    double jitter = 0.15;
};

struct SyntheticDataset {
    Eigen::MatrixXd features; // rows = samples
    std::vector<std::size_t> emotion;
    std::vector<std::size_t> domain;
    SyntheticSpec spec;

    std::size_t
    size() const noexcept
    {
        return emotion.size();
    }

    Eigen::Index
    emotion_offset() const noexcept
    {
        return 0;
    }

    Eigen::Index
    domain_offset() const noexcept
    {
        return static_cast<Eigen::Index>(spec.n_emotions);
    }

    Eigen::Index
    nuisance_offset() const noexcept
    {
        return static_cast<Eigen::Index>(spec.n_emotions + spec.n_domains);
    }
};

// Throws std::invalid_argument for n < 100.
SyntheticDataset
make_synthetic_dataset(std::size_t n, std::uint64_t seed, const SyntheticSpec &spec = {});

struct LinearHead {
    Eigen::MatrixXd weights; // classes x inputs
    Eigen::VectorXd bias;

    Eigen::MatrixXd
    logits(const Eigen::MatrixXd &inputs) const
    {
        return (inputs * weights.transpose()).rowwise() + bias.transpose();
    }
};

struct AdversarialModel {
    Eigen::MatrixXd trunk; // shared_dim x features
    LinearHead emotion_head;
    LinearHead domain_head;

    Eigen::MatrixXd
    embed(const Eigen::MatrixXd &features) const
    {
        return features * trunk.transpose();
    }
};

struct AdversarialConfig {
    double w_d = 0.01;
    double lr = 0.1;
    std::size_t epochs = 500;
    std::size_t shared_dim = 0; // 0 = emotion + domain block widths
    double nuisance_mix = 0.3;  // scale of the nuisance columns at init
    std::uint64_t seed = 0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double emo_acc = 0.0;
    double dom_acc = 0.0;
    double ce_emo = 0.0;
    double ce_dom = 0.0;
    double total = 0.0;
};

struct TrainTrace {
    std::vector<EpochStats> epochs;

    void
    write_csv(std::ostream &out) const;
};

struct TrainResult {
    AdversarialModel model;
    TrainTrace trace;
};

class DivergenceError : public InvariantError {
public:
    DivergenceError(std::size_t epoch, const std::string &what)
        : InvariantError{"training diverged at epoch " + std::to_string(epoch) + ": " + what},
          epoch_{epoch}
    {}

    std::size_t
    epoch() const noexcept
    {
        return epoch_;
    }

private:
    std::size_t epoch_;
};

// Trunk initialized to pass the emotion and domain blocks through unchanged
// plus a random nuisance mix, heads at zero.
AdversarialModel
init_model(const SyntheticDataset &data, const AdversarialConfig &cfg);

// Full-batch gradient descent on CE_emo - w_d * CE_dom. The domain head
// descends on CE_dom; the trunk receives the emotion gradient plus the
// reversed, w_d-scaled domain gradient. Per-sample gradients come from
// combined_loss.
TrainResult
train_adversarial(const SyntheticDataset &data, const AdversarialConfig &cfg);

// Trunk gradient split into the emotion branch and the (already reversed)
// domain branch, averaged over the dataset.
struct TrunkGradients {
    Eigen::MatrixXd from_emotion;
    Eigen::MatrixXd from_domain;
};

TrunkGradients
trunk_gradients(const AdversarialModel &model, const SyntheticDataset &data, double w_d);

EpochStats
evaluate_model(const AdversarialModel &model, const SyntheticDataset &data, double w_d);

// Fresh multinomial logistic-regression probe: standardized inputs, fit on
// the first half of the rows, accuracy reported on the second half.
double
linear_probe_accuracy(const Eigen::MatrixXd &inputs, const std::vector<std::size_t> &labels,
                      std::size_t n_classes, std::size_t steps = 300, double lr = 0.5);

} // namespace emopack
