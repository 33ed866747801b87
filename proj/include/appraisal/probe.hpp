// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Three-class linear softmax head trained on soft vote proportions.
//
// Classes are ordered (neg, zero, pos). The continuous prediction used for
// gradient-level evaluation is q_pos - q_neg.

#ifndef APPRAISAL_PROBE_HPP
#define APPRAISAL_PROBE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "appraisal/aggregate.hpp"
#include "appraisal/corpus.hpp"
#include "appraisal/features.hpp"

namespace appraisal {

inline constexpr std::size_t kClasses = 3;
using Distribution = std::array<double, kClasses>;

struct TrainConfig {
    double learning_rate = 0.1;
    std::uint32_t epochs = 200;
    double l2_lambda = 1e-4;
    std::uint32_t batch_size = 64;
    std::uint64_t seed = 0;
    /// Stop once the epoch loss moved by less than this (relative) over the last 10 epochs.
    double early_stop_tol = 1e-6;

    /// Throws std::invalid_argument unless every field but seed/epochs is positive.
    void check() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct ProbeModel {
    Dimension dimension = Dimension::Familiarity;
    std::uint32_t d = 0;
    std::vector<double> weights;  // d x 3, row-major: weights[j * 3 + c]
    Distribution bias{};

    TrainConfig config;
    std::uint32_t epochs_run = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    /// Featurizer identity ("fnv1a64-char-ngram/v1 ..." or "embeddings").
    std::string feature_source;

    static ProbeModel zeros(Dimension dimension, std::uint32_t d);

    double weight(std::uint32_t j, std::size_t c) const { return weights[j * kClasses + c]; }
};

/// One training row: features and a target distribution (neg, zero, pos).
struct TrainingExample {
    const FeatureVector* features = nullptr;
    Distribution target{};
};

struct ProbeGradient {
    std::vector<double> weights;
    Distribution bias{};
};

/// Mean soft-target cross-entropy over `batch` plus l2_lambda * ||W||^2.
/// Fills `gradient` (dense) when non-null.
double probe_objective(const ProbeModel& model, std::span<const TrainingExample> batch, double l2_lambda,
                       ProbeGradient* gradient = nullptr);

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mini-batch gradient descent from zero weights, on the ids present in both
/// maps. Identical inputs and seed give a bit-identical model.
/// Throws TrainingError on an empty intersection or a non-finite loss.
ProbeModel train_probe(Dimension dimension, const FeatureMap& features, const SoftLabelMap& labels,
                       const TrainConfig& config);

/// Throws std::invalid_argument if x has the wrong dimensionality.
Distribution predict_dist(const ProbeModel& model, const FeatureVector& x);
double predict_value(const ProbeModel& model, const FeatureVector& x);

Distribution softmax(const Distribution& logits) noexcept;

nlohmann::json model_to_json(const ProbeModel& model);
ProbeModel model_from_json(const nlohmann::json& j);

}  // namespace appraisal

#endif  // APPRAISAL_PROBE_HPP
