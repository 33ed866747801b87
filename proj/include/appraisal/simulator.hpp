// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Generative annotator model ("threshold-noise" law).
//
// Each (verbatim, dimension) carries a latent signed intensity mu and a
// salience s. Annotator j marks the dimension iff s > 0 and s + eps_j > tau_j,
// eps_j ~ N(0, sigma^2); the mark is sign(mu), flipped with probability rho.
// Text is a bag of marker tokens (identity = dimension and sign of mu, count
// = ceil(s * max_markers)) mixed with filler tokens.
//
// This is one concrete instantiation of "annotations follow a stable
// probabilistic gradient"; it is not fitted to any real corpus.

#ifndef APPRAISAL_SIMULATOR_HPP
#define APPRAISAL_SIMULATOR_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "appraisal/corpus.hpp"

namespace appraisal {

inline constexpr std::string_view kSimulatorLaw = "threshold-noise/v1";

struct DimensionProfile {
    double zero_salience_weight = 0.3;  // P(s = 0)
    double salience_a = 2.0;            // Kumaraswamy shape of s on (0, 1]
    double salience_b = 2.0;
    double positive_probability = 0.8;  // P(mu > 0)
    std::string positive_marker;
    std::string negative_marker;
};

struct SimulatorConfig {
    std::uint32_t n_projects = 21;
    std::uint32_t verbatims_per_project = 200;
    std::uint32_t verbatims_per_post = 3;
    std::uint32_t n_annotators = 6;
    std::array<DimensionProfile, 4> dimensions;
    std::vector<double> thresholds;  // tau_j, one per annotator
    double noise_sigma = 0.03;
    double flip_probability = 0.0;
    std::uint32_t max_markers = 8;
    std::uint32_t filler_tokens = 8;
    std::uint32_t filler_vocabulary = 200;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on out-of-range fields.
    void check() const;

    static SimulatorConfig defaults();
    /// Tuned so corpus-level shares resemble the reference annotation campaign.
    static SimulatorConfig campaign_shape();
};

void to_json(nlohmann::json& j, const SimulatorConfig& c);
/// Missing keys keep their defaults() values.
void from_json(const nlohmann::json& j, SimulatorConfig& c);

struct LatentState {
    double mu = 0.0;        // [-1, 1]
    double salience = 0.0;  // [0, 1]
};

/// Expectation-form soft label: probabilities, not counts.
struct ExpectedSoftLabel {
    double p_neg = 0.0;
    double p_zero = 1.0;
    double p_pos = 0.0;
    double mean() const noexcept { return p_pos - p_neg; }
};

/// Closed-form vote distribution under the law, averaged over annotators.
/// Throws std::invalid_argument("sign undefined") for mu == 0 with s > 0.
ExpectedSoftLabel expected_soft_label(const LatentState& state, const SimulatorConfig& config);

struct TruthEntry {
    LatentState state;
    ExpectedSoftLabel expected;
};

struct GroundTruth {
    std::map<std::string, std::array<TruthEntry, 4>> entries;  // by verbatim id

    const TruthEntry& at(const std::string& verbatim_id, Dimension d) const {
        return entries.at(verbatim_id)[index_of(d)];
    }
};

struct Simulation {
    Corpus corpus;
    GroundTruth truth;
};

/// Deterministic in config.seed. Every annotator judges every verbatim on
/// every dimension.
Simulation generate(const SimulatorConfig& config);

/// One line per (verbatim, dimension):
/// {"verbatim_id","dimension","mu","salience","expected":[p_neg,p_zero,p_pos],"law"}
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

}  // namespace appraisal

#endif  // APPRAISAL_SIMULATOR_HPP
