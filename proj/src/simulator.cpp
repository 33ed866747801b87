// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "appraisal/random.hpp"

namespace appraisal {

using nlohmann::json;

namespace {

constexpr std::array<std::array<const char*, 2>, 4> kMarkers = {{
    {"famili", "etrange"},
    {"agreable", "penible"},
    {"pratique", "inutile"},
    {"legitime", "choquant"},
}};

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void SimulatorConfig::check() const {
    if (n_projects == 0 || verbatims_per_project == 0 || verbatims_per_post == 0)
        throw std::invalid_argument("simulator sizes must be positive");
    if (n_annotators < 2) throw std::invalid_argument("need at least two annotators");
    if (thresholds.size() != n_annotators)
        throw std::invalid_argument("expected one threshold per annotator (" + std::to_string(n_annotators) + ")");
    for (double t : thresholds) {
        if (!probability(t)) throw std::invalid_argument("annotator thresholds must lie in [0, 1]");
    }
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
    if (!(flip_probability >= 0.0 && flip_probability < 0.5))
        throw std::invalid_argument("flip_probability must lie in [0, 0.5)");
    if (filler_vocabulary == 0 && filler_tokens > 0) throw std::invalid_argument("empty filler vocabulary");
    for (const auto& d : dimensions) {
        if (!probability(d.zero_salience_weight) || !probability(d.positive_probability))
            throw std::invalid_argument("dimension probabilities must lie in [0, 1]");
        if (!(d.salience_a > 0.0 && d.salience_b > 0.0))
            throw std::invalid_argument("salience shape parameters must be positive");
        if (d.positive_marker.empty() || d.negative_marker.empty() || d.positive_marker == d.negative_marker)
            throw std::invalid_argument("each dimension needs two distinct marker tokens");
    }
}

SimulatorConfig SimulatorConfig::defaults() {
    SimulatorConfig c;
    for (std::size_t i = 0; i < 4; ++i) {
        c.dimensions[i].positive_marker = kMarkers[i][0];
        c.dimensions[i].negative_marker = kMarkers[i][1];
    }
    c.thresholds = {0.15, 0.25, 0.35, 0.45, 0.55, 0.65};
    return c;
}

SimulatorConfig SimulatorConfig::campaign_shape() {
    SimulatorConfig c = defaults();
    c.n_projects = 25;
    c.verbatims_per_project = 2000;
    // F, P, U, L
    c.dimensions[0].zero_salience_weight = 0.748;
    c.dimensions[1].zero_salience_weight = 0.62;
    c.dimensions[2].zero_salience_weight = 0.422;
    c.dimensions[3].zero_salience_weight = 0.64;
    c.dimensions[0].positive_probability = 0.68;
    c.dimensions[1].positive_probability = 0.95;
    c.dimensions[2].positive_probability = 0.97;
    c.dimensions[3].positive_probability = 0.97;
    return c;
}

void to_json(json& j, const SimulatorConfig& c) {
    json dims = json::object();
    for (Dimension d : kDimensions) {
        const auto& p = c.dimensions[index_of(d)];
        dims[std::string(dimension_code(d))] = {{"zero_salience_weight", p.zero_salience_weight},
                                                {"salience_a", p.salience_a},
                                                {"salience_b", p.salience_b},
                                                {"positive_probability", p.positive_probability},
                                                {"positive_marker", p.positive_marker},
                                                {"negative_marker", p.negative_marker}};
    }
    j = json{{"law", std::string(kSimulatorLaw)},
             {"n_projects", c.n_projects},
             {"verbatims_per_project", c.verbatims_per_project},
             {"verbatims_per_post", c.verbatims_per_post},
             {"n_annotators", c.n_annotators},
             {"dimensions", dims},
             {"thresholds", c.thresholds},
             {"noise_sigma", c.noise_sigma},
             {"flip_probability", c.flip_probability},
             {"max_markers", c.max_markers},
             {"filler_tokens", c.filler_tokens},
             {"filler_vocabulary", c.filler_vocabulary},
             {"seed", c.seed}};
}

void from_json(const json& j, SimulatorConfig& c) {
    c = SimulatorConfig::defaults();
    if (j.contains("law") && j["law"] != kSimulatorLaw)
        throw std::invalid_argument("unsupported simulator law " + j["law"].dump());
    c.n_projects = j.value("n_projects", c.n_projects);
    c.verbatims_per_project = j.value("verbatims_per_project", c.verbatims_per_project);
    c.verbatims_per_post = j.value("verbatims_per_post", c.verbatims_per_post);
    c.n_annotators = j.value("n_annotators", c.n_annotators);
    c.thresholds = j.value("thresholds", c.thresholds);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.flip_probability = j.value("flip_probability", c.flip_probability);
    c.max_markers = j.value("max_markers", c.max_markers);
    c.filler_tokens = j.value("filler_tokens", c.filler_tokens);
    c.filler_vocabulary = j.value("filler_vocabulary", c.filler_vocabulary);
    c.seed = j.value("seed", c.seed);
    if (auto dims = j.find("dimensions"); dims != j.end()) {
        for (auto it = dims->begin(); it != dims->end(); ++it) {
            auto d = parse_dimension(it.key());
            if (!d) throw std::invalid_argument("unknown dimension \"" + it.key() + "\" in simulator config");
            auto& p = c.dimensions[index_of(*d)];
            const json& v = it.value();
            p.zero_salience_weight = v.value("zero_salience_weight", p.zero_salience_weight);
            p.salience_a = v.value("salience_a", p.salience_a);
            p.salience_b = v.value("salience_b", p.salience_b);
            p.positive_probability = v.value("positive_probability", p.positive_probability);
            p.positive_marker = v.value("positive_marker", p.positive_marker);
            p.negative_marker = v.value("negative_marker", p.negative_marker);
        }
    }
}

ExpectedSoftLabel expected_soft_label(const LatentState& state, const SimulatorConfig& config) {
    if (state.salience <= 0.0) return {};
    if (state.mu == 0.0) throw std::invalid_argument("sign undefined: salient state with zero intensity");
    double p_nonzero = 0.0;
    for (double tau : config.thresholds) {
        if (config.noise_sigma > 0.0)
            p_nonzero += normal_cdf((state.salience - tau) / config.noise_sigma);
        else
            p_nonzero += state.salience > tau ? 1.0 : 0.0;
    }
    p_nonzero /= static_cast<double>(config.thresholds.size());

    const double rho = config.flip_probability;
    ExpectedSoftLabel e;
    const double same = p_nonzero * (1.0 - rho);
    const double flipped = p_nonzero * rho;
    if (state.mu > 0.0) {
        e.p_pos = same;
        e.p_neg = flipped;
    } else {
        e.p_neg = same;
        e.p_pos = flipped;
    }
    e.p_zero = 1.0 - e.p_pos - e.p_neg;
    return e;
}

namespace {

std::string filler_word(std::uint64_t index) {
    // base-26 digits behind an "x" prefix, so fillers never collide with markers
    std::string word = "x";
    do {
        word += static_cast<char>('a' + index % 26);
        index /= 26;
    } while (index > 0);
    return word;
}

}  // namespace

Simulation generate(const SimulatorConfig& config) {
    config.check();
    Rng latent(derive_seed(config.seed, "simulator.latent"));
    Rng annotate(derive_seed(config.seed, "simulator.annotate"));
    Rng text(derive_seed(config.seed, "simulator.text"));

    Simulation sim;
    Corpus& corpus = sim.corpus;
    std::vector<std::string> annotators;
    for (std::uint32_t j = 0; j < config.n_annotators; ++j) annotators.push_back(fmt::format("A{:02d}", j + 1));
    corpus.annotators.insert(annotators.begin(), annotators.end());

    for (std::uint32_t p = 0; p < config.n_projects; ++p) {
        const std::string project_id = fmt::format("P{:02d}", p + 1);
        corpus.projects.push_back({project_id, fmt::format("Simulated project {:02d}", p + 1)});

        for (std::uint32_t i = 0; i < config.verbatims_per_project; ++i) {
            const std::uint32_t post = i / config.verbatims_per_post;
            const std::string post_id = fmt::format("{}-T{:04d}", project_id, post + 1);
            if (i % config.verbatims_per_post == 0)
                corpus.posts.push_back({post_id, project_id, fmt::format("{}-U{:04d}", project_id, post + 1)});

            Verbatim v;
            v.id = fmt::format("{}-V{:05d}", project_id, i + 1);
            v.project_id = project_id;
            v.post_id = post_id;
            v.position = i % config.verbatims_per_post;

            std::array<TruthEntry, 4> truth{};
            std::vector<std::string> tokens;
            for (Dimension d : kDimensions) {
                const auto& profile = config.dimensions[index_of(d)];
                // fixed number of draws per cell keeps streams aligned across configs
                const bool silent = latent.bernoulli(profile.zero_salience_weight);
                const double s_draw = latent.kumaraswamy(profile.salience_a, profile.salience_b);
                const bool positive = latent.bernoulli(profile.positive_probability);
                const double magnitude = latent.uniform(0.05, 1.0);

                LatentState state;
                state.salience = silent ? 0.0 : std::clamp(s_draw, 1e-9, 1.0);
                state.mu = positive ? magnitude : -magnitude;
                truth[index_of(d)] = {state, expected_soft_label(state, config)};

                for (std::uint32_t j = 0; j < config.n_annotators; ++j) {
                    const double eps = config.noise_sigma * annotate.normal();
                    const bool flip = annotate.uniform() < config.flip_probability;
                    int value = 0;
                    if (state.salience > 0.0 && state.salience + eps > config.thresholds[j]) {
                        value = state.mu > 0.0 ? 1 : -1;
                        if (flip) value = -value;
                    }
                    corpus.records.push_back({v.id, annotators[j], d, AnnotationValue(value)});
                }

                if (state.salience > 0.0) {
                    const auto count = static_cast<std::uint32_t>(
                        std::ceil(state.salience * static_cast<double>(config.max_markers)));
                    const std::string& marker = positive ? profile.positive_marker : profile.negative_marker;
                    for (std::uint32_t k = 0; k < count; ++k) tokens.push_back(marker);
                }
            }
            for (std::uint32_t k = 0; k < config.filler_tokens; ++k)
                tokens.push_back(filler_word(text.below(config.filler_vocabulary)));
            text.shuffle(std::span<std::string>(tokens));
            for (std::size_t k = 0; k < tokens.size(); ++k) {
                if (k > 0) v.text += ' ';
                v.text += tokens[k];
            }

            sim.truth.entries.emplace(v.id, truth);
            corpus.verbatims.push_back(std::move(v));
        }
    }
    return sim;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    for (const auto& [id, dims] : truth.entries) {
        for (Dimension d : kDimensions) {
            const auto& t = dims[index_of(d)];
            out << json{{"verbatim_id", id},
                        {"dimension", std::string(dimension_code(d))},
                        {"mu", t.state.mu},
                        {"salience", t.state.salience},
                        {"expected", {t.expected.p_neg, t.expected.p_zero, t.expected.p_pos}},
                        {"law", std::string(kSimulatorLaw)}}
                       .dump()
                << '\n';
        }
    }
}

}  // namespace appraisal
