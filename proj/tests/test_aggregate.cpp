// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include <doctest.h>

#include <algorithm>

#include "appraisal/aggregate.hpp"
#include "appraisal/simulator.hpp"
#include "support.hpp"

using namespace appraisal;
using appraisal::testing::CorpusBuilder;

TEST_CASE("aggregate: six-annotator legitimacy levels") {
    CorpusBuilder b;
    b.verbatim("six").votes("six", Dimension::Legitimacy, {1, 1, 1, 1, 1, 1});
    b.verbatim("five").votes("five", Dimension::Legitimacy, {1, 1, 0, 1, 1, 1});
    b.verbatim("three").votes("three", Dimension::Legitimacy, {0, 1, 0, 1, 0, 1});
    const auto labels = aggregate(b.build(), Dimension::Legitimacy);

    CHECK(labels.at("six") == SoftLabel(0, 0, 6));
    CHECK(mean_value(labels.at("six")) == 1.0);
    CHECK(std::abs(mean_value(labels.at("five")) - 5.0 / 6.0) < 1e-12);
    CHECK(mean_value(labels.at("three")) == 0.5);
    CHECK(labels.at("five").m() == 6);
}

TEST_CASE("aggregate omits verbatims without records and counts only present ones") {
    CorpusBuilder b;
    b.verbatim("a").votes("a", Dimension::Utility, {1, std::nullopt, -1});
    b.verbatim("b");
    const auto labels = aggregate(b.build(), Dimension::Utility);
    CHECK(labels.size() == 1);
    CHECK(labels.at("a").m() == 2);
    CHECK(labels.at("a").p_pos() == 0.5);
}

TEST_CASE("mean_value") {
    CHECK(mean_value(SoftLabel(0, 6, 0)) == 0.0);
    CHECK(mean_value(SoftLabel(1, 4, 1)) == 0.0);
    CHECK(std::abs(mean_value(SoftLabel(0, 1, 5)) - 0.8333333333333334) < 1e-15);
    CHECK_THROWS(SoftLabel(0, 0, 0));
}

TEST_CASE("soft label invariants hold on simulated data") {
    SimulatorConfig cfg = SimulatorConfig::defaults();
    cfg.n_projects = 3;
    cfg.verbatims_per_project = 40;
    const Corpus c = generate(cfg).corpus;
    for (Dimension d : kDimensions) {
        const auto labels = aggregate(c, d);
        std::size_t votes = 0;
        for (const auto& [id, l] : labels) {
            CHECK(std::abs(l.p_neg() + l.p_zero() + l.p_pos() - 1.0) < 1e-12);
            CHECK(std::abs(mean_value(l)) <= l.p_pos() + l.p_neg());
            votes += l.m();
        }
        const auto records = std::count_if(c.records.begin(), c.records.end(),
                                           [&](const AnnotationRecord& r) { return r.dimension == d; });
        CHECK(votes == static_cast<std::size_t>(records));
    }
}

TEST_CASE("gradient_histogram") {
    SUBCASE("one verbatim per level 6/6 .. 1/6") {
        CorpusBuilder b;
        for (int k = 1; k <= 6; ++k) {
            const std::string id = "v" + std::to_string(k);
            std::vector<std::optional<int>> votes(6, 0);
            for (int j = 0; j < k; ++j) votes[j] = 1;
            b.verbatim(id).votes(id, Dimension::Legitimacy, votes);
        }
        const auto h = gradient_histogram(b.build(), Dimension::Legitimacy);
        CHECK(h.m == 6);
        CHECK(h.counts.size() == 13);
        for (int k = -6; k <= 6; ++k) CHECK(h.at_level(k) == (k >= 1 ? 1u : 0u));
    }
    SUBCASE("all zero corpus puts everything at level 0") {
        CorpusBuilder b;
        for (int k = 0; k < 5; ++k) {
            const std::string id = "v" + std::to_string(k);
            b.verbatim(id).votes(id, Dimension::Utility, {0, 0, 0});
        }
        const auto h = gradient_histogram(b.build(), Dimension::Utility);
        CHECK(h.at_level(0) == 5);
    }
    SUBCASE("mixed annotator counts are rejected") {
        CorpusBuilder b;
        b.verbatim("a").votes("a", Dimension::Utility, {0, 0, 0});
        b.verbatim("b").votes("b", Dimension::Utility, {0, 1});
        CHECK_THROWS_AS(gradient_histogram(b.build(), Dimension::Utility), MixedAnnotatorCountError);
    }
    SUBCASE("simulated corpus matches a direct recount of its records") {
        SimulatorConfig cfg = SimulatorConfig::defaults();
        cfg.n_projects = 2;
        cfg.verbatims_per_project = 60;
        const Corpus c = generate(cfg).corpus;
        for (Dimension d : kDimensions) {
            std::map<std::string, int> level;
            for (const auto& r : c.records) {
                if (r.dimension == d) level[r.verbatim_id] += r.value.value();
            }
            std::vector<std::size_t> expected(13, 0);
            for (const auto& [id, k] : level) ++expected[static_cast<std::size_t>(k + 6)];
            CHECK(gradient_histogram(c, d).counts == expected);
        }
    }
}
